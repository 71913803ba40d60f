from .base_quorum_system import BaseQuorumSystem, Quorum
from .grid_quorum_system import GridQuorumSystem
from .majority_quorum_system import MajorityQuorumSystem

__all__ = [
    "BaseQuorumSystem",
    "Quorum",
    "GridQuorumSystem",
    "MajorityQuorumSystem",
    "quorum_system_for",
]


def quorum_system_for(plan) -> BaseQuorumSystem:
    """按部署计划构造接受者法定人数系统"""
    if plan.uses_grid:
        return GridQuorumSystem(plan.grid_rows, plan.grid_cols)
    return MajorityQuorumSystem(plan.f)
