"""
Compartment Paxos - 分区化 MultiPaxos 及其确定性模拟、线性一致性检查与评估工具

提供三种部署变体（耦合基线、分区化、非复制）的角色状态机，一个可复现的离散事件模拟器，
一个线性一致性/顺序一致性检查器，吞吐模型与消融实验，以及基于 socket 帧的回环部署。
"""

from .app import create_app
from .checker import audit_trace, check_linearizable, check_sequential
from .models import DeploymentPlan, WorkloadSpec, validate_plan
from .sim import run_simulation


__version__ = "0.1.0"


# 导出核心功能
__all__ = [
    "create_app",
    "audit_trace",
    "check_linearizable",
    "check_sequential",
    "DeploymentPlan",
    "WorkloadSpec",
    "validate_plan",
    "run_simulation",
]
