"""
部署计划与工作负载模型，以及部署计划校验
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from ..errors import PlanValidationError


class Variant(str, Enum):
    coupled = 'coupled'
    compartmentalized = 'compartmentalized'
    unreplicated = 'unreplicated'


class QuorumKind(str, Enum):
    grid = 'grid'
    majority = 'majority'


class ReadConsistency(str, Enum):
    linearizable = 'linearizable'
    sequential = 'sequential'
    eventual = 'eventual'


class SelectionPolicy(str, Enum):
    random = 'random'
    round_robin = 'round_robin'


class WorkloadSpec(BaseModel):
    num_clients: int = Field(
        4, ge=1, description='Number of closed-loop clients.', title='Num Clients'
    )
    read_fraction: float = Field(
        0.0, ge=0.0, le=1.0, description='Probability that an operation is a read.', title='Read Fraction'
    )
    skew_p: float = Field(
        0.0, ge=0.0, le=1.0, description='Probability that an operation targets key 0.', title='Skew'
    )
    keyspace: int = Field(
        10_000, ge=2, description='Keys are drawn from 0 and 2..keyspace.', title='Keyspace'
    )
    ops_per_client: Optional[int] = Field(
        50, ge=0, description='Operations per client; None means an unbounded stream.', title='Ops Per Client'
    )
    read_consistency: ReadConsistency = Field(
        ReadConsistency.linearizable, description='Consistency level of client reads.', title='Read Consistency'
    )
    rng_seed: int = Field(
        0, description='Seed of the operation streams.', title='RNG Seed'
    )
    value_size: int = Field(
        16, ge=0, description='Minimum length of written values (left padded).', title='Value Size'
    )

    @property
    def write_fraction(self) -> float:
        return 1.0 - self.read_fraction


class DeploymentPlan(BaseModel):
    f: int = Field(1, ge=0, description='Number of tolerated crash faults.')
    num_proposers: int = Field(2, ge=0)
    num_proxy_leaders: int = Field(2, ge=0)
    grid_rows: int = Field(2, ge=0)
    grid_cols: int = Field(2, ge=0)
    num_replicas: int = Field(2, ge=0)
    num_batchers: int = Field(0, ge=0)
    num_unbatchers: int = Field(0, ge=0)
    batching_enabled: bool = False
    batch_size: int = Field(10, ge=0)
    batch_timeout: int = Field(10, ge=0, description='Batch flush timeout in sim-time ticks.')
    variant: Variant = Variant.compartmentalized
    acceptor_quorums: QuorumKind = Field(
        QuorumKind.grid, description='Quorum system of the compartmentalized acceptors.'
    )
    proxy_selection: SelectionPolicy = SelectionPolicy.random
    read_selection: SelectionPolicy = SelectionPolicy.random
    workload: Optional[WorkloadSpec] = None

    @model_validator(mode="before")
    @classmethod
    def _accept_variant_case(cls, data):
        # JSON 中允许 "Coupled" / "Compartmentalized" 的写法
        if isinstance(data, dict) and isinstance(data.get("variant"), str):
            data = {**data, "variant": data["variant"].lower()}
        return data

    @property
    def num_acceptors(self) -> int:
        if self.variant == Variant.compartmentalized and self.acceptor_quorums == QuorumKind.grid:
            return self.grid_rows * self.grid_cols
        if self.variant == Variant.unreplicated:
            return 0
        return 2 * self.f + 1

    @property
    def uses_grid(self) -> bool:
        return self.variant == Variant.compartmentalized and self.acceptor_quorums == QuorumKind.grid


class PlanViolation(BaseModel):
    code: str = Field(..., description='Violation name, e.g. GridRowsBelowMinimum.')
    field: str = Field(..., description='Offending plan field.')
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def _at_least(violations: List[PlanViolation], code: str, field: str, value: int, minimum: int, label: str) -> None:
    if value < minimum:
        violations.append(PlanViolation(
            code=code,
            field=field,
            message=f"{field}={value} is below the minimum {label}={minimum}",
        ))


def plan_violations(plan: DeploymentPlan) -> List[PlanViolation]:
    """
    列出部署计划违反的所有约束

    Args:
        plan: 部署计划

    Returns:
        违反项列表，每个违反的约束一项
    """
    violations: List[PlanViolation] = []
    f = plan.f
    _at_least(violations, "FaultToleranceBelowMinimum", "f", f, 1, "1")

    if plan.variant == Variant.unreplicated:
        if plan.batching_enabled:
            violations.append(PlanViolation(
                code="BatchingRequiresCompartmentalized",
                field="batching_enabled",
                message="batching is only supported by the compartmentalized variant",
            ))
        return violations

    _at_least(violations, "ProposersBelowMinimum", "num_proposers", plan.num_proposers, f + 1, "f+1")
    _at_least(violations, "ReplicasBelowMinimum", "num_replicas", plan.num_replicas, f + 1, "f+1")

    if plan.variant == Variant.coupled:
        # 耦合基线固定 2f+1 个多数派接受者，没有代理领导者和批处理器
        if plan.batching_enabled:
            violations.append(PlanViolation(
                code="BatchingRequiresCompartmentalized",
                field="batching_enabled",
                message="batching is only supported by the compartmentalized variant",
            ))
        return violations

    if plan.acceptor_quorums == QuorumKind.grid:
        _at_least(violations, "GridRowsBelowMinimum", "grid_rows", plan.grid_rows, f + 1, "f+1")
        _at_least(violations, "GridColsBelowMinimum", "grid_cols", plan.grid_cols, f + 1, "f+1")
    _at_least(violations, "ProxyLeadersBelowMinimum", "num_proxy_leaders", plan.num_proxy_leaders, f + 1, "f+1")

    if plan.batching_enabled:
        _at_least(violations, "BatchersBelowMinimum", "num_batchers", plan.num_batchers, f + 1, "f+1")
        _at_least(violations, "UnbatchersBelowMinimum", "num_unbatchers", plan.num_unbatchers, f + 1, "f+1")
        _at_least(violations, "BatchSizeBelowMinimum", "batch_size", plan.batch_size, 1, "1")
        _at_least(violations, "BatchTimeoutBelowMinimum", "batch_timeout", plan.batch_timeout, 1, "1")

    return violations


def validate_plan(plan: DeploymentPlan) -> DeploymentPlan:
    """
    校验部署计划

    Args:
        plan: 部署计划

    Returns:
        所有约束都满足时原样返回计划

    Raises:
        PlanValidationError: 任一约束不满足时，携带全部违反项
    """
    violations = plan_violations(plan)
    if violations:
        raise PlanValidationError(violations)
    return plan


def machine_count(plan: DeploymentPlan) -> int:
    """
    计划使用的机器数

    耦合基线中每台机器同时承担提议者、接受者和副本，其余变体每个角色实例独占一台机器。
    """
    if plan.variant == Variant.unreplicated:
        batchers = plan.num_batchers + plan.num_unbatchers if plan.batching_enabled else 0
        return 1 + batchers
    if plan.variant == Variant.coupled:
        return max(plan.num_proposers, plan.num_acceptors, plan.num_replicas)
    total = plan.num_proposers + plan.num_proxy_leaders + plan.num_acceptors + plan.num_replicas
    if plan.batching_enabled:
        total += plan.num_batchers + plan.num_unbatchers
    return total
