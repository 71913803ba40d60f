"""
模拟器输入与输出模型
"""
import json
from enum import Enum
from typing import Annotated, Dict, List, Optional

from pydantic import BaseModel, Field
from pydantic import ValidationError as PydanticValidationError

from ..config import settings
from ..errors import ValidationError
from .plan_models import DeploymentPlan


class NetModel(BaseModel):
    """
    模拟网络

    link_drop 按链路类别覆盖 drop_probability，键为 "<源角色>-><目标角色>"，
    角色名取地址 "/" 之前的部分（与 registry.role_of 一致），如 "proposer->proxy"、"proxy->acceptor"。
    未列出的链路使用 drop_probability。
    """
    seed: int = Field(0, description='Seed of every random draw in the run.')
    delay_min: int = Field(default_factory=lambda: settings.sim_delay_min, ge=0)
    delay_max: int = Field(default_factory=lambda: settings.sim_delay_max, ge=0)
    drop_probability: float = Field(0.0, ge=0.0, le=1.0)
    link_drop: Dict[str, Annotated[float, Field(ge=0.0, le=1.0)]] = Field(
        default_factory=dict,
        description='Per link class drop probability keyed "<src role>-><dst role>", e.g. "proposer->proxy".',
    )
    duplicate_probability: float = Field(0.0, ge=0.0, le=1.0)
    reordering_enabled: bool = True

    def drop_for(self, src_role: str, dst_role: str) -> float:
        return self.link_drop.get(f"{src_role}->{dst_role}", self.drop_probability)

    @property
    def lossy(self) -> bool:
        return self.drop_probability > 0 or self.duplicate_probability > 0 or any(
            p > 0 for p in self.link_drop.values()
        )


class CapacityModel(BaseModel):
    """
    每台机器是一个带队列的单服务台

    处理一个事件的服务时间为
    message_cost[role] * (1 + 发出消息数) + command_cost[role] * 携带命令数。
    """
    message_cost: Dict[str, float] = Field(default_factory=dict)
    command_cost: Dict[str, float] = Field(default_factory=dict)

    def cost(self, role: str, sends: int, commands: int, inbound: int = 1) -> float:
        return (
            self.message_cost.get(role, 0.0) * (inbound + sends)
            + self.command_cost.get(role, 0.0) * commands
        )

    @property
    def enabled(self) -> bool:
        return any(v > 0 for v in self.message_cost.values()) or any(
            v > 0 for v in self.command_cost.values()
        )

    @classmethod
    def uniform(cls, message_cost: float = 1.0) -> "CapacityModel":
        roles = ["proposer", "proxy", "acceptor", "replica", "batcher", "unbatcher", "server"]
        return cls(message_cost={role: message_cost for role in roles})

    @classmethod
    def replica_bound(cls, command_cost: float = 10.0) -> "CapacityModel":
        """只有副本有执行开销，副本单机容量 alpha = 1 / command_cost"""
        return cls(command_cost={"replica": command_cost})


class FaultKind(str, Enum):
    crash = 'crash'
    partition = 'partition'
    heal = 'heal'
    leader_failover = 'leader_failover'


class FaultSpec(BaseModel):
    kind: FaultKind
    at: int = Field(..., ge=0, description='Sim time of the fault.')
    node: Optional[str] = Field(None, description='Crashed node address (crash only).')
    groups: List[List[str]] = Field(
        default_factory=list, description='Partition groups; unlisted nodes form one more group.'
    )


class RunConfig(BaseModel):
    """一次运行的全部输入：计划加上可选的网络、容量和故障配置"""
    plan: DeploymentPlan
    net: NetModel = Field(default_factory=NetModel)
    capacity: CapacityModel = Field(default_factory=CapacityModel)
    faults: List[FaultSpec] = Field(default_factory=list)


class NodeCounters(BaseModel):
    messages_in: int = 0
    messages_out: int = 0
    commands: int = 0
    in_by_type: Dict[str, int] = Field(default_factory=dict)
    out_by_type: Dict[str, int] = Field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.messages_in + self.messages_out


class CompletedOp(BaseModel):
    client: int
    seq: int
    kind: str
    invoke_time: int
    response_time: int
    slot: int = -1


class TraceCounters(BaseModel):
    nodes: Dict[str, NodeCounters] = Field(default_factory=dict)
    completed: List[CompletedOp] = Field(default_factory=list)
    delivered: int = 0
    dropped: int = 0
    duplicated: int = 0

    def node(self, address: str) -> NodeCounters:
        counters = self.nodes.get(address)
        if counters is None:
            counters = self.nodes[address] = NodeCounters()
        return counters


class Metrics(BaseModel):
    completed_ops: int = 0
    incomplete_ops: int = 0
    throughput: float = Field(0.0, description='Completed ops per tick in the post-warmup window.')
    p50: float = 0.0
    p99: float = 0.0
    machines: int = 0
    duration: int = 0
    stalled: bool = Field(False, description='No operation completed in the measurement window.')


class ThroughputPoint(BaseModel):
    clients: int
    throughput: float
    p50: float
    p99: float = 0.0
    stalled: bool = False


def load_run_config(path: str) -> RunConfig:
    """
    从计划文件加载运行配置

    计划文件是 DeploymentPlan 的 JSON 文档，可以额外带 net、capacity、faults 三节。

    Raises:
        ValidationError: 文件无法解析或字段不合法
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"无法读取计划文件 {path}: {e}") from e
    if not isinstance(document, dict):
        raise ValidationError(f"计划文件 {path} 必须是 JSON 对象")

    sections = {name: document.pop(name) for name in ("net", "capacity", "faults") if name in document}
    try:
        return RunConfig(plan=DeploymentPlan.model_validate(document), **sections)
    except PydanticValidationError as e:
        raise ValidationError(f"计划文件 {path} 字段不合法: {e}") from e


class ReadObservation(BaseModel):
    """客户端看到的一次读：用于审计读水位规则、顺序单调性和前缀合法性"""
    client: int
    seq: int
    level: str
    key: str
    output: Optional[str] = None
    required_slot: Optional[int] = Field(None, description='Quorum watermark i or the sequential watermark sent.')
    observed_slot: int = Field(-1, description='Replica watermark j the read executed against.')
    invoke_time: int = 0
    batched: bool = False
