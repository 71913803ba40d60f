"""
领域词汇：日志槽、选票、命令与批次
"""
from typing import Annotated, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field


# 日志位置，由领导者从 0 开始稠密分配，永不复用
Slot = int

# 写命令的执行结果
OK_OUTPUT = "OK"
# 读不存在的键时的输出
ABSENT: Optional[str] = None


class Ballot(BaseModel):
    """
    选票，按 (round, proposer_id) 字典序全序比较

    不同提议者的 proposer_id 不同，因此永远不会产生相同的选票。
    """
    model_config = ConfigDict(frozen=True)

    round: int = Field(0, ge=0, description='Election round.')
    proposer_id: int = Field(0, ge=0, description='Index of the proposer owning the ballot.')

    def key(self) -> Tuple[int, int]:
        return (self.round, self.proposer_id)

    def __lt__(self, other: "Ballot") -> bool:
        return self.key() < other.key()

    def __le__(self, other: "Ballot") -> bool:
        return self.key() <= other.key()

    def __gt__(self, other: "Ballot") -> bool:
        return self.key() > other.key()

    def __ge__(self, other: "Ballot") -> bool:
        return self.key() >= other.key()

    def successor(self, proposer_id: int) -> "Ballot":
        """返回属于 proposer_id 且严格大于当前选票的最小选票"""
        return Ballot(round=self.round + 1, proposer_id=proposer_id)

    def __str__(self) -> str:
        return f"({self.round},{self.proposer_id})"


def ballot_compare(a: Ballot, b: Ballot) -> int:
    """
    比较两张选票

    Returns:
        -1 表示 a < b，0 表示相等，1 表示 a > b
    """
    ka, kb = a.key(), b.key()
    return (ka > kb) - (ka < kb)


class WriteOp(BaseModel):
    model_config = ConfigDict(frozen=True)

    type: Literal["write"] = "write"
    key: str
    value: str


class ReadOp(BaseModel):
    model_config = ConfigDict(frozen=True)

    type: Literal["read"] = "read"
    key: str


class NoopOp(BaseModel):
    model_config = ConfigDict(frozen=True)

    type: Literal["noop"] = "noop"


Op = Annotated[Union[WriteOp, ReadOp, NoopOp], Field(discriminator="type")]


class Command(BaseModel):
    """
    客户端发出的状态机命令

    (client_id, seq) 全局唯一。读命令不进入日志；Noop 只在领导者恢复时产生。
    """
    model_config = ConfigDict(frozen=True)

    client_id: int = Field(..., description='Client identity; -1 for leader-generated noops.')
    seq: int = Field(..., description='Per-client sequence number.')
    op: Op

    @property
    def is_read(self) -> bool:
        return self.op.type == "read"

    @property
    def is_write(self) -> bool:
        return self.op.type == "write"

    @property
    def is_noop(self) -> bool:
        return self.op.type == "noop"

    @classmethod
    def noop(cls) -> "Command":
        return cls(client_id=-1, seq=-1, op=NoopOp())


class Batch(BaseModel):
    """按批处理器到达顺序排列的写命令批次，日志槽中选定的单位"""
    model_config = ConfigDict(frozen=True)

    commands: Tuple[Command, ...] = Field(..., description='Ordered write commands.')

    def __len__(self) -> int:
        return len(self.commands)

    @property
    def is_noop(self) -> bool:
        return all(cmd.is_noop for cmd in self.commands)

    @classmethod
    def of(cls, *commands: Command) -> "Batch":
        return cls(commands=tuple(commands))

    @classmethod
    def noop(cls) -> "Batch":
        return cls(commands=(Command.noop(),))


class ResultEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    client_id: int
    seq: int
    output: Optional[str] = None
    slot: int = Field(-1, description='Log slot the command executed in, or the watermark a read observed.')


class ResultBatch(BaseModel):
    """副本执行一个批次后形成的结果批次，每条命令一个条目"""
    model_config = ConfigDict(frozen=True)

    entries: Tuple[ResultEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)
