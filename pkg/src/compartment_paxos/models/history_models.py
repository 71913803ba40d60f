"""
历史记录模型，对应 JSON Lines 历史文件的一行
"""
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class HistoryOp(BaseModel):
    model_config = ConfigDict(frozen=True)

    type: Literal["read", "write"]
    key: str
    value: Optional[str] = None


class HistoryEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: int
    kind: Literal["inv", "res"]
    client: int
    seq: int
    op: HistoryOp
    out: Optional[str] = None


class Operation(BaseModel):
    """一次调用及其（可能缺失的）响应"""
    model_config = ConfigDict(frozen=True)

    index: int = Field(..., description='Position of the invocation among all operations.')
    client: int
    seq: int
    op: HistoryOp
    inv_idx: int
    res_idx: Optional[int] = None
    inv_t: int
    res_t: Optional[int] = None
    out: Optional[str] = None

    @property
    def pending(self) -> bool:
        return self.res_idx is None

    @property
    def is_read(self) -> bool:
        return self.op.type == "read"

    def describe(self) -> str:
        if self.is_read:
            body = f"r({self.op.key})->{self.out}"
        else:
            body = f"w({self.op.key},{self.op.value})"
        end = "..." if self.pending else str(self.res_t)
        return f"c{self.client}#{self.seq} {body} [{self.inv_t},{end}]"


class Verdict(BaseModel):
    ok: bool
    witness: List[Operation] = Field(default_factory=list)
    violation: List[Operation] = Field(default_factory=list)


class AuditFinding(BaseModel):
    check: str
    ok: bool
    detail: str = ''
    slot: Optional[int] = None
    node: Optional[str] = None

    def __str__(self) -> str:
        where = []
        if self.slot is not None:
            where.append(f"slot={self.slot}")
        if self.node is not None:
            where.append(f"node={self.node}")
        suffix = f" ({', '.join(where)})" if where else ""
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.check}{suffix}: {self.detail}"


class AuditReport(BaseModel):
    findings: List[AuditFinding] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(f.ok for f in self.findings)

    @property
    def failures(self) -> List[AuditFinding]:
        return [f for f in self.findings if not f.ok]

    def passed(self, check: str) -> bool:
        return all(f.ok for f in self.findings if f.check == check)
