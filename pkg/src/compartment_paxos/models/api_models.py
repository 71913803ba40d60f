"""管理网关的请求与响应模型"""
from typing import List, Optional

from pydantic import BaseModel, Field


class KvWrite(BaseModel):
    value: str = Field(..., description='The value to store.')


class KvResponse(BaseModel):
    key: str
    value: Optional[str] = Field(None, description='Read result, or "OK" for writes. Null when the key is absent.')
    slot: int = Field(-1, description='Log slot the operation observed or was chosen in.')


class ReplicaStatus(BaseModel):
    address: str
    executed_watermark: int
    log_size: int
    pending_reads: int = 0


class AcceptorStatus(BaseModel):
    address: str
    vote_watermark: int
    promised_ballot: Optional[str] = None


class ClusterStatus(BaseModel):
    variant: str
    leader: Optional[str] = None
    ballot: Optional[str] = None
    num_roles: int
    machines: int
    replicas: List[ReplicaStatus] = Field(default_factory=list)
    acceptors: List[AcceptorStatus] = Field(default_factory=list)
    frames_routed: int = 0
    frames_unroutable: int = 0
    connections_dropped: int = 0
    safety_violations: List[str] = Field(default_factory=list)


class HealthResponse(BaseModel):
    status: str = "ok"
    serving: bool = False
