"""
角色状态模型

每个角色实例独占一份状态，只在自己的串行处理器里修改。
"""
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, Field

from .command_models import Ballot, Batch, Command, ResultEntry
from .message_models import Phase1b, Vote
from .plan_models import ReadConsistency


class AcceptorState(BaseModel):
    promised_ballot: Optional[Ballot] = None
    votes: Dict[int, Vote] = Field(default_factory=dict)
    vote_watermark: int = Field(-1, description='Largest slot voted in, -1 when no votes.')


class LeaderPhase(str, Enum):
    phase1 = 'Phase1'
    phase2 = 'Phase2'
    inactive = 'Inactive'


class LeaderState(BaseModel):
    ballot: Ballot = Field(default_factory=Ballot)
    phase: LeaderPhase = LeaderPhase.inactive
    next_slot: int = 0
    phase1_responses: Dict[int, Phase1b] = Field(default_factory=dict)
    phase1_quorum: Tuple[int, ...] = ()
    phase1_tried: Set[Tuple[int, ...]] = Field(default_factory=set)
    pending_proxy_index: int = 0
    # 本选票下每个槽提议过的值，用于响应副本的 Recover
    proposed: Dict[int, Batch] = Field(default_factory=dict)
    buffered: List[Batch] = Field(default_factory=list)


class PendingPhase2(BaseModel):
    value: Batch
    column: Set[int] = Field(default_factory=set, description='Every acceptor contacted so far.')
    acks: Set[int] = Field(default_factory=set)
    tried: List[Tuple[int, ...]] = Field(default_factory=list)
    retries_used: int = 0
    leader: str = ''


class ProxyLeaderState(BaseModel):
    pending: Dict[Tuple[int, Tuple[int, int]], PendingPhase2] = Field(default_factory=dict)


class ClientRecord(BaseModel):
    seq: int
    reply: ResultEntry


class PendingRead(BaseModel):
    commands: Tuple[Command, ...]
    required_slot: int
    batched: bool = False
    reply_to: str = ''


class ReplicaState(BaseModel):
    index: int
    n: int
    log: Dict[int, Batch] = Field(default_factory=dict)
    executed_watermark: int = -1
    kv: Dict[str, str] = Field(default_factory=dict)
    pending_reads: List[PendingRead] = Field(default_factory=list)
    client_table: Dict[int, ClientRecord] = Field(default_factory=dict)


class BatcherState(BaseModel):
    pending_writes: List[Command] = Field(default_factory=list)
    pending_reads: List[Command] = Field(default_factory=list)
    batch_size: int = 10
    timeout: int = 10
    write_timer_armed: bool = False
    read_timer_armed: bool = False


class OutstandingRead(BaseModel):
    commands: Tuple[Command, ...]
    row: Tuple[int, ...] = ()
    acks: Dict[int, int] = Field(default_factory=dict)
    round: int = 0


class ClientReadState(BaseModel):
    level: ReadConsistency = ReadConsistency.linearizable
    seq_watermark: int = -1
    outstanding: Dict[str, OutstandingRead] = Field(default_factory=dict)
