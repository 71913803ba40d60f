"""
数据模型
"""
from .api_models import AcceptorStatus, ClusterStatus, HealthResponse, KvResponse, KvWrite, ReplicaStatus
from .command_models import (
    ABSENT,
    OK_OUTPUT,
    Ballot,
    Batch,
    Command,
    NoopOp,
    ReadOp,
    ResultBatch,
    ResultEntry,
    WriteOp,
    ballot_compare,
)
from .history_models import AuditFinding, AuditReport, HistoryEvent, HistoryOp, Operation, Verdict
from .message_models import (
    BatchRequest,
    Chosen,
    ClientReply,
    ClientRequest,
    Envelope,
    LeaderInfo,
    Message,
    Nack,
    Phase1a,
    Phase1b,
    Phase2a,
    Phase2b,
    PreRead,
    PreReadAck,
    ReadRequest,
    Recover,
    ResultBatchMessage,
    Vote,
    message_adapter,
)
from .plan_models import (
    DeploymentPlan,
    PlanViolation,
    QuorumKind,
    ReadConsistency,
    SelectionPolicy,
    Variant,
    WorkloadSpec,
    machine_count,
    plan_violations,
    validate_plan,
)
from .sim_models import (
    CapacityModel,
    FaultKind,
    FaultSpec,
    Metrics,
    NetModel,
    ReadObservation,
    RunConfig,
    ThroughputPoint,
    TraceCounters,
    load_run_config,
)

__all__ = [
    "AcceptorStatus",
    "ClusterStatus",
    "HealthResponse",
    "KvResponse",
    "KvWrite",
    "ReplicaStatus",
    "ABSENT",
    "OK_OUTPUT",
    "Ballot",
    "Batch",
    "Command",
    "NoopOp",
    "ReadOp",
    "ResultBatch",
    "ResultEntry",
    "WriteOp",
    "ballot_compare",
    "AuditFinding",
    "AuditReport",
    "HistoryEvent",
    "HistoryOp",
    "Operation",
    "Verdict",
    "BatchRequest",
    "Chosen",
    "ClientReply",
    "ClientRequest",
    "Envelope",
    "LeaderInfo",
    "Message",
    "Nack",
    "Phase1a",
    "Phase1b",
    "Phase2a",
    "Phase2b",
    "PreRead",
    "PreReadAck",
    "ReadRequest",
    "Recover",
    "ResultBatchMessage",
    "Vote",
    "message_adapter",
    "DeploymentPlan",
    "PlanViolation",
    "QuorumKind",
    "ReadConsistency",
    "SelectionPolicy",
    "Variant",
    "WorkloadSpec",
    "machine_count",
    "plan_violations",
    "validate_plan",
    "CapacityModel",
    "FaultKind",
    "FaultSpec",
    "Metrics",
    "NetModel",
    "ReadObservation",
    "RunConfig",
    "ThroughputPoint",
    "TraceCounters",
    "load_run_config",
]
