"""
消融实验：从耦合 MultiPaxos 出发，逐步解耦并扩展各个角色，测量每一步的峰值吞吐
"""
import logging
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ..errors import AblationStepError, PlanValidationError
from ..models import CapacityModel, DeploymentPlan, NetModel, WorkloadSpec, machine_count, validate_plan
from ..sim.throughput import measure_peak_throughput
from .report import METRICS_HEADER, metrics_row, render_csv

logger = logging.getLogger(__name__)

ABLATION_HEADER = ["step", "label"] + METRICS_HEADER + ["machines", "stalled"]


class AblationStep(BaseModel):
    label: str
    delta: Dict[str, Any] = Field(default_factory=dict, description='Plan fields changed by this step.')


class AblationRow(BaseModel):
    step: int
    label: str
    plan: DeploymentPlan
    clients: int
    throughput: float
    p50: float
    p99: float
    machines: int
    stalled: bool = Field(False, description='Every run of the client sweep completed nothing.')


def default_ablation_steps() -> List[AblationStep]:
    """不开批处理的消融步骤"""
    steps = [
        AblationStep(label="coupled", delta={"variant": "coupled"}),
        AblationStep(label="+proxy leaders (2)", delta={
            "variant": "compartmentalized", "acceptor_quorums": "majority", "num_proxy_leaders": 2,
        }),
    ]
    steps += [AblationStep(label=f"proxy leaders {k}", delta={"num_proxy_leaders": k}) for k in range(3, 8)]
    steps += [
        AblationStep(label="+replica", delta={"num_replicas": 3}),
        AblationStep(label="proxy leaders 10", delta={"num_proxy_leaders": 10}),
        AblationStep(label="2x2 grid", delta={"acceptor_quorums": "grid", "grid_rows": 2, "grid_cols": 2}),
        AblationStep(label="2x3 grid", delta={"grid_cols": 3}),
    ]
    return steps


def batched_ablation_steps() -> List[AblationStep]:
    """开启批处理后的消融步骤：逐步增大批次，再增加解批器"""
    return [
        AblationStep(label="batch 10", delta={
            "variant": "compartmentalized", "acceptor_quorums": "majority", "num_proxy_leaders": 10,
            "batching_enabled": True, "num_batchers": 2, "num_unbatchers": 2, "batch_size": 10,
        }),
        AblationStep(label="batch 50", delta={"batch_size": 50}),
        AblationStep(label="batch 100", delta={"batch_size": 100}),
        AblationStep(label="unbatchers 3", delta={"num_unbatchers": 3}),
    ]


def default_ablation_capacity() -> CapacityModel:
    return CapacityModel.uniform(1.0)


def run_ablation(
    base: DeploymentPlan,
    steps: Optional[List[AblationStep]] = None,
    capacity: Optional[CapacityModel] = None,
    workload: Optional[WorkloadSpec] = None,
    client_counts: Optional[List[int]] = None,
    duration: int = 3000,
    net: Optional[NetModel] = None,
) -> List[AblationRow]:
    """
    依次应用每一步的字段变化（累积），测量峰值吞吐

    Args:
        base: 起始计划
        steps: 消融步骤，默认 default_ablation_steps()
        capacity: 容量模型，默认每条消息 1 tick
        workload: 工作负载模板，默认只写
        client_counts: 每一步扫描的客户端数
        duration: 每次模拟的时长

    Returns:
        每一步一行

    Raises:
        AblationStepError: 某一步得到的计划不合法，携带步骤编号
    """
    steps = steps if steps is not None else default_ablation_steps()
    capacity = capacity or default_ablation_capacity()
    workload = workload or base.workload or WorkloadSpec(read_fraction=0.0)
    client_counts = client_counts or [20, 50]

    rows: List[AblationRow] = []
    current = base.model_dump()
    for index, step in enumerate(steps):
        current = {**current, **step.delta}
        try:
            plan = validate_plan(DeploymentPlan.model_validate(current))
        except (PlanValidationError, ValueError) as e:
            raise AblationStepError(index, step.label, e) from e
        peak, _ = measure_peak_throughput(plan, capacity, workload, client_counts, duration=duration, net=net)
        logger.info(f"消融步骤 {index} {step.label}：峰值吞吐 {peak.throughput:.4f} ops/tick")
        if peak.stalled:
            logger.warning(f"消融步骤 {index} {step.label} 的所有运行都没有完成任何操作")
        rows.append(AblationRow(
            step=index,
            label=step.label,
            plan=plan,
            clients=peak.clients,
            throughput=peak.throughput,
            p50=peak.p50,
            p99=peak.p99,
            machines=machine_count(plan),
            stalled=peak.stalled,
        ))
    return rows


def render_ablation_csv(rows: List[AblationRow], workload: WorkloadSpec) -> str:
    out = []
    for row in rows:
        record = {"step": str(row.step), "label": row.label}
        record.update(metrics_row(row.plan, workload, row.throughput, row.p50, row.p99, clients=row.clients))
        record["machines"] = str(row.machines)
        record["stalled"] = "1" if row.stalled else "0"
        out.append(record)
    return render_csv(ABLATION_HEADER, out)
