"""
闭环客户端数扫描，测量吞吐-延迟曲线
"""
import logging
from typing import List, Optional, Tuple

from ..models import CapacityModel, DeploymentPlan, NetModel, ThroughputPoint, WorkloadSpec
from .simulator import run_simulation

logger = logging.getLogger(__name__)

DEFAULT_DURATION = 4000
DEFAULT_WARMUP = 0.1


def measure_peak_throughput(
    plan: DeploymentPlan,
    capacity: CapacityModel,
    workload: WorkloadSpec,
    client_counts: List[int],
    duration: int = DEFAULT_DURATION,
    net: Optional[NetModel] = None,
    warmup_fraction: float = DEFAULT_WARMUP,
) -> Tuple[ThroughputPoint, List[ThroughputPoint]]:
    """
    对每个客户端数运行一次无限操作流的闭环模拟

    Args:
        plan: 部署计划
        capacity: 容量模型
        workload: 工作负载模板，num_clients 与 ops_per_client 会被覆盖
        client_counts: 要扫描的客户端数
        duration: 每次运行的模拟时长
        net: 网络模型
        warmup_fraction: 预热比例

    Returns:
        (峰值点, 完整曲线)
    """
    curve: List[ThroughputPoint] = []
    for clients in client_counts:
        spec = workload.model_copy(update={"num_clients": clients, "ops_per_client": None})
        result = run_simulation(
            plan, net=net, capacity=capacity, workload=spec, duration=duration, warmup_fraction=warmup_fraction,
        )
        point = ThroughputPoint(
            clients=clients,
            throughput=result.metrics.throughput,
            p50=result.metrics.p50,
            p99=result.metrics.p99,
            stalled=result.metrics.stalled,
        )
        logger.info(f"{clients} 个客户端：吞吐 {point.throughput:.4f} ops/tick，p50 {point.p50:.1f}")
        curve.append(point)
    peak = max(curve, key=lambda p: p.throughput)
    return peak, curve
