"""
指标 CSV 输出
"""
import csv
import io
from typing import Dict, List, Optional

from ..models import DeploymentPlan, Metrics, WorkloadSpec

METRICS_HEADER = [
    "variant", "clients", "readfrac", "replicas", "rows", "cols", "proxies", "batch", "throughput", "p50", "p99",
]


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def metrics_row(plan: DeploymentPlan, workload: WorkloadSpec, throughput: float, p50: float, p99: float,
                clients: Optional[int] = None) -> Dict[str, str]:
    return {
        "variant": plan.variant.value,
        "clients": str(workload.num_clients if clients is None else clients),
        "readfrac": _fmt(workload.read_fraction),
        "replicas": str(plan.num_replicas),
        "rows": str(plan.grid_rows if plan.uses_grid else 0),
        "cols": str(plan.grid_cols if plan.uses_grid else 0),
        "proxies": str(plan.num_proxy_leaders if plan.variant.value == "compartmentalized" else 0),
        "batch": str(plan.batch_size if plan.batching_enabled else 1),
        "throughput": _fmt(throughput),
        "p50": _fmt(p50),
        "p99": _fmt(p99),
    }


def render_csv(header: List[str], rows: List[Dict[str, str]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def render_metrics_csv(plan: DeploymentPlan, workload: WorkloadSpec, metrics: Metrics) -> str:
    return render_csv(METRICS_HEADER, [metrics_row(plan, workload, metrics.throughput, metrics.p50, metrics.p99)])


def write_text(path: str, content: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(content)
