from .deployment import Deployment, build_deployment
from .simulator import (
    SimulationResult,
    Simulator,
    compute_metrics,
    inject_leader_failover,
    run_simulation,
)
from .throughput import measure_peak_throughput

__all__ = [
    "Deployment",
    "build_deployment",
    "SimulationResult",
    "Simulator",
    "compute_metrics",
    "inject_leader_failover",
    "run_simulation",
    "measure_peak_throughput",
]
