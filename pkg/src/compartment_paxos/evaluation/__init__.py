from .throughput_model import (
    UNBOUNDED,
    ModelParams,
    analytical_peak_throughput,
    is_unbounded,
    make_params,
    throughput_limit,
)
from .workload import HOT_KEY, generate_ops, iter_client_ops

__all__ = [
    "UNBOUNDED",
    "ModelParams",
    "analytical_peak_throughput",
    "is_unbounded",
    "make_params",
    "throughput_limit",
    "HOT_KEY",
    "generate_ops",
    "iter_client_ops",
]
