"""
读扩展的解析吞吐模型

假设每个副本每秒至多处理 alpha 条命令：写要在每个副本上执行，读只在一个副本上执行。
"""
import math

from pydantic import BaseModel, Field, model_validator

from ..errors import ValidationError

UNBOUNDED = math.inf


class ModelParams(BaseModel):
    n: int = Field(..., ge=0, description='Replica count.')
    alpha: float = Field(..., gt=0, description='Per-replica command capacity.')
    f_w: float = Field(..., ge=0.0, le=1.0, description='Write fraction.')

    @model_validator(mode="after")
    def _check_defined(self) -> "ModelParams":
        if self.f_w == 0 and self.n == 0:
            raise ValueError("throughput is undefined for n=0 with a read-only workload")
        return self

    @property
    def f_r(self) -> float:
        return 1.0 - self.f_w


def make_params(n: int, alpha: float, f_w: float) -> ModelParams:
    """
    构造模型参数

    Raises:
        ValidationError: 参数越界
    """
    try:
        return ModelParams(n=n, alpha=alpha, f_w=f_w)
    except ValueError as e:
        raise ValidationError(str(e)) from e


def analytical_peak_throughput(m: ModelParams) -> float:
    """峰值吞吐 n * alpha / (n * f_w + f_r)"""
    return m.n * m.alpha / (m.n * m.f_w + m.f_r)


def throughput_limit(m: ModelParams) -> float:
    """
    副本数趋于无穷时的吞吐上限 alpha / f_w

    Returns:
        f_w = 0 时返回 UNBOUNDED
    """
    if m.f_w == 0:
        return UNBOUNDED
    return m.alpha / m.f_w


def is_unbounded(value: float) -> bool:
    return math.isinf(value)
