"""
解析吞吐模型测试
"""

import math

import pytest

from src.compartment_paxos.errors import ValidationError
from src.compartment_paxos.evaluation import (
    analytical_peak_throughput,
    is_unbounded,
    make_params,
    throughput_limit,
)


class TestAnalyticalModel:
    """analytical_peak_throughput / throughput_limit 测试类"""

    def test_six_replicas_half_writes(self):
        params = make_params(6, 100_000, 0.5)
        assert analytical_peak_throughput(params) == pytest.approx(171428.5714285714, rel=1e-9)
        assert throughput_limit(params) == pytest.approx(200_000, rel=1e-9)

    def test_limit_is_twice_alpha_at_half_writes(self):
        for alpha in (1.0, 250.0, 100_000.0):
            assert throughput_limit(make_params(3, alpha, 0.5)) == pytest.approx(2 * alpha, rel=1e-9)

    def test_write_only_is_flat(self):
        for n in range(1, 8):
            params = make_params(n, 100.0, 1.0)
            assert analytical_peak_throughput(params) == pytest.approx(100.0, rel=1e-9)
            assert throughput_limit(params) == pytest.approx(100.0, rel=1e-9)

    def test_read_only_scales_linearly_and_is_unbounded(self):
        for n in range(1, 8):
            assert analytical_peak_throughput(make_params(n, 10.0, 0.0)) == pytest.approx(10.0 * n, rel=1e-9)
        assert is_unbounded(throughput_limit(make_params(4, 10.0, 0.0)))

    @pytest.mark.parametrize("n,f_w", [(2, 0.1), (4, 0.4), (5, 0.9), (3, 0.25)])
    def test_closed_form(self, n: int, f_w: float):
        alpha = 1234.5
        expected = n * alpha / (n * f_w + (1 - f_w))
        assert math.isclose(analytical_peak_throughput(make_params(n, alpha, f_w)), expected, rel_tol=1e-9)

    def test_peak_never_exceeds_limit(self):
        for n in range(1, 20):
            params = make_params(n, 50.0, 0.3)
            assert analytical_peak_throughput(params) <= throughput_limit(params)

    def test_no_replicas_read_only_is_undefined(self):
        with pytest.raises(ValidationError):
            make_params(0, 10.0, 0.0)

    @pytest.mark.parametrize("n,alpha,f_w", [(-1, 1.0, 0.5), (2, 0.0, 0.5), (2, 1.0, 1.5)])
    def test_out_of_range_rejected(self, n, alpha, f_w):
        with pytest.raises(ValidationError):
            make_params(n, alpha, f_w)
