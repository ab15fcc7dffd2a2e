import math

import numpy as np
import pytest

from geosigma.eikonal import make_strip_grid, solve_signed_distance
from geosigma.medium import direction_frame, make_field
from geosigma.oracle import laminate_sigma_1d
from geosigma.profile import MM_CONSTANT, q, sigma0
from geosigma.sigma import (TailError, coarea_sigma_at_T, equipartition_residual,
                            metric_slope_c, sigma_at_T, sigma_estimate, tail_bound, tail_height)

from conftest import SMOOTH


def strip(field, p, delta=1 / 64, H=8.0):
    return solve_signed_distance(field, make_strip_grid(direction_frame(p), delta, H))


def test_constant_at_T(one, four):
    assert sigma_at_T(one, strip(one, (1, 2)), 16.0) == pytest.approx(MM_CONSTANT, rel=5e-3)
    assert sigma_at_T(four, strip(four, (1, 0)), 16.0) == pytest.approx(2 * MM_CONSTANT, rel=5e-3)


def test_tail_error(one):
    with pytest.raises(TailError):
        sigma_at_T(one, strip(one, (1, 0), H=2.0), 16.0)


def test_lower_bound_smooth(smooth):
    df = strip(smooth, (1, 1))
    assert sigma_at_T(smooth, df, 16.0) >= 1.8856 - 0.01


def test_estimate_calibration(one):
    e = sigma_estimate(one, (1, 0))
    assert e.sigma_value == pytest.approx(1.885618, rel=5e-3)
    assert e.T_schedule == sorted(e.T_schedule) and len(e.per_T) == 3
    assert e.sigma_value >= sigma0(one.theta_hat) - e.error_budget


def test_estimate_q_T_mode(smooth):
    a = sigma_estimate(smooth, (1, 0), profile="q_T")
    b = sigma_estimate(smooth, (1, 0))
    assert a.profile == "q_T"
    assert a.sigma_value == pytest.approx(b.sigma_value, rel=1e-6)


def test_evenness(smooth):
    a = sigma_estimate(smooth, (2, 1))
    b = sigma_estimate(smooth, (-2, -1))
    assert abs(a.sigma_value - b.sigma_value) <= a.error_budget + b.error_budget


def test_laminate(laminate):
    assert sigma_estimate(laminate, (1, 0)).sigma_value == pytest.approx(
        laminate_sigma_1d(laminate), rel=5e-3)


def test_irrational_window_flagged(smooth):
    e = sigma_estimate(smooth, (math.cos(1), math.sin(1)), refine=False)
    assert e.p is None
    assert any("window" in w for w in e.warnings)
    assert e.sigma_value > sigma0(smooth.theta_hat) - 0.05


def test_coarea_constant(one):
    df = strip(one, (1, 2))
    assert coarea_sigma_at_T(one, df, 16.0) == pytest.approx(1.885618, rel=1e-6)


@pytest.mark.parametrize("p", [(1, 0), (1, 2)])
def test_coarea_smooth(smooth, p):
    df = strip(smooth, p)
    direct = sigma_at_T(smooth, df, 16.0)
    assert abs(coarea_sigma_at_T(smooth, df, 16.0) / direct - 1) <= 0.02


def test_s_tail():
    theta = 1.0
    H = tail_height(theta, 1e-8)
    # 2 int_{|s|>H} sech^4(sqrt2 s) ds <= 2 * 2 * 16 e^{-4 sqrt2 H} / (4 sqrt2)
    assert tail_bound(theta, 1.0, H) < 1e-7


def test_monotone_tail(smooth):
    df = strip(smooth, (1, 0), H=8.0)
    v1 = sigma_at_T(smooth, df, 8.0)
    v2 = sigma_at_T(smooth, df, 16.0)
    assert abs(v2 - v1) <= tail_bound(smooth.theta_hat, smooth.Theta_hat, 4.0)


def test_equipartition_exact(one):
    assert equipartition_residual(one, strip(one, (1, 0), H=4.0)) < 1e-3


def test_equipartition_rate(smooth):
    r = [equipartition_residual(smooth, strip(smooth, (1, 2), d, 4.0)) for d in (1 / 64, 1 / 128)]
    assert 1.2 <= r[0] / r[1] <= 2.8


def test_equipartition_negative_control(smooth):
    df = strip(smooth, (1, 0), H=4.0)
    assert equipartition_residual(smooth, df, lambda h: q(2 * h)) > 0.3


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_scaling_law(smooth, lam):
    scaled = make_field(f"{lam ** 2}*({SMOOTH})")
    a = sigma_estimate(scaled, (1, 1)).sigma_value
    b = sigma_estimate(smooth, (1, 1)).sigma_value
    assert a == pytest.approx(lam * b, rel=0.01)


def test_metric_slope_constant(one, four):
    assert metric_slope_c(one, (1, 2)).c == pytest.approx([1, 1, 1, 1], abs=1e-10)
    assert metric_slope_c(four, (1, 0)).c == pytest.approx([2, 2, 2, 2], abs=1e-10)


def test_metric_slope_bounds(smooth):
    ms = metric_slope_c(smooth, (1, 1))
    assert ms.in_bounds and not ms.flagged
