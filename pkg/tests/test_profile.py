import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geosigma.profile import (MM_CONSTANT, SQRT2, W, F_T, F_T_inverse, ProfileParams, QTTable,
                              adaptive_simpson, dW, default_kappa, phi, psi_T, q, q_prime, q_T,
                              q_T_prime, sigma0)


def test_wells():
    assert W(1.0) == 0.0 and W(-1.0) == 0.0 and W(0.0) == 1.0


def test_dW_finite_difference():
    h = 1e-6
    fd = (W(0.3 + h) - W(0.3 - h)) / (2 * h)
    assert abs(fd - dW(0.3)) < 1e-8


def test_q_values():
    assert q(0.0) == 0.0
    assert q(1.0) == pytest.approx(0.888386, abs=1e-6)
    z = np.arange(-3, 4, dtype=float)
    assert np.max(np.abs(q_prime(z) - SQRT2 * np.sqrt(W(q(z))))) < 1e-12


def test_q_tails():
    for z in (2.0, 4.0, 8.0):
        assert abs(q(z) - 1) <= 2 * math.exp(-2 * SQRT2 * z)
        assert abs(q(-z) + 1) <= 2 * math.exp(-2 * SQRT2 * z)


def test_phi():
    assert phi(0.0) == 0.0
    assert phi(1.0) == pytest.approx(2 * SQRT2 / 3, abs=1e-12)
    assert phi(1.0) - phi(-1.0) == pytest.approx(MM_CONSTANT, abs=1e-14)
    assert sigma0(1.0) == pytest.approx(1.885618, abs=1e-6)


def test_simpson():
    assert adaptive_simpson(math.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-12)


def test_params():
    p = ProfileParams.for_medium(5.0, 1.0)
    assert p.kappa == default_kappa(1.0) == 8
    assert p.delta_T == pytest.approx((1 / math.cosh(5.0)) ** 8)
    assert p.delta_T < 1 and p.delta_T <= (2 * math.exp(-5.0)) ** p.kappa


def test_F_T_limit():
    p = ProfileParams(T=math.inf)
    assert p.delta_T == 0.0
    assert F_T(2.0, p) == pytest.approx(SQRT2, abs=1e-15)
    assert F_T(0.0, ProfileParams(T=5.0)) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(-15, 15), st.floats(-15, 15))
def test_F_T_monotone_odd(z1, z2):
    p = ProfileParams(T=3.0)
    if z1 == z2:
        return
    lo, hi = sorted((z1, z2))
    assert F_T(hi, p) > F_T(lo, p)
    assert F_T(-z1, p) == -F_T(z1, p)


def test_inverse():
    p = ProfileParams(T=3.0)
    for z in (0.1, 1.0, 3.0):
        assert F_T(F_T_inverse(z, p), p) == pytest.approx(z, abs=1e-12)


def test_q_T_basic():
    p = ProfileParams.for_medium(5.0, 1.0)
    assert q_T(0.0, p) == 0.0
    for z in (0.1, 0.5, 1.0, 2.0):
        v = q_T(z, p)
        assert q(z) <= v <= q(SQRT2 * z)
    assert abs(q_T(1.0, p) - q(1.0)) <= math.sqrt(p.delta_T) * math.expm1(2 * SQRT2)


def test_q_T_saturates():
    p = ProfileParams(T=2.0, kappa=4)
    assert q_T(1e6, p) == math.tanh(p.zeta_max)
    assert q_T(-1e6, p) == -math.tanh(p.zeta_max)


def test_q_T_ode_residual():
    p = ProfileParams.for_medium(3.0, 1.0)
    h = 1e-5
    for z in np.linspace(-3, 3, 25):
        fd = (q_T(z + h, p) - q_T(z - h, p)) / (2 * h)
        assert abs(fd - SQRT2 * math.sqrt(W(q_T(z, p)) + p.delta_T)) < 1e-8
        assert q_T_prime(z, p) == pytest.approx(SQRT2 * math.sqrt(W(q_T(z, p)) + p.delta_T))


def test_q_T_box_closeness():
    T, Theta = 3.0, 1.5
    p = ProfileParams.for_medium(T, Theta)
    zb = math.sqrt(Theta) * T / 2
    worst = max(abs(q_T(z, p) - q(z)) for z in np.linspace(-zb, zb, 41))
    assert worst <= math.sqrt(p.delta_T) * math.exp(2 * SQRT2 * zb)


def test_q_T_tails():
    p = ProfileParams.for_medium(3.0, 1.0)
    for z in (2.0, 4.0, 8.0):
        assert abs(q_T(z, p) - 1) <= 2 * math.exp(-2 * SQRT2 * z)


def test_psi():
    p = ProfileParams.for_medium(5.0, 1.0)
    assert psi_T(0.0, p) == 0.0
    for z in (-2, -0.5, 0.5, 2):
        assert abs(psi_T(q_T(z, p), p) - z) < 1e-10
    assert psi_T(-0.7, p) == -psi_T(0.7, p)
    with pytest.raises(ValueError):
        psi_T(1.0, ProfileParams(T=math.inf))


def test_table_matches_pointwise():
    p = ProfileParams.for_medium(8.0, 1.0)
    tab = QTTable(p)
    z = np.linspace(-4, 4, 33)
    ref = np.array([q_T(v, p) for v in z])
    assert np.max(np.abs(tab(z) - ref)) < 1e-10
