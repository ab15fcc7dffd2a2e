import math

import numpy as np
import pytest

from geosigma.analyzer import (angular_derivatives, b_probe, convexity_report, farey_directions,
                               polygon_is_convex, run_sweep, sigma_tilde, wulff_shape_2d)
from geosigma.profile import MM_CONSTANT, sigma0


def test_farey_counts():
    assert len(farey_directions(1)) == 8
    assert len(farey_directions(5)) == 80
    d = farey_directions(3)
    ang = [math.atan2(p[1], p[0]) for p in d]
    ang = [a - 2 * math.pi if a == math.pi else a for a in ang]
    assert ang == sorted(ang)
    assert all(math.gcd(*p) == 1 for p in d)
    assert all((-p[0], -p[1]) in d for p in d)


@pytest.fixture(scope="module")
def sweep_one(one):
    return run_sweep(one, farey_directions(3), delta=1 / 32)


@pytest.fixture(scope="module")
def sweep_smooth(smooth):
    return run_sweep(smooth, farey_directions(2), delta=1 / 32)


def test_sweep_structure(sweep_one):
    assert np.all(np.diff(sweep_one.angles) > 0)
    assert np.all(sweep_one.sigma > 0)
    assert sweep_one.warnings  # Q = 3 leaves gaps wider than 2 degrees


def test_sigma_tilde(sweep_one):
    nu = np.array(sweep_one.estimates[3].nu)
    assert sigma_tilde(2 * nu, sweep_one) == pytest.approx(2 * sweep_one.sigma[3], rel=1e-12)
    assert sigma_tilde([0, 0], sweep_one) == 0.0
    rng = np.random.default_rng(0)
    for w in rng.standard_normal((20, 2)):
        assert sigma_tilde(w, sweep_one) == pytest.approx(MM_CONSTANT * np.linalg.norm(w), rel=1e-9)
        assert sigma_tilde(-w, sweep_one) == pytest.approx(sigma_tilde(w, sweep_one), rel=1e-12)


def test_homogeneity_exact(sweep_smooth):
    sp = sweep_smooth.spline()
    w = np.array([0.3, -1.7])
    for lam in (0.5, 3.0, 10.0):
        assert sigma_tilde(lam * w, sweep_smooth, sp) == pytest.approx(
            lam * sigma_tilde(w, sweep_smooth, sp), rel=4e-16)


def test_subadditivity(sweep_smooth):
    sp = sweep_smooth.spline()
    rng = np.random.default_rng(1)
    worst = -np.inf
    for _ in range(1000):
        w1, w2 = rng.standard_normal((2, 2))
        lhs = sigma_tilde(w1 + w2, sweep_smooth, sp)
        rhs = sigma_tilde(w1, sweep_smooth, sp) + sigma_tilde(w2, sweep_smooth, sp)
        worst = max(worst, lhs - rhs)
    assert worst <= 1e-3


def test_constant_derivatives(sweep_one):
    der = angular_derivatives(sweep_one)
    assert np.max(np.abs(der.d1)) <= der.noise_d1
    assert np.max(np.abs(der.d2)) <= der.noise_d2
    # periodic stencils: sigma' integrates to zero
    assert abs(np.sum(der.d1) * der.eta) < 1e-12


def test_symmetric_medium_critical_point(sweep_smooth):
    der = angular_derivatives(sweep_smooth)
    slope = float(sweep_smooth.spline()(math.pi / 4, 1))
    assert abs(slope) <= der.noise_d1


def test_convexity_constant(sweep_one):
    rep = convexity_report(sweep_one)
    assert rep.sigma0 == pytest.approx(MM_CONSTANT)
    assert rep.min_gap >= -rep.noise_floor
    assert np.max(np.abs(rep.hessian_gap)) <= rep.noise_floor
    _, verdict = b_probe(sweep_one)
    assert "not distinguishable" in verdict


def test_convexity_scaled(four):
    sw = run_sweep(four, farey_directions(2), delta=1 / 32)
    rep = convexity_report(sw)
    assert rep.sigma0 == pytest.approx(sigma0(4.0))
    assert abs(rep.min_gap) <= rep.noise_floor


def test_convexity_smooth_reports(sweep_smooth, tmp_path):
    rep = convexity_report(sweep_smooth)
    assert rep.min_gap >= -rep.noise_floor
    rep.to_csv(tmp_path / "c.csv")
    head = (tmp_path / "c.csv").read_text().splitlines()[0]
    assert head == "theta_deg,sigma,sigma_err,dsigma,d2sigma,hessian_gap,b_probe"
    assert set(rep.summary()) >= {"min_gap", "noise_floor", "verdict", "b_verdict"}


def test_wulff_disk(sweep_one):
    v = wulff_shape_2d(sweep_one)
    r = np.hypot(v[:, 0], v[:, 1])
    assert np.all(np.abs(r / MM_CONSTANT - 1) < 5e-3)
    assert polygon_is_convex(v)


def test_wulff_contains_sigma0_disk(sweep_smooth, smooth):
    v = wulff_shape_2d(sweep_smooth)
    assert polygon_is_convex(v)
    # distance from the origin to each edge
    e = np.roll(v, -1, axis=0) - v
    n = np.column_stack([e[:, 1], -e[:, 0]]) / np.hypot(e[:, 0], e[:, 1])[:, None]
    dist = np.abs(np.sum(n * v, axis=1))
    assert dist.min() >= sigma0(smooth.theta_hat) - 1e-3


def test_wulff_rejects_sparse(one):
    sw = run_sweep(one, [(1, 0), (0, 1), (-1, 0), (0, -1)], delta=1 / 16)
    with pytest.raises(ValueError):
        wulff_shape_2d(sw)


def test_workers_identical(one, tmp_path):
    dirs = farey_directions(1)
    a = run_sweep(one, dirs, delta=1 / 16, workers=1)
    b = run_sweep(one, dirs, delta=1 / 16, workers=3)
    a.to_csv(tmp_path / "a.csv")
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
