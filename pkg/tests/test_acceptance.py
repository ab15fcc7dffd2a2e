"""Acceptance criteria 1-13; each test prints one PASS/FAIL line."""
import math

import numpy as np
import pytest

from geosigma.analyzer import convexity_report, farey_directions, run_sweep
from geosigma.eikonal import (check_distance_bounds, dijkstra_distance_oracle, make_strip_grid,
                              solve_signed_distance)
from geosigma.medium import direction_frame, make_field
from geosigma.oracle import assemble, laminate_sigma_1d, minimize_cell_energy
from geosigma.profile import MM_CONSTANT, SQRT2, ProfileParams, q, q_T, sigma0
from geosigma.sigma import equipartition_residual, metric_slope_c, sigma_estimate, tail_height

from conftest import LAMINATE, SMOOTH, record

pytestmark = pytest.mark.acceptance

CAL_DIRS = [(1, 0), (0, 1), (1, 1), (1, 2)]
ORACLE_DIRS = [(1, 0), (1, 1), (1, 2)]
MEDIA = {"a=1": "1", "a=4": "4", "laminate": LAMINATE, "smooth": SMOOTH}


@pytest.fixture(scope="module")
def media():
    return {k: make_field(v) for k, v in MEDIA.items()}


@pytest.fixture(scope="module")
def sweeps(media):
    dirs = farey_directions(5)
    return {k: run_sweep(f, dirs, delta=1 / 64, eps_tail=1e-8) for k, f in media.items()}


def test_c01_calibration(media):
    vals = [sigma_estimate(media["a=1"], p, delta=1 / 64, eps_tail=1e-8).sigma_value for p in CAL_DIRS]
    err = max(abs(v / MM_CONSTANT - 1) for v in vals)
    assert record(1, err <= 0.01, f"a=1 sigma vs 4sqrt2/3, max rel err {err:.2e} (tol 1e-2)")


def test_c02_constant_scaling(media):
    target = 8 * SQRT2 / 3
    vals = [sigma_estimate(media["a=4"], p).sigma_value for p in CAL_DIRS]
    err = max(abs(v / target - 1) for v in vals)
    tight = abs(sigma0(media["a=4"].theta_hat) - target)
    ok = err <= 0.01 and tight <= 1e-12
    assert record(2, ok, f"a=4 sigma vs 8sqrt2/3, max rel err {err:.2e} (tol 1e-2); "
                         f"|sigma0(4) - 8sqrt2/3| = {tight:.1e}")


def test_c03_laminate(media):
    f = media["laminate"]
    a = sigma_estimate(f, (1, 0)).sigma_value
    b = laminate_sigma_1d(f)
    err = abs(a / b - 1)
    assert record(3, err <= 0.01, f"2D {a:.6f} vs 1D {b:.6f}, rel err {err:.2e} (tol 1e-2)")


def test_c04_variational(media):
    f = media["smooth"]
    worst_geo, worst_bc, parts = 0.0, 0.0, []
    for p in ORACLE_DIRS:
        geo = sigma_estimate(f, p).sigma_value
        e = {}
        for bc in ("profile_trace", "mollified_step"):
            res = minimize_cell_energy(assemble(f, p, T=8.0, delta=1 / 32, bc_kind=bc))
            assert res.converged
            e[bc] = res.energy_per_area
            worst_geo = max(worst_geo, abs(geo - e[bc]) / e[bc])
        bc_gap = abs(e["profile_trace"] - e["mollified_step"]) / e["profile_trace"]
        worst_bc = max(worst_bc, bc_gap)
        parts.append(f"{p}: geo {geo:.4f} prof {e['profile_trace']:.4f} step {e['mollified_step']:.4f}")
    ok = worst_geo <= 0.03 and worst_bc <= 0.02
    assert record(4, ok, f"max |geo-oracle|/oracle {worst_geo:.2e} (tol 3e-2), "
                         f"max BC gap {worst_bc:.2e} (tol 2e-2); " + "; ".join(parts))


def test_c05_distance_bounds(media):
    total, nodes = 0, 0
    for f in media.values():
        H = 4 * tail_height(f.theta_hat)
        for p in CAL_DIRS:
            df = solve_signed_distance(f, make_strip_grid(direction_frame(p), 1 / 64, H))
            rep = check_distance_bounds(df, f.theta_hat, f.Theta_hat)
            total += rep.n_violations
            nodes += rep.n_nodes
    assert record(5, total == 0, f"{total} violating nodes of {nodes} (slack 2 sqrt(Theta) delta)")


def test_c06_dijkstra(media):
    f = media["smooth"]
    grid = make_strip_grid(direction_frame((1, 0)), 1 / 64, 255 / 64, lateral_periods=4)
    assert (grid.M + 1, grid.L) == (256, 256)
    sw = solve_signed_distance(f, grid)
    dj = dijkstra_distance_oracle(f, grid, 16)
    sel = grid.s >= 10 * grid.delta
    rel = float(np.max(np.abs(dj.h[sel] - sw.h[sel]) / np.abs(sw.h[sel])))
    assert record(6, rel <= 0.03, f"max rel diff at x.nu >= 10 delta: {rel:.2e} (tol 3e-2)")


def test_c07_equipartition(media):
    f = media["smooth"]
    worst, ratios = 0.0, []
    for p in [(1, 0), (1, 2)]:
        r = [equipartition_residual(f, solve_signed_distance(
            f, make_strip_grid(direction_frame(p), d, 4.0))) for d in (1 / 64, 1 / 128)]
        worst = max(worst, r[0])
        ratios.append(r[0] / r[1])
    ok = worst <= 2e-2 and all(1.4 <= x <= 2.6 for x in ratios)
    assert record(7, ok, f"residual at 1/64 {worst:.2e} (tol 2e-2); refinement ratios "
                         + ", ".join(f"{x:.2f}" for x in ratios) + " (range [1.4, 2.6])")


def test_c08_evenness(sweeps):
    worst, count = -np.inf, 0
    for sw in sweeps.values():
        n = len(sw.estimates)
        for i in range(n):
            j = (i + n // 2) % n
            assert np.allclose(sw.estimates[i].nu, -np.array(sw.estimates[j].nu))
            d = abs(sw.sigma[i] - sw.sigma[j]) - (sw.errors[i] + sw.errors[j])
            worst = max(worst, d)
            count += 1
    assert record(8, worst <= 0, f"{count} pairs, max(|s(nu)-s(-nu)| - budget) = {worst:.2e} (need <= 0)")


def test_c09_lower_bound(sweeps, media):
    worst = np.inf
    for k, sw in sweeps.items():
        s0 = sigma0(media[k].theta_hat)
        worst = min(worst, float(np.min(sw.sigma / s0 - 1)))
    assert record(9, worst >= -0.01, f"min sigma/sigma0 - 1 over all sweeps {worst:.2e} (tol -1e-2)")


def test_c10_metric_slope(media):
    f = media["smooth"]
    lo, hi = math.sqrt(f.theta_hat) - 0.02, math.sqrt(f.Theta_hat) + 0.02
    ok, parts = True, []
    for p in [(1, 0), (1, 2)]:
        ms = metric_slope_c(f, p, (1, 2, 4, 8))
        rel = abs(ms.c[-1] - ms.c[-2]) / ms.c[-1]
        ok &= all(lo <= c <= hi for c in ms.c) and rel <= 0.03
        parts.append(f"{p}: c_m " + ", ".join(f"{c:.4f}" for c in ms.c) + f", last-two {rel:.2e}")
    assert record(10, ok, f"range [{lo:.4f}, {hi:.4f}], spread tol 3e-2; " + "; ".join(parts))


def test_c11_convexity(sweeps):
    rep = convexity_report(sweeps["smooth"])
    rep1 = convexity_report(sweeps["a=1"])
    ok = rep.min_gap >= -rep.noise_floor and abs(rep1.min_gap) <= rep1.noise_floor
    assert record(11, ok, f"smooth min gap {rep.min_gap:.3e} at {math.degrees(rep.min_gap_theta):.1f} deg, "
                          f"noise floor {rep.noise_floor:.3e}; a=1 min gap {rep1.min_gap:.2e}, "
                          f"noise floor {rep1.noise_floor:.2e}")


def test_c12_qT_estimates(media):
    slack = 1e-10
    worst_sand, worst_qtq = -np.inf, -np.inf
    zs = np.linspace(-3, 3, 601)
    for f in (media["a=1"], media["smooth"]):
        for T in (3.0, 5.0, 8.0):
            prm = ProfileParams.for_medium(T, f.Theta_hat)
            root = math.sqrt(prm.delta_T)
            for z in zs:
                v = q_T(z, prm)
                lo, hi = (q(z), q(SQRT2 * z)) if z >= 0 else (q(SQRT2 * z), q(z))
                worst_sand = max(worst_sand, lo - v, v - hi)
                worst_qtq = max(worst_qtq, abs(v - q(z)) - root * math.expm1(2 * SQRT2 * abs(z)))
    ok = worst_sand <= slack and worst_qtq <= slack
    assert record(12, ok, f"sandwich max violation {worst_sand:.1e}, qTq max excess {worst_qtq:.1e} "
                          f"(slack {slack:.0e})")


def test_c13_determinism(media, tmp_path):
    dirs = farey_directions(2)
    paths = []
    for w in (1, 8):
        sw = run_sweep(media["smooth"], dirs, delta=1 / 32, workers=w)
        path = tmp_path / f"sweep_{w}.csv"
        sw.to_csv(path)
        paths.append(path.read_bytes())
    same = paths[0] == paths[1]
    assert record(13, same, f"sweep CSV byte-identical for 1 vs 8 workers: {same}")
