"""Quick invariant battery behind ``geosigma selftest``."""
from __future__ import annotations

import math

import numpy as np

from .eikonal import check_distance_bounds, make_strip_grid, solve_signed_distance
from .medium import direction_frame, make_field
from .oracle import laminate_sigma_1d
from .profile import (MM_CONSTANT, SQRT2, W, ProfileParams, phi, psi_T, q, q_prime, q_T)
from .sigma import equipartition_residual, metric_slope_c, sigma_estimate

SMOOTH = "1+0.5*sin(2*pi*x1)^2*sin(2*pi*x2)^2"


def _checks():
    one = make_field("1")
    four = make_field("4")
    smooth = make_field(SMOOTH)

    def profile_identity():
        z = np.linspace(-3, 3, 61)
        r = float(np.max(np.abs(q_prime(z) - SQRT2 * np.sqrt(W(q(z))))))
        return r < 1e-12, f"max residual {r:.2e}"

    def phi_constant():
        v = phi(1.0) - phi(-1.0)
        return abs(v - MM_CONSTANT) < 1e-14, f"{v:.12f}"

    def qT_sandwich():
        bad = 0
        for T in (3.0, 5.0, 8.0):
            prm = ProfileParams.for_medium(T, 1.0)
            for z in np.linspace(0.05, 3, 20):
                v = q_T(z, prm)
                bad += not (q(z) - 1e-10 <= v <= q(SQRT2 * z) + 1e-10)
        return bad == 0, f"{bad} violations"

    def psi_roundtrip():
        prm = ProfileParams.for_medium(5.0, 1.0)
        e = max(abs(psi_T(q_T(z, prm), prm) - z) for z in (-2, -0.5, 0.5, 2))
        return e < 1e-9, f"max error {e:.2e}"

    def calibration():
        vals = [sigma_estimate(one, p).sigma_value for p in [(1, 0), (1, 1), (1, 2)]]
        e = max(abs(v / MM_CONSTANT - 1) for v in vals)
        return e < 0.01, f"max rel error {e:.2e}"

    def scaling():
        v = sigma_estimate(four, (1, 2)).sigma_value
        e = abs(v / (2 * MM_CONSTANT) - 1)
        return e < 0.01, f"rel error {e:.2e}"

    def laminate():
        f = make_field("1+0.5*sin(2*pi*x1)^2")
        a, b = sigma_estimate(f, (1, 0)).sigma_value, laminate_sigma_1d(f)
        return abs(a / b - 1) < 0.01, f"2D {a:.6f} vs 1D {b:.6f}"

    def bounds():
        g = make_strip_grid(direction_frame((1, 2)), 1 / 64, 4.0)
        df = solve_signed_distance(smooth, g)
        rep = check_distance_bounds(df, smooth.theta_hat, smooth.Theta_hat)
        return rep.n_violations == 0, f"worst {rep.worst_violation:.3f} delta"

    def equipartition():
        g = make_strip_grid(direction_frame((1, 0)), 1 / 64, 4.0)
        r = equipartition_residual(smooth, solve_signed_distance(smooth, g))
        return r <= 2e-2, f"residual {r:.2e}"

    def evenness():
        a = sigma_estimate(smooth, (1, 2))
        b = sigma_estimate(smooth, (-1, -2))
        d = abs(a.sigma_value - b.sigma_value)
        return d <= a.error_budget + b.error_budget, f"|diff| {d:.2e}"

    def slope():
        ms = metric_slope_c(smooth, (1, 0))
        lo, hi = math.sqrt(smooth.theta_hat), math.sqrt(smooth.Theta_hat)
        ok = all(lo - 0.02 <= c <= hi + 0.02 for c in ms.c) and ms.spread <= 0.03
        return ok, "c_m = " + ", ".join(f"{c:.4f}" for c in ms.c)

    return [("q' = sqrt2 sqrt(W(q))", profile_identity), ("phi(1) - phi(-1)", phi_constant),
            ("q_T sandwich", qT_sandwich), ("psi_T(q_T(z)) = z", psi_roundtrip),
            ("a=1 calibration", calibration), ("a=4 scaling", scaling),
            ("laminate 1D vs 2D", laminate), ("distance bounds", bounds),
            ("equipartition", equipartition), ("evenness", evenness), ("metric slope", slope)]


def run_battery() -> int:
    rows = []
    for name, fn in _checks():
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure, reported in the table
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((name, ok, detail))
    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    n_fail = sum(not r[1] for r in rows)
    print(f"{len(rows) - n_fail}/{len(rows)} passed")
    return 0 if n_fail == 0 else 1


def profile_tables() -> int:
    print("T     kappa  delta_T       max|q_T'-ODE|  max sandwich viol  max qTq slack")
    ok = True
    for T in (3.0, 5.0, 8.0):
        prm = ProfileParams.for_medium(T, 1.0)
        zs = np.linspace(-3, 3, 61)
        h = 1e-5
        ode = max(abs((q_T(z + h, prm) - q_T(z - h, prm)) / (2 * h)
                      - SQRT2 * math.sqrt(W(q_T(z, prm)) + prm.delta_T)) for z in zs)
        sand = 0.0
        slack = -math.inf
        for z in zs:
            v = q_T(z, prm)
            lo, hi = sorted((float(q(z)), float(q(SQRT2 * z))))
            sand = max(sand, lo - v, v - hi)
            slack = max(slack, abs(v - q(z)) - math.sqrt(prm.delta_T) * math.expm1(2 * SQRT2 * abs(z)))
        print(f"{T:<5} {prm.kappa:<6} {prm.delta_T:<13.3e} {ode:<14.2e} {sand:<18.2e} {slack:.2e}")
        ok &= ode < 1e-8 and sand <= 1e-10 and slack <= 1e-10
    return 0 if ok else 1
