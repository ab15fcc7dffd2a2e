"""Direction sweeps of sigma and the structural checks built on them (2D)."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import ConvexHull

from .medium import CoefficientField
from .profile import sigma0
from .sigma import DEFAULT_T_MULTIPLIERS, SigmaEstimate, sigma_estimate

MAX_GAP_DEG = 2.0
INCONCLUSIVE_EPS = 1e-2
# sums of |stencil coefficients| of the 5-point formulas, before the 1/(12 eta^k) factor
_D1_WEIGHT = 18.0
_D2_WEIGHT = 64.0


def farey_directions(Q: int):
    """Primitive integer vectors with max(|p1|, |p2|) <= Q, ordered by angle in [-pi, pi)."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    out = []
    for p1 in range(-Q, Q + 1):
        for p2 in range(-Q, Q + 1):
            if (p1 or p2) and math.gcd(p1, p2) == 1:
                out.append((p1, p2))
    return sorted(out, key=lambda p: math.atan2(p[1], p[0]) if (p[0], p[1]) != (-1, 0) else -math.pi)


@dataclass
class DirectionSweep:
    angles: np.ndarray
    estimates: list
    theta_hat: float
    Theta_hat: float
    warnings: list = field(default_factory=list)

    @property
    def sigma(self) -> np.ndarray:
        return np.array([e.sigma_value for e in self.estimates])

    @property
    def errors(self) -> np.ndarray:
        return np.array([e.error_budget for e in self.estimates])

    def max_gap_deg(self) -> float:
        a = np.sort(self.angles)
        gaps = np.diff(np.append(a, a[0] + 2 * math.pi))
        return float(np.degrees(gaps.max()))

    def relative_error(self) -> float:
        return float(np.max(self.errors / self.sigma))

    def spline(self) -> CubicSpline:
        a = np.asarray(self.angles)
        s = self.sigma
        return CubicSpline(np.append(a, a[0] + 2 * math.pi), np.append(s, s[0]),
                           bc_type="periodic")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["nu_x", "nu_y", "sigma", "error_budget", "tail_bound", "delta", "H"])
            for e in self.estimates:
                wr.writerow([repr(e.nu[0]), repr(e.nu[1]), repr(e.sigma_value),
                             repr(e.error_budget), repr(e.tail_bound), repr(e.delta), repr(e.H)])

    def to_json(self, path) -> None:
        rows = []
        for e in self.estimates:
            d = asdict(e)
            d["raw"] = {repr(k): v for k, v in e.raw.items()}
            rows.append(d)
        with open(path, "w") as fh:
            json.dump({"theta_hat": self.theta_hat, "Theta_hat": self.Theta_hat,
                       "warnings": self.warnings, "directions": rows}, fh, indent=1, sort_keys=True)


def _job(args):
    fld, p, kw = args
    return sigma_estimate(fld, p, **kw)


def run_sweep(field_: CoefficientField, directions: Sequence, delta: float = 1 / 64,
              eps_tail: float = 1e-8, T_multipliers=DEFAULT_T_MULTIPLIERS,
              workers: int = 1, profile: str = "exact") -> DirectionSweep:
    """sigma_estimate over the directions; results merged by direction index."""
    kw = dict(delta=delta, eps_tail=eps_tail, T_multipliers=tuple(T_multipliers), profile=profile)
    jobs = [(field_, p, kw) for p in directions]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    angles = np.array([r.angle() for r in results])
    order = np.argsort(angles, kind="stable")
    angles = angles[order]
    if np.any(np.diff(angles) <= 0):
        raise ValueError("sweep directions must have distinct angles")
    sw = DirectionSweep(angles, [results[i] for i in order], field_.theta_hat, field_.Theta_hat)
    if sw.max_gap_deg() > MAX_GAP_DEG:
        sw.warnings.append(f"max angular gap {sw.max_gap_deg():.2f} deg exceeds {MAX_GAP_DEG} deg; "
                           "interpolated quantities carry extra error")
    return sw


def sigma_tilde(w, sweep: DirectionSweep, spline: Optional[CubicSpline] = None) -> float:
    """One-homogeneous extension |w| sigma(w/|w|), with sigma interpolated in angle."""
    w = np.asarray(w, dtype=float)
    r = math.hypot(w[0], w[1])
    if r == 0.0:
        return 0.0
    sp = spline or sweep.spline()
    return r * float(sp(_wrap(sweep, math.atan2(w[1], w[0]))))


def _wrap(sweep: DirectionSweep, ang):
    lo = sweep.angles[0]
    return lo + np.mod(np.asarray(ang) - lo, 2 * math.pi)


@dataclass
class AngularDerivatives:
    theta: np.ndarray
    sigma: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    eta: float
    eps_abs: float
    noise_d1: float
    noise_d2: float
    inconclusive: bool


def angular_derivatives(sweep: DirectionSweep, eta: Optional[float] = None) -> AngularDerivatives:
    """5-point central differences of the interpolated sigma on a uniform angular grid."""
    eps_rel = sweep.relative_error()
    if eta is None:
        eta = max(math.radians(2.0), eps_rel ** (1.0 / 3.0))
    n = max(8, int(round(2 * math.pi / eta)))
    eta = 2 * math.pi / n
    theta = sweep.angles[0] + eta * np.arange(n)
    f = sweep.spline()(theta)
    fp1, fm1 = np.roll(f, -1), np.roll(f, 1)
    fp2, fm2 = np.roll(f, -2), np.roll(f, 2)
    d1 = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * eta)
    d2 = (-fp2 + 16 * fp1 - 30 * f + 16 * fm1 - fm2) / (12 * eta ** 2)
    eps_abs = float(np.max(sweep.errors))
    return AngularDerivatives(theta, f, d1, d2, eta, eps_abs,
                              3 * eps_abs * _D1_WEIGHT / (12 * eta),
                              3 * eps_abs * _D2_WEIGHT / (12 * eta ** 2),
                              eps_rel > INCONCLUSIVE_EPS)


@dataclass
class ConvexityReport:
    theta: np.ndarray
    sigma: np.ndarray
    sigma_err: float
    dsigma: np.ndarray
    d2sigma: np.ndarray
    hessian_gap: np.ndarray
    b_probe: np.ndarray
    sigma0: float
    min_gap: float
    min_gap_theta: float
    noise_floor: float
    b_noise_floor: float
    verdict: str
    b_verdict: str

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["theta_deg", "sigma", "sigma_err", "dsigma", "d2sigma", "hessian_gap", "b_probe"])
            for k in range(len(self.theta)):
                wr.writerow([f"{math.degrees(self.theta[k]):.10f}", repr(float(self.sigma[k])),
                             repr(self.sigma_err), repr(float(self.dsigma[k])),
                             repr(float(self.d2sigma[k])), repr(float(self.hessian_gap[k])),
                             repr(float(self.b_probe[k]))])

    def summary(self) -> dict:
        return {"sigma0": self.sigma0, "min_gap": self.min_gap,
                "min_gap_theta_deg": math.degrees(self.min_gap_theta),
                "noise_floor": self.noise_floor, "max_abs_dsigma": float(np.max(np.abs(self.b_probe))),
                "b_noise_floor": self.b_noise_floor, "verdict": self.verdict,
                "b_verdict": self.b_verdict}


def b_probe(sweep: DirectionSweep, deriv: Optional[AngularDerivatives] = None):
    """Tangential component sigma' of grad sigma_tilde on the unit circle, with a verdict."""
    deriv = deriv or angular_derivatives(sweep)
    m = float(np.max(np.abs(deriv.d1)))
    if deriv.inconclusive:
        verdict = "inconclusive: sigma error budget too large"
    elif m <= deriv.noise_d1:
        verdict = "max|sigma'| not distinguishable from 0 (consistent with a radial gradient)"
    else:
        verdict = (f"max|sigma'| = {m:.3e} exceeds noise floor {deriv.noise_d1:.3e}: "
                   "tangential gradient present, sigma is not constant")
    return deriv.d1, verdict


def convexity_report(sweep: DirectionSweep, theta_hat: Optional[float] = None,
                     eta: Optional[float] = None) -> ConvexityReport:
    th = sweep.theta_hat if theta_hat is None else theta_hat
    der = angular_derivatives(sweep, eta)
    s0 = sigma0(th)
    gap = der.sigma + der.d2 - s0
    k = int(np.argmin(gap))
    floor = der.noise_d2 + der.eps_abs
    if der.inconclusive:
        verdict = "inconclusive: sigma error budget too large for second derivatives"
    elif gap[k] >= -floor:
        verdict = "no certified violation of sigma + sigma'' >= sigma0"
    else:
        verdict = "certified violation of sigma + sigma'' >= sigma0"
    bp, bv = b_probe(sweep, der)
    return ConvexityReport(der.theta, der.sigma, der.eps_abs, der.d1, der.d2, gap, bp, s0,
                           float(gap[k]), float(der.theta[k]), floor, der.noise_d1, verdict, bv)


def wulff_shape_2d(sweep: DirectionSweep, n_halfplanes: int = 360) -> np.ndarray:
    """Vertices (counter-clockwise) of the intersection of {x.nu <= sigma(nu)}.

    Half-plane normals are ``n_halfplanes`` uniform angles with sigma from the
    interpolant. The polygon is obtained from the convex hull of the dual
    points nu / sigma: each hull edge is one Wulff vertex.
    """
    if len(sweep.estimates) < 8 or n_halfplanes < 8:
        raise ValueError("need at least 8 directions for a Wulff shape")
    th = sweep.angles[0] + 2 * math.pi * np.arange(n_halfplanes) / n_halfplanes
    sig = sweep.spline()(th)
    nus = np.column_stack([np.cos(th), np.sin(th)])
    dual = nus / sig[:, None]
    hull = ConvexHull(dual)
    idx = list(hull.vertices)  # counter-clockwise in 2D
    verts = []
    for i, j in zip(idx, idx[1:] + idx[:1]):
        A = np.vstack([nus[i], nus[j]])
        verts.append(np.linalg.solve(A, [sig[i], sig[j]]))
    return np.array(verts)


def polygon_is_convex(verts: np.ndarray) -> bool:
    v = np.asarray(verts)
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    return bool(np.all(cross > 0))


def write_polygon_csv(verts: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x1", "x2"])
        for x, y in verts:
            wr.writerow([repr(float(x)), repr(float(y))])
