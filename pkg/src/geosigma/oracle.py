"""Direct minimisation of the Ginzburg-Landau cell energy and 1D laminate values.

The cell is the rotated square ``{|x.nu| <= T/2, |x.nu_perp| <= T/2}`` on a
grid of spacing ``delta`` with Dirichlet data on all four sides.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import betainc

from .eikonal import ConvergenceError, make_strip_grid, solve_signed_distance
from .medium import CoefficientField, DirectionFrame, direction_frame, eval_a_coords, make_field
from .profile import SQRT2, W, dW, ProfileParams, QTTable, q
from .sigma import tail_height

BC_KINDS = ("mollified_step", "profile_trace")


def mollified_step(r, dim: int = 2):
    """Step sign(x.nu) mollified by the bump (1 - |x|^2)^4 on the unit ball, as a function of r = x.nu.

    The bump's marginal along nu is proportional to (1 - r^2)^(4 + (N-1)/2), whose
    CDF is a regularised incomplete beta function.
    """
    k = 4.0 + 0.5 * (dim - 1)
    r = np.clip(np.asarray(r, dtype=float), -1.0, 1.0)
    return 2.0 * betainc(k + 1.0, k + 1.0, 0.5 * (1.0 + r)) - 1.0


@dataclass
class CellProblem:
    field: CoefficientField
    frame: DirectionFrame
    T: float
    delta: float
    bc_kind: str
    u: np.ndarray  # boundary trace on fixed nodes, initial guess elsewhere
    fixed: np.ndarray
    a: np.ndarray
    s: np.ndarray
    t: np.ndarray
    h: np.ndarray  # geodesic distance on the cell nodes
    node_w: np.ndarray = dc_field(repr=False, default=None)
    ws: np.ndarray = dc_field(repr=False, default=None)
    wt: np.ndarray = dc_field(repr=False, default=None)

    def __post_init__(self):
        n = self.u.shape[0]
        w1 = np.ones(n)
        w1[0] = w1[-1] = 0.5
        self.node_w = np.outer(w1, w1)
        # edges on the boundary lines get half weight
        self.ws = np.broadcast_to(w1[None, :], (n - 1, n)).copy()
        self.wt = np.broadcast_to(w1[:, None], (n, n - 1)).copy()

    @property
    def lateral_measure(self) -> float:
        return self.T ** (self.frame.dim - 1)

    def initial_guesses(self):
        inner = ~self.fixed
        u1 = self.u.copy()
        u1[inner] = q(self.h)[inner]
        u2 = self.u.copy()
        u2[inner] = mollified_step(self.s[:, None] + 0 * self.t[None, :], self.frame.dim)[inner]
        return [("geodesic", u1), ("step", u2)]


def assemble(field: CoefficientField, p_or_nu, T: float = 8.0, delta: float = 1 / 32,
             bc_kind: str = "profile_trace") -> CellProblem:
    if bc_kind not in BC_KINDS:
        raise ValueError(f"bc_kind must be one of {BC_KINDS}")
    frame = direction_frame(p_or_nu, field.lateral_scale)
    n = int(round(T / delta))
    if abs(n * delta - T) > 1e-9:
        raise ValueError("T must be a multiple of delta")
    half = n // 2
    idx = np.arange(-half, n - half + 1)
    s = idx * delta
    t = idx * delta
    lateral = None if frame.is_rational else T
    grid = make_strip_grid(frame, delta, T / 2, lateral, field.lateral_scale)
    df = solve_signed_distance(field, grid)
    rows = df.rows_within(T / 2)
    if grid.periodic:
        hs = df.lateral_interp(t)[rows]
    else:
        hs = df.h[rows]
    S, Tt = np.meshgrid(s, t, indexing="ij")
    X, Y = frame.to_physical(S, Tt)
    a = eval_a_coords(field, X, Y)
    fixed = np.zeros(S.shape, dtype=bool)
    fixed[0, :] = fixed[-1, :] = fixed[:, 0] = fixed[:, -1] = True
    if bc_kind == "profile_trace":
        table = QTTable(ProfileParams.for_medium(T, field.Theta_hat))
        trace = table(hs)
    else:
        trace = mollified_step(S, frame.dim)
    u = np.where(fixed, trace, 0.0)
    return CellProblem(field, frame, T, delta, bc_kind, u, fixed, a, s, t, hs)


# --------------------------------------------------------------------------
# energy
# --------------------------------------------------------------------------

def cell_energy(prob: CellProblem, u: np.ndarray) -> float:
    d2 = prob.delta ** 2
    gs = u[1:] - u[:-1]
    gt = u[:, 1:] - u[:, :-1]
    return float(d2 * np.sum(prob.node_w * prob.a * W(u))
                 + 0.5 * np.sum(prob.ws * gs * gs) + 0.5 * np.sum(prob.wt * gt * gt))


def cell_gradient(prob: CellProblem, u: np.ndarray) -> np.ndarray:
    g = prob.delta ** 2 * prob.node_w * prob.a * dW(u)
    fs = prob.ws * (u[1:] - u[:-1])
    ft = prob.wt * (u[:, 1:] - u[:, :-1])
    g[1:] += fs
    g[:-1] -= fs
    g[:, 1:] += ft
    g[:, :-1] -= ft
    g[prob.fixed] = 0.0
    return g


def _line_poly(prob: CellProblem, u, d):
    """Coefficients (c1, c2, c3, c4) of E(u + alpha d) - E(u) = sum c_k alpha^k."""
    wa = prob.delta ** 2 * prob.node_w * prob.a
    g = 1.0 - u * u
    e = 2.0 * u * d
    f = d * d
    c1 = np.sum(wa * (-2.0 * g * e))
    c2 = np.sum(wa * (e * e - 2.0 * g * f))
    c3 = np.sum(wa * (2.0 * e * f))
    c4 = np.sum(wa * f * f)
    us, ds = u[1:] - u[:-1], d[1:] - d[:-1]
    ut, dt = u[:, 1:] - u[:, :-1], d[:, 1:] - d[:, :-1]
    c1 += np.sum(prob.ws * us * ds) + np.sum(prob.wt * ut * dt)
    c2 += 0.5 * (np.sum(prob.ws * ds * ds) + np.sum(prob.wt * dt * dt))
    return np.array([c1, c2, c3, c4])


def _poly_eval(c, alpha):
    return alpha * (c[0] + alpha * (c[1] + alpha * (c[2] + alpha * c[3])))


def _quartic_min(c) -> float:
    roots = np.roots([4 * c[3], 3 * c[2], 2 * c[1], c[0]])
    cands = [r.real for r in roots if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real)) and r.real > 0]
    if not cands:
        return 0.0
    vals = [_poly_eval(c, x) for x in cands]
    return cands[int(np.argmin(vals))]


@dataclass
class MinimizeResult:
    energy_per_area: float
    energy: float
    iterations: int
    grad_norm: float
    u: np.ndarray
    start: str
    converged: bool
    history: list = dc_field(default_factory=list, repr=False)


def _ncg(prob: CellProblem, u: np.ndarray, max_iter: int, grad_tol: float,
         c_armijo: float = 1e-4, max_halvings: int = 60, record: bool = False):
    u = u.copy()
    E = cell_energy(prob, u)
    g = cell_gradient(prob, u)
    d = -g
    gg = float(np.sum(g * g))
    hist = [E] if record else []
    it = 0
    gnorm = float(np.max(np.abs(g)))
    while it < max_iter and gnorm >= grad_tol:
        it += 1
        slope = float(np.sum(g * d))
        if slope >= 0:
            d = -g
            slope = -gg
        c = _line_poly(prob, u, d)
        alpha = _quartic_min(c)
        if alpha <= 0:
            alpha = 1.0
        dE = _poly_eval(c, alpha)
        halvings = 0
        while dE > c_armijo * alpha * slope:
            halvings += 1
            if halvings > max_halvings:
                raise ConvergenceError(f"line search failed at iteration {it} "
                                       f"(slope {slope:.3e}, energy {E:.12g})",
                                       residual=gnorm, iterations=it)
            alpha *= 0.5
            dE = _poly_eval(c, alpha)
        assert dE <= 0.0, "energy increased along a descent step"
        u += alpha * d
        E += dE
        g_new = cell_gradient(prob, u)
        gg_new = float(np.sum(g_new * g_new))
        beta = max(0.0, float(np.sum(g_new * (g_new - g))) / gg)
        d = -g_new + beta * d
        g, gg = g_new, gg_new
        gnorm = float(np.max(np.abs(g)))
        if record:
            hist.append(E)
        # resync the running energy occasionally to keep drift out of the bookkeeping
        if it % 500 == 0:
            E = cell_energy(prob, u)
    return u, cell_energy(prob, u), it, gnorm, hist


def minimize_cell_energy(prob: CellProblem, max_iter: int = 50000,
                         grad_tol: Optional[float] = None, starts=None,
                         record: bool = False) -> MinimizeResult:
    """Nonlinear CG (Polak-Ribiere+) with exact quartic step and Armijo safeguard; best of the starts."""
    if grad_tol is None:
        grad_tol = 1e-8 * prob.delta ** prob.frame.dim
    best = None
    for name, u0 in prob.initial_guesses():
        if starts is not None and name not in starts:
            continue
        u, E, it, gnorm, hist = _ncg(prob, u0, max_iter, grad_tol, record=record)
        res = MinimizeResult(E / prob.lateral_measure, E, it, gnorm, u, name, gnorm < grad_tol, hist)
        if best is None or res.energy < best.energy:
            best = res
    return best


def cell_equipartition_residual(prob: CellProblem, u: np.ndarray) -> float:
    """Normalised L1 mismatch of |grad u|^2/2 and a W(u) at interior nodes, central differences."""
    dl = prob.delta
    us = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2 * dl)
    ut = (u[1:-1, 2:] - u[1:-1, :-2]) / (2 * dl)
    kin = 0.5 * (us ** 2 + ut ** 2)
    pot = prob.a[1:-1, 1:-1] * W(u[1:-1, 1:-1])
    return float(np.abs(kin - pot).sum() / (kin + pot).sum())


# --------------------------------------------------------------------------
# laminates
# --------------------------------------------------------------------------

def laminate_sigma_1d(a_1d, quad_tol: float = 1e-11, eps_tail: float = 1e-8) -> float:
    """sigma for a = a(s), s = x.nu: 2 int a(s) sech^4(sqrt2 h(s)) ds with h' = sqrt(a)."""
    fld = a_1d if isinstance(a_1d, CoefficientField) else make_field(a_1d, dim=2)

    def a_of(s):
        return float(eval_a_coords(fld, *([np.asarray(s)] + [np.zeros(())] * (fld.dim - 1))))

    S = 2.0 * tail_height(fld.theta_hat, eps_tail)

    def rhs(s, y):
        av = a_of(s)
        return [math.sqrt(av), 2.0 * av / math.cosh(SQRT2 * y[0]) ** 4]

    total = 0.0
    for end in (S, -S):
        sol = solve_ivp(rhs, (0.0, end), [0.0, 0.0], method="DOP853", rtol=quad_tol,
                        atol=quad_tol * 1e-2)
        total += abs(sol.y[1, -1])
    return total
