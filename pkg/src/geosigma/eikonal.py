"""Signed geodesic distance to the plane {x . nu = 0} in the metric sqrt(a).

Grids live in the rotated frame of the direction: node (i, j) sits at
``x = s_i nu + t_j nu_perp`` with ``s_i = i * delta`` for ``i = -M .. M``.
For rational directions the lateral coordinate spans one lateral period
and wraps; otherwise it spans a user-chosen window with one-sided
closure at the walls.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from . import kernels
from ._sweep_py import _godunov
from .medium import CoefficientField, DirectionFrame, eval_a_coords

MAX_ORACLE_NODES = 512 * 512


class GridError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class StripGrid:
    frame: DirectionFrame
    delta: float
    M: int  # rows per half; total rows 2M + 1
    L: int  # lateral nodes
    lateral_extent: float
    periodic: bool

    @property
    def H(self) -> float:
        return self.M * self.delta

    @property
    def dt(self) -> float:
        if self.periodic:
            return self.lateral_extent / self.L
        return self.lateral_extent / (self.L - 1)

    @property
    def s(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1) * self.delta

    @property
    def t(self) -> np.ndarray:
        if self.periodic:
            return np.arange(self.L) * self.dt
        return np.arange(self.L) * self.dt - 0.5 * self.lateral_extent

    @property
    def shape(self):
        return (2 * self.M + 1, self.L)

    def physical(self):
        S, Tt = np.meshgrid(self.s, self.t, indexing="ij")
        return self.frame.to_physical(S, Tt)

    def lateral_weights(self) -> np.ndarray:
        """Quadrature weights along t (trapezoid for windows), summing to the extent."""
        w = np.full(self.L, self.dt)
        if not self.periodic:
            w[0] = w[-1] = 0.5 * self.dt
        return w


def make_strip_grid(frame: DirectionFrame, delta: float, H: float,
                    lateral_extent: Optional[float] = None, period: float = 1.0,
                    lateral_periods: int = 1) -> StripGrid:
    """Strip of half-height >= H with a grid line on the plane.

    Rational directions wrap over ``lateral_periods`` lateral periods unless an
    explicit window is given.
    """
    if frame.dim != 2:
        raise GridError("strip solves are implemented for N = 2")
    if delta > period / 8 + 1e-15:
        raise GridError(f"delta={delta} is too coarse for period {period} (need <= period/8)")
    M = int(math.ceil(H / delta - 1e-9))
    if frame.lateral_period is not None and lateral_extent is None:
        extent = frame.lateral_period * lateral_periods
        L = max(8, int(round(extent / delta)))
        return StripGrid(frame, delta, M, L, extent, True)
    if lateral_extent is None:
        raise GridError("irrational directions need an explicit lateral window")
    L = max(8, int(round(lateral_extent / delta)) + 1)
    return StripGrid(frame, delta, M, L, float(lateral_extent), False)


@dataclass
class DistanceField:
    grid: StripGrid
    h: np.ndarray
    a: np.ndarray
    residual: float
    iterations: int = 0
    backend: str = ""
    notes: list = field(default_factory=list)

    @property
    def s(self) -> np.ndarray:
        return self.grid.s

    def xdotnu(self) -> np.ndarray:
        return np.broadcast_to(self.grid.s[:, None], self.h.shape)

    def rows_within(self, half_height: float) -> slice:
        M = self.grid.M
        k = min(M, int(math.floor(half_height / self.grid.delta + 1e-9)))
        return slice(M - k, M + k + 1)

    def lateral_interp(self, t: np.ndarray) -> np.ndarray:
        """Linear interpolation of every row at lateral positions ``t`` (periodic grids)."""
        g = self.grid
        if not g.periodic:
            return np.stack([np.interp(t, g.t, row) for row in self.h])
        u = np.mod(t, g.lateral_extent) / g.dt
        j0 = np.floor(u).astype(int) % g.L
        w = u - np.floor(u)
        j1 = (j0 + 1) % g.L
        return self.h[:, j0] * (1 - w) + self.h[:, j1] * w

    def to_csv(self, path) -> None:
        X, Y = self.grid.physical()
        rows = np.arange(-self.grid.M, self.grid.M + 1)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["i", "j", "x1", "x2", "h"])
            for r, i in enumerate(rows):
                for j in range(self.grid.L):
                    wr.writerow([i, j, f"{X[r, j]:.12g}", f"{Y[r, j]:.12g}", f"{self.h[r, j]:.15g}"])


def _speed(field: CoefficientField, grid: StripGrid) -> np.ndarray:
    X, Y = grid.physical()
    return eval_a_coords(field, X, Y)


def godunov_residual(d: np.ndarray, speed: np.ndarray, ds: float, dt: float,
                     periodic: bool) -> float:
    """Max |G(d) - d| over non-plane nodes of one half, G the Godunov local solve."""
    big = 1e30
    up = np.vstack([d[1:], np.full((1, d.shape[1]), big)])
    a = np.minimum(np.vstack([np.full((1, d.shape[1]), big), d[:-1]]), up)
    if periodic:
        b = np.minimum(np.roll(d, 1, axis=1), np.roll(d, -1, axis=1))
    else:
        left = np.hstack([np.full((d.shape[0], 1), big), d[:, :-1]])
        right = np.hstack([d[:, 1:], np.full((d.shape[0], 1), big)])
        b = np.minimum(left, right)
    u = _godunov(a, b, speed, ds, dt, 1 / ds ** 2, 1 / dt ** 2)
    return float(np.max(np.abs(u[1:] - d[1:])))


def solve_signed_distance(field: CoefficientField, grid: StripGrid, tol: Optional[float] = None,
                          max_iter: int = 1000, backend=None) -> DistanceField:
    """Godunov fast sweeping for |grad h| = sqrt(a), h = 0 on the plane, odd across it."""
    sweep = backend or kernels.sweep_half
    a = _speed(field, grid)
    speed = np.sqrt(a)
    if tol is None:
        tol = 1e-10 * math.sqrt(field.Theta_hat) * grid.delta
    M = grid.M
    halves = []
    iters = 0
    resid = 0.0
    for rows in (speed[M:], speed[M::-1]):
        rows = np.ascontiguousarray(rows)
        d, it, change = sweep(rows, grid.delta, grid.dt, grid.periodic, tol, max_iter)
        if change >= tol:
            raise ConvergenceError(f"fast sweeping did not converge after {it} iterations "
                                   f"(last change {change:.3e})", residual=change, iterations=it)
        resid = max(resid, godunov_residual(d, rows, grid.delta, grid.dt, grid.periodic))
        halves.append(d)
        iters = max(iters, it)
    pos, neg = halves
    h = np.vstack([-neg[:0:-1], pos])
    name = "python" if sweep is kernels.sweep_half_python else kernels.BACKEND
    df = DistanceField(grid, h, a, resid, iters, name)
    if not grid.periodic:
        df.notes.append("lateral window with one-sided walls (approximation)")
    return df


# --------------------------------------------------------------------------
# graph oracle
# --------------------------------------------------------------------------

_OFFSETS_8 = [(0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)]
_OFFSETS_16 = _OFFSETS_8 + [(1, 2), (1, -2), (-1, 2), (-1, -2),
                            (2, 1), (2, -1), (-2, 1), (-2, -1)]


def _graph_half(field, grid, sign, offsets):
    M1, L = grid.M + 1, grid.L
    ii, jj = np.meshgrid(np.arange(M1), np.arange(L), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    src, dst, wts = [], [], []
    for di, dj in offsets:
        i2 = ii + di
        j2 = jj + dj
        ok = (i2 >= 0) & (i2 < M1)
        if grid.periodic:
            j2w = j2 % L
        else:
            ok &= (j2 >= 0) & (j2 < L)
            j2w = j2
        s_mid = sign * (ii[ok] + 0.5 * di) * grid.delta
        t0 = grid.t[0]
        t_mid = t0 + (jj[ok] + 0.5 * dj) * grid.dt
        X, Y = grid.frame.to_physical(s_mid, t_mid)
        length = math.hypot(di * grid.delta, dj * grid.dt)
        src.append(ii[ok] * L + jj[ok])
        dst.append(i2[ok] * L + j2w[ok])
        wts.append(length * np.sqrt(eval_a_coords(field, X, Y)))
    n = M1 * L
    G = sparse.csr_matrix((np.concatenate(wts), (np.concatenate(src), np.concatenate(dst))),
                          shape=(n, n))
    dist = dijkstra(G, directed=True, indices=np.arange(L), min_only=True)
    return dist.reshape(M1, L)


def dijkstra_distance_oracle(field: CoefficientField, grid: StripGrid,
                             neighborhood: int = 16) -> DistanceField:
    """Shortest paths on the lattice graph from the plane nodes (metrication biased upward)."""
    if neighborhood not in (8, 16):
        raise ValueError("neighborhood must be 8 or 16")
    if (grid.M + 1) * grid.L > MAX_ORACLE_NODES:
        raise GridError("grid too large for the graph oracle (limit 512^2 nodes per half)")
    offsets = _OFFSETS_16 if neighborhood == 16 else _OFFSETS_8
    pos = _graph_half(field, grid, 1.0, offsets)
    neg = _graph_half(field, grid, -1.0, offsets)
    h = np.vstack([-neg[:0:-1], pos])
    return DistanceField(grid, h, _speed(field, grid), 0.0, 0, f"dijkstra{neighborhood}")


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------

@dataclass
class BoundsReport:
    worst_violation: float  # max violation of the exact bounds, in units of delta
    n_violations: int  # nodes violating the bounds widened by the slack
    slack: float
    n_nodes: int


def check_distance_bounds(df: DistanceField, theta: float, Theta: float,
                          slack: Optional[float] = None) -> BoundsReport:
    """Scan sqrt(theta) |x.nu| <= |h| <= sqrt(Theta) |x.nu| with matching signs."""
    s = df.xdotnu()
    rt, rT = math.sqrt(theta), math.sqrt(Theta)
    lower = np.where(s >= 0, rt * s, rT * s)
    upper = np.where(s >= 0, rT * s, rt * s)
    viol = np.maximum(lower - df.h, df.h - upper)
    if slack is None:
        slack = 2.0 * rT * df.grid.delta
    worst = max(0.0, float(viol.max())) / df.grid.delta
    return BoundsReport(worst, int(np.count_nonzero(viol > slack)), slack, viol.size)


def rescaled_field(df: DistanceField, m: int) -> DistanceField:
    """k_m(z) = h(m z) / m sampled on the unit-height strip."""
    g = df.grid
    if g.H < m - 1e-9:
        raise GridError(f"field height {g.H} is insufficient for m={m}")
    sl = df.rows_within(m)
    k = (sl.stop - sl.start - 1) // 2
    sub = StripGrid(g.frame, g.delta / m, k, g.L, g.lateral_extent / m, g.periodic)
    return DistanceField(sub, df.h[sl] / m, df.a[sl], df.residual, df.iterations, df.backend)
