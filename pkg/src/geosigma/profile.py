"""One-dimensional transition profiles for the double well W(u) = (1 - u^2)^2.

``q`` is the heteroclinic ``tanh(sqrt(2) z)``; ``q_T`` is its perturbation
with the well lifted by ``delta_T``, written as ``tanh(F_T^{-1}(z))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

SQRT2 = math.sqrt(2.0)
#: sqrt(2) * int_{-1}^{1} sqrt(W) = 4 sqrt(2) / 3, the a == 1 surface tension
MM_CONSTANT = 4.0 * SQRT2 / 3.0


def W(u):
    return (1.0 - u * u) ** 2


def dW(u):
    return -4.0 * u * (1.0 - u * u)


def sech(x):
    return 1.0 / np.cosh(x)


def q(z):
    return np.tanh(SQRT2 * z)


def q_prime(z):
    return SQRT2 / np.cosh(SQRT2 * z) ** 2


def phi(z):
    """phi(z) = int_0^z sqrt(2) sqrt(W) for |z| <= 1, i.e. sqrt(2)(z - z^3/3)."""
    return SQRT2 * (z - z ** 3 / 3.0)


def sigma0(theta: float) -> float:
    """Lower bound sqrt(2 theta) * int_{-1}^1 sqrt(W) = (4/3) sqrt(2 theta)."""
    return 4.0 / 3.0 * math.sqrt(2.0 * theta)


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

def adaptive_simpson(f, a: float, b: float, tol: float = 1e-12, max_depth: int = 60) -> float:
    """Adaptive Simpson with Richardson correction; absolute tolerance ``tol``."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # explicit stack keeps deep refinement off the Python recursion limit
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, max_depth)]
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth - 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth - 1))
    return total


# --------------------------------------------------------------------------
# q_T machinery
# --------------------------------------------------------------------------

def default_kappa(Theta: float) -> int:
    return max(4, math.ceil(5.0 * math.sqrt(2.0 * Theta)))


@dataclass(frozen=True)
class ProfileParams:
    T: float
    kappa: int = 8
    zeta_max: float = 20.0
    quad_tol: float = 1e-12

    @classmethod
    def for_medium(cls, T: float, Theta: float, **kw) -> "ProfileParams":
        return cls(T=T, kappa=default_kappa(Theta), **kw)

    @cached_property
    def delta_T(self) -> float:
        if self.T == math.inf:
            return 0.0
        return float(sech(self.T)) ** self.kappa

    @cached_property
    def F_max(self) -> float:
        return F_T(self.zeta_max, self)


def _F_integrand(delta: float):
    def g(xi):
        s2 = 1.0 / math.cosh(xi) ** 2
        return s2 / (SQRT2 * math.sqrt(s2 * s2 + delta))
    return g


def F_T(zeta: float, params: ProfileParams) -> float:
    """F_T(zeta) = int_0^zeta sech^2 / (sqrt2 sqrt(sech^4 + delta_T))."""
    if abs(zeta) > params.zeta_max * (1 + 1e-15):
        raise ValueError(f"|zeta| must not exceed zeta_max={params.zeta_max}")
    if params.delta_T == 0.0:
        return zeta / SQRT2
    sgn = -1.0 if zeta < 0 else 1.0
    return sgn * adaptive_simpson(_F_integrand(params.delta_T), 0.0, abs(zeta),
                                  tol=params.quad_tol)


def F_T_inverse(z: float, params: ProfileParams) -> float:
    """Solve F_T(zeta) = z by bracketed bisection plus Newton polish.

    Beyond the inversion range the result saturates at +-zeta_max.
    """
    if z == 0.0:
        return 0.0
    sgn = -1.0 if z < 0 else 1.0
    target = abs(z)
    if params.delta_T == 0.0:
        return sgn * min(target * SQRT2, params.zeta_max)
    if target >= params.F_max:
        return sgn * params.zeta_max
    g = _F_integrand(params.delta_T)
    lo, hi = 0.0, params.zeta_max
    # bisection down to a bracket narrow enough for Newton to be safe
    zeta = min(target * SQRT2, hi)
    for _ in range(200):
        val = F_T(zeta, params) - target
        if val > 0:
            hi = zeta
        else:
            lo = zeta
        if abs(val) < 1e-14:
            return sgn * zeta
        step = val / g(zeta)
        cand = zeta - step
        if not (lo < cand < hi) or hi - lo < 1e-300:
            cand = 0.5 * (lo + hi)
        if abs(cand - zeta) < 1e-15 * max(1.0, zeta):
            return sgn * cand
        zeta = cand
    return sgn * zeta


def q_T(z: float, params: ProfileParams) -> float:
    """q_T(z) = tanh(F_T^{-1}(z)); saturates to +-tanh(zeta_max) outside the range."""
    return math.tanh(F_T_inverse(float(z), params))


def q_T_prime(z: float, params: ProfileParams) -> float:
    zeta = F_T_inverse(float(z), params)
    if abs(zeta) >= params.zeta_max:
        return 0.0
    return math.sqrt(2.0) * math.sqrt(W(math.tanh(zeta)) + params.delta_T)


def psi_T(z: float, params: ProfileParams) -> float:
    """psi_T(z) = int_0^z d xi / (sqrt2 sqrt(W(xi) + delta_T)), the inverse of q_T."""
    delta = params.delta_T
    if delta == 0.0 and abs(z) >= 1.0:
        raise ValueError("psi_T is singular at |z| >= 1 when delta_T = 0")

    def g(xi):
        return 1.0 / (SQRT2 * math.sqrt(W(xi) + delta))

    sgn = -1.0 if z < 0 else 1.0
    return sgn * adaptive_simpson(g, 0.0, abs(float(z)), tol=params.quad_tol)


class QTTable:
    """Vectorised q_T on |z| <= z_max via a cubic spline through sampled values."""

    def __init__(self, params: ProfileParams, z_max: float = 12.0, n: int = 2001):
        zs = np.linspace(0.0, z_max, n)
        vals = np.array([q_T(z, params) for z in zs])
        self.params = params
        self.z_max = z_max
        self._interp = CubicSpline(zs, vals)
        self._edge = vals[-1]

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        az = np.abs(z)
        out = np.where(az <= self.z_max, self._interp(np.minimum(az, self.z_max)), self._edge)
        return np.sign(z) * out
