"""Periodic coefficient fields a(x), their parser, and direction frames.

The coefficient is given as a closed-form expression in the variables
``x1 .. xN``. Expressions are parsed by a small recursive-descent parser
into an AST that evaluates vectorised over numpy arrays.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("-" | "+") unary | power ;
    power   = atom [ "^" unary ] ;          (* right associative *)
    atom    = number | "pi" | var | func "(" expr ")" | "(" expr ")" ;
    var     = "x" digit { digit } ;
    func    = "sin" | "cos" | "exp" | "sqrt" | "abs" ;
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence, Union

import numpy as np


class ExprError(ValueError):
    """Raised for malformed coefficient expressions."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} at offset {offset}"
        super().__init__(message)


class MediumError(ValueError):
    """Raised when a coefficient field violates the medium hypotheses."""


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # zero-based axis


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi}

_BINOPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end":
            raise ExprError(f"expected {value!r}", off)

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected token {val!r}", off)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            if val in FUNCTIONS:
                if self.peek()[1] != "(":
                    raise ExprError(f"function {val!r} needs an argument", self.peek()[2])
                self.take()
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise ExprError(f"wrong arity for {val!r} (expects 1 argument)",
                                    self.peek()[2])
                self.expect(")")
                return Call(val, arg)
            m = re.fullmatch(r"x(\d+)", val)
            if m:
                k = int(m.group(1))
                if 1 <= k <= self.dim:
                    return Var(k - 1)
                raise ExprError(f"variable {val!r} out of range for N={self.dim}", off)
            raise ExprError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ExprError("unexpected end of input", off)
        raise ExprError(f"unexpected token {val!r}", off)


def parse_coefficient_expr(text: str, N: int) -> Expr:
    """Parse ``text`` into an expression tree over ``x1 .. xN``."""
    if not text or not text.strip():
        raise ExprError("empty expression")
    return _Parser(text, N).parse()


def eval_expr(node: Expr, coords: Sequence[np.ndarray]):
    """Evaluate ``node`` with ``coords[k]`` bound to ``x{k+1}`` (broadcasting)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return coords[node.index]
    if isinstance(node, Neg):
        return np.negative(eval_expr(node.operand, coords))
    if isinstance(node, BinOp):
        return _BINOPS[node.op](eval_expr(node.left, coords), eval_expr(node.right, coords))
    if isinstance(node, Call):
        return FUNCTIONS[node.name](eval_expr(node.arg, coords))
    raise TypeError(f"not an expression node: {node!r}")


def variables_used(node: Expr) -> set:
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, Neg):
        return variables_used(node.operand)
    if isinstance(node, BinOp):
        return variables_used(node.left) | variables_used(node.right)
    if isinstance(node, Call):
        return variables_used(node.arg)
    return set()


# --------------------------------------------------------------------------
# Coefficient field
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientField:
    """A validated periodic coefficient a(x) with estimated bounds."""

    text: str
    expr: Expr
    dim: int
    period: tuple
    theta_hat: float
    Theta_hat: float

    def __call__(self, x) -> np.ndarray:
        return eval_a(self, x)

    @property
    def lateral_scale(self) -> float:
        return float(self.period[0])


def _grid_cell(dim: int, period, n: int):
    axes = [np.arange(n) * (p / n) for p in period]
    return np.meshgrid(*axes, indexing="ij")


def _eval_on(expr: Expr, coords, dim: int) -> np.ndarray:
    with np.errstate(all="ignore"):
        vals = eval_expr(expr, coords)
    shape = np.broadcast(*coords).shape
    return np.broadcast_to(np.asarray(vals, dtype=float), shape)


def estimate_bounds(field_or_expr, samples_per_axis: int = 256, *, dim=None, period=None):
    """Grid extrema of a over one period cell, widened by a Lipschitz margin.

    Returns ``(theta_hat, Theta_hat)``. Raises :class:`MediumError` when a
    takes nonpositive or non-finite values on the grid.
    """
    if samples_per_axis < 64:
        raise ValueError("samples_per_axis must be >= 64")
    if isinstance(field_or_expr, CoefficientField):
        expr, dim, period = field_or_expr.expr, field_or_expr.dim, field_or_expr.period
    else:
        expr = field_or_expr
    n = samples_per_axis
    coords = _grid_cell(dim, period, n)
    vals = _eval_on(expr, coords, dim)
    if not np.all(np.isfinite(vals)):
        raise MediumError("coefficient is not finite on the period cell")
    lo, hi = float(vals.min()), float(vals.max())
    if lo <= 0.0:
        raise MediumError(f"coefficient must be positive (min sampled value {lo:.6g})")
    lip = 0.0
    for axis in range(dim):
        h = period[axis] / n
        diff = np.abs(np.roll(vals, -1, axis=axis) - vals) / h
        lip = max(lip, float(diff.max()))
    margin = lip * max(period) / n
    theta_hat = lo - margin
    if theta_hat <= 0.0:
        theta_hat = 0.5 * lo
    return theta_hat, hi + margin


def make_field(text: str, dim: int = 2, period=None, samples_per_axis: int = 256,
               check_periodicity: bool = True) -> CoefficientField:
    """Parse, validate and bound a coefficient field."""
    if dim not in (2, 3):
        raise MediumError("dimension must be 2 or 3")
    if period is None:
        period = (1.0,) * dim
    period = tuple(float(p) for p in (period if np.ndim(period) else [period] * dim))
    if len(period) != dim or min(period) <= 0:
        raise MediumError("period must list one positive length per axis")
    expr = parse_coefficient_expr(text, dim)
    theta_hat, Theta_hat = estimate_bounds(expr, samples_per_axis, dim=dim, period=period)
    if check_periodicity:
        rng = np.random.default_rng(12345)
        pts = rng.uniform(-3.0, 3.0, size=(dim, 100))
        base = _eval_on(expr, list(pts), dim)
        for axis in range(dim):
            shifted = pts.copy()
            shifted[axis] += period[axis]
            other = _eval_on(expr, list(shifted), dim)
            if np.max(np.abs(other - base) / np.abs(base)) > 1e-12:
                raise MediumError(f"coefficient is not periodic along x{axis + 1} "
                                  f"with period {period[axis]}")
    return CoefficientField(text, expr, dim, period, theta_hat, Theta_hat)


def eval_a(field: CoefficientField, x) -> np.ndarray:
    """a(x) for points ``x`` of shape ``(..., N)``."""
    x = np.asarray(x, dtype=float)
    coords = [x[..., k] for k in range(field.dim)]
    return _eval_on(field.expr, coords, field.dim).copy()


def eval_a_coords(field: CoefficientField, *coords) -> np.ndarray:
    """a evaluated on separate coordinate arrays (avoids stacking large grids)."""
    return _eval_on(field.expr, list(coords), field.dim).copy()


# --------------------------------------------------------------------------
# Direction frames
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DirectionFrame:
    nu: np.ndarray
    rotation: np.ndarray
    integer_vector: Optional[tuple] = None
    lateral_period: Optional[float] = None
    lateral: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.nu.shape[0]

    @property
    def is_rational(self) -> bool:
        return self.integer_vector is not None

    def angle(self) -> float:
        return math.atan2(self.nu[1], self.nu[0])

    def to_physical(self, s, t):
        """Physical 2D coordinates of frame coordinates (s along nu, t lateral)."""
        return (s * self.nu[0] + t * self.lateral[0], s * self.nu[1] + t * self.lateral[1])


def _as_integer_vector(v) -> Optional[tuple]:
    out = []
    for c in v:
        if isinstance(c, (int, np.integer)):
            out.append(int(c))
        elif isinstance(c, Fraction) and c.denominator == 1:
            out.append(int(c))
        elif isinstance(c, (float, np.floating)) and float(c).is_integer():
            out.append(int(c))
        else:
            return None
    return tuple(out)


def _rotation_to_e1(nu: np.ndarray) -> np.ndarray:
    n = nu.shape[0]
    if n == 2:
        return np.array([[nu[0], nu[1]], [-nu[1], nu[0]]])
    e1 = np.zeros(n)
    e1[0] = 1.0
    c = float(nu @ e1)
    if c > 1.0 - 1e-15:
        return np.eye(n)
    if c < -1.0 + 1e-15:
        # half turn about e3
        R = -np.eye(n)
        R[2, 2] = 1.0
        return R
    v = np.cross(nu, e1)
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(n) + vx + vx @ vx / (1.0 + c)


def direction_frame(p_or_nu, period: float = 1.0) -> DirectionFrame:
    """Build the frame for a direction given as an integer vector or a unit vector.

    Integer inputs are reduced by their gcd; in 2D their lateral period is
    ``|p| * period`` and the lateral vector is ``(-p2, p1)/|p|``.
    """
    v = np.asarray(p_or_nu, dtype=float)
    if v.ndim != 1 or v.shape[0] not in (2, 3):
        raise ValueError("direction must be a 2- or 3-vector")
    if not np.any(v):
        raise ValueError("direction must be nonzero")
    ints = _as_integer_vector(p_or_nu)
    lateral_period = None
    if ints is not None:
        g = reduce(math.gcd, (abs(c) for c in ints))
        ints = tuple(c // g for c in ints)
        v = np.asarray(ints, dtype=float)
    nu = v / np.linalg.norm(v)
    R = _rotation_to_e1(nu)
    lateral = R[1].copy()
    if ints is not None:
        if len(ints) == 2:
            lateral_period = math.hypot(*ints) * period
        elif sum(1 for c in ints if c) == 1:
            lateral_period = period
    return DirectionFrame(nu, R, ints, lateral_period, lateral)
