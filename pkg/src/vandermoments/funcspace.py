"""Exact arithmetic for piecewise-polynomial functions on [0,1].

Elements of C[0,1] are restricted to piecewise polynomials with rational
breakpoints and rational coefficients.  This class is closed under all the
operations the moment engine performs (pointwise algebra, integration,
composition with affine maps) and every function showing up in the computed
examples lives in it, so the whole pipeline stays exact end to end.

Polynomials are coefficient tuples in ascending degree with no trailing
zeros; the empty tuple is the zero polynomial.  A piecewise function carries
breakpoints 0 = x0 < x1 < ... < xm = 1 and one polynomial per interval,
with piece i in force on (x_{i-1}, x_i] and the first piece also covering
t = 0.  No floating point is used anywhere in this module.
"""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ContractError

Rat = Fraction
Poly = tuple[Fraction, ...]

F0 = Fraction(0)
F1 = Fraction(1)


# ---------------------------------------------------------------------------
# plain polynomial helpers (coefficient tuples, ascending degree)
# ---------------------------------------------------------------------------

def poly_normalize(coeffs: Iterable[Rat]) -> Poly:
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def poly_add(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return poly_normalize(out)


def poly_neg(a: Poly) -> Poly:
    return tuple(-c for c in a)


def poly_scale(a: Poly, c: Rat) -> Poly:
    if c == 0:
        return ()
    return tuple(x * c for x in a)


def poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [F0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def poly_eval(a: Poly, x: Rat) -> Rat:
    acc = F0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def poly_integral(a: Poly, lo: Rat, hi: Rat) -> Rat:
    """Exact definite integral of the polynomial over [lo, hi]."""
    acc = F0
    for k, c in enumerate(a):
        acc += c * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
    return acc


def poly_compose_affine(a: Poly, alpha: Rat, beta: Rat) -> Poly:
    """Coefficients of a(alpha*x + beta)."""
    out: Poly = ()
    for c in reversed(a):
        out = poly_add(poly_mul(out, (beta, alpha)), (c,))
    return out


def interpolate(points: Sequence[tuple[Rat, Rat]]) -> Poly:
    """Unique polynomial of degree < len(points) through the given points.

    Newton's divided differences over exact rationals.  Raises on duplicate
    abscissae.
    """
    if not points:
        raise ContractError("interpolation needs at least one point")
    xs = [Fraction(x) for x, _ in points]
    if len(set(xs)) != len(xs):
        raise ContractError("duplicate abscissae in interpolation input")
    coefs = [Fraction(v) for _, v in points]  # divided-difference table, in place
    n = len(points)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            coefs[i] = (coefs[i] - coefs[i - 1]) / (xs[i] - xs[i - level])
    # expand the Newton form
    out: Poly = ()
    for i in range(n - 1, -1, -1):
        out = poly_add(poly_mul(out, (-xs[i], F1)), (coefs[i],))
    return out


# ---------------------------------------------------------------------------
# piecewise polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewisePoly:
    """A piecewise polynomial on [0,1] in canonical form.

    Do not call the constructor with raw data; use :func:`piecewise`,
    :func:`const` or :func:`from_poly`, which canonicalize.
    """

    breakpoints: tuple[Rat, ...]
    pieces: tuple[Poly, ...]

    # -- construction -------------------------------------------------------

    @staticmethod
    def _canonical(breakpoints, pieces) -> "PiecewisePoly":
        bps = [Fraction(b) for b in breakpoints]
        ps = [poly_normalize(p) for p in pieces]
        if len(bps) != len(ps) + 1:
            raise ContractError("breakpoint/piece count mismatch")
        if bps[0] != 0 or bps[-1] != 1:
            raise ContractError("piecewise functions live on [0,1]")
        if any(bps[i] >= bps[i + 1] for i in range(len(bps) - 1)):
            raise ContractError("breakpoints must strictly increase")
        merged_b = [bps[0]]
        merged_p: list[Poly] = []
        for b, p in zip(bps[1:], ps):
            if merged_p and merged_p[-1] == p:
                merged_b[-1] = b
            else:
                merged_p.append(p)
                merged_b.append(b)
        return PiecewisePoly(tuple(merged_b), tuple(merged_p))

    # -- queries -------------------------------------------------------------

    def eval_at(self, t: Rat) -> Rat:
        t = Fraction(t)
        if t < 0 or t > 1:
            raise ContractError(f"evaluation point {t} outside [0,1]")
        if t == 0:
            return poly_eval(self.pieces[0], F0)
        # piece i covers (x_i, x_{i+1}]
        i = bisect_left(self.breakpoints, t)
        return poly_eval(self.pieces[i - 1], t)

    __call__ = eval_at

    def tau(self) -> Rat:
        """Integral over [0,1] (the tracial state)."""
        total = F0
        for i, p in enumerate(self.pieces):
            total += poly_integral(p, self.breakpoints[i], self.breakpoints[i + 1])
        return total

    def is_constant(self) -> bool:
        return len(self.pieces) == 1 and len(self.pieces[0]) <= 1

    def constant_value(self) -> Rat:
        if not self.is_constant():
            raise ContractError("not a constant function")
        return self.pieces[0][0] if self.pieces[0] else F0

    def is_zero(self) -> bool:
        return self.pieces == ((),)

    def degree(self) -> int:
        """Largest piece degree; 0 for the zero function."""
        return max((len(p) - 1 for p in self.pieces if p), default=0)

    # -- algebra -------------------------------------------------------------

    def _aligned(self, other: "PiecewisePoly"):
        bps = sorted(set(self.breakpoints) | set(other.breakpoints))
        a = _refine(self, bps)
        b = _refine(other, bps)
        return bps, a, b

    def __add__(self, other):
        other = as_piecewise(other)
        bps, a, b = self._aligned(other)
        return PiecewisePoly._canonical(bps, [poly_add(x, y) for x, y in zip(a, b)])

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self.__add__(as_piecewise(other).__neg__())

    def __rsub__(self, other):
        return as_piecewise(other).__sub__(self)

    def __neg__(self):
        return PiecewisePoly(self.breakpoints, tuple(poly_neg(p) for p in self.pieces))

    def __mul__(self, other):
        other = as_piecewise(other)
        bps, a, b = self._aligned(other)
        return PiecewisePoly._canonical(bps, [poly_mul(x, y) for x, y in zip(a, b)])

    def __rmul__(self, other):
        return self.__mul__(other)

    def scale(self, c: Rat) -> "PiecewisePoly":
        return PiecewisePoly._canonical(
            self.breakpoints, [poly_scale(p, Fraction(c)) for p in self.pieces])

    def __pow__(self, k: int):
        if k < 0:
            raise ContractError("negative powers are not defined here")
        out = const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # -- serialization -------------------------------------------------------

    def canonical_key(self) -> str:
        """Deterministic text key; equal functions get equal keys."""
        bp = ",".join(str(b) for b in self.breakpoints)
        pc = ";".join(",".join(str(c) for c in p) for p in self.pieces)
        return f"{bp}|{pc}"

    def to_json_dict(self) -> dict:
        return {
            "breakpoints": [str(b) for b in self.breakpoints],
            "coeffs": [[str(c) for c in p] for p in self.pieces],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(d: dict) -> "PiecewisePoly":
        return PiecewisePoly._canonical(
            [Fraction(b) for b in d["breakpoints"]],
            [tuple(Fraction(c) for c in p) for p in d["coeffs"]])

    @staticmethod
    def from_json(s: str) -> "PiecewisePoly":
        return PiecewisePoly.from_json_dict(json.loads(s))

    def __repr__(self):
        from .parsing import render_function
        return f"PiecewisePoly({render_function(self)})"


def _refine(f: PiecewisePoly, bps: Sequence[Rat]) -> list[Poly]:
    """Pieces of f re-expressed over the finer breakpoint grid."""
    out = []
    j = 0
    for i in range(len(bps) - 1):
        hi = bps[i + 1]
        while f.breakpoints[j + 1] < hi:
            j += 1
        out.append(f.pieces[j])
    return out


def piecewise(breakpoints, pieces) -> PiecewisePoly:
    """Canonical piecewise polynomial from explicit breakpoints and pieces."""
    return PiecewisePoly._canonical(breakpoints, pieces)


def from_poly(coeffs: Iterable[Rat]) -> PiecewisePoly:
    """Single-piece function from ascending coefficients."""
    return PiecewisePoly._canonical((F0, F1), (poly_normalize(coeffs),))


def const(c: Rat) -> PiecewisePoly:
    return from_poly((Fraction(c),))


def as_piecewise(x) -> PiecewisePoly:
    if isinstance(x, PiecewisePoly):
        return x
    if isinstance(x, (int, Fraction)):
        return const(x)
    raise ContractError(f"cannot interpret {x!r} as an element of C[0,1]")


#: the identity function t
T = from_poly((F0, F1))
ONE = const(1)


def algebra(f: PiecewisePoly, g: PiecewisePoly, op: str) -> PiecewisePoly:
    """Pointwise add or mul; kept as a named entry point for the two ops."""
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    raise ContractError(f"unknown op {op!r}")


def scale(f: PiecewisePoly, c: Rat) -> PiecewisePoly:
    return as_piecewise(f).scale(c)


def tau(f: PiecewisePoly) -> Rat:
    return as_piecewise(f).tau()


def eval_at(f: PiecewisePoly, t: Rat) -> Rat:
    return as_piecewise(f).eval_at(t)
