"""Exact integration of rational polynomials over bounded rational polytopes.

Polytopes arrive in H-representation: each constraint is a two-sided band
lo < a.x <= hi with rational data (lo may be absent, meaning minus
infinity).  Integration works on the closure; the open/closed distinction
only ever removes null sets.  Everything here is exact rational arithmetic.

The pipeline is vertex enumeration by solving facet subsets, triangulation
by coning a base vertex over recursively triangulated facets, and the
factorial formula for monomials over the standard simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Optional

from .errors import ContractError, ResourceLimitError, UnboundedPolytopeError
from .funcspace import poly_eval

F0 = Fraction(0)
F1 = Fraction(1)

DIM_GUARD = 9


# ---------------------------------------------------------------------------
# exact linear algebra on rational matrices
# ---------------------------------------------------------------------------

def mat_invert(rows):
    """Inverse and determinant of a square rational matrix, or (None, 0)."""
    d = len(rows)
    aug = [list(r) + [F1 if i == j else F0 for j in range(d)]
           for i, r in enumerate(rows)]
    det = F1
    for col in range(d):
        piv = next((r for r in range(col, d) if aug[r][col] != 0), None)
        if piv is None:
            return None, F0
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
            det = -det
        pv = aug[col][col]
        det *= pv
        inv_pv = F1 / pv
        aug[col] = [x * inv_pv for x in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[d:] for row in aug], det


def mat_rank(rows) -> int:
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        m[rank] = [x / pv for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def nullspace_basis(rows, dim: int):
    """Basis (list of vectors) of the right nullspace of the given rows."""
    m = [list(r) for r in rows]
    pivots = []
    rank = 0
    for col in range(dim):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        m[rank] = [x / pv for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for fc in free:
        v = [F0] * dim
        v[fc] = F1
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][fc]
        basis.append(tuple(v))
    return basis


def dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), F0)


def affine_rank(points) -> int:
    if not points:
        return -1
    p0 = points[0]
    return mat_rank([[x - y for x, y in zip(p, p0)] for p in points[1:]])


# ---------------------------------------------------------------------------
# polytope types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    """The band lo < a.x <= hi; lo None means unbounded below."""

    a: tuple[Fraction, ...]
    lo: Optional[Fraction]
    hi: Fraction


@dataclass(frozen=True)
class RationalPolytope:
    dim: int
    constraints: tuple[Constraint, ...]

    @staticmethod
    def of(dim, constraints) -> "RationalPolytope":
        cs = []
        for a, lo, hi in constraints:
            av = tuple(Fraction(x) for x in a)
            if len(av) != dim:
                raise ContractError("constraint arity mismatch")
            cs.append(Constraint(av, None if lo is None else Fraction(lo),
                                 Fraction(hi)))
        return RationalPolytope(dim, tuple(cs))

    def contains(self, x, closed: bool = True) -> bool:
        for c in self.constraints:
            v = dot(c.a, x)
            if v > c.hi:
                return False
            if c.lo is not None and (v < c.lo if closed else v <= c.lo):
                return False
        return True


@dataclass(frozen=True)
class Simplex:
    vertices: tuple[tuple[Fraction, ...], ...]

    def volume(self) -> Fraction:
        d = len(self.vertices) - 1
        if d == 0:
            return F1
        v0 = self.vertices[0]
        rows = [[x - y for x, y in zip(v, v0)] for v in self.vertices[1:]]
        _, det = mat_invert(rows)
        return abs(det) / math.factorial(d)


# ---------------------------------------------------------------------------
# sparse multivariate polynomials
# ---------------------------------------------------------------------------

class MultiPoly:
    """Sparse multivariate polynomial: exponent tuple -> rational coefficient."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms=None):
        self.dim = dim
        self.terms: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for e, c in dict(terms).items():
                c = Fraction(c)
                if c != 0:
                    self.terms[tuple(e)] = c

    @staticmethod
    def constant(dim: int, c) -> "MultiPoly":
        return MultiPoly(dim, {(0,) * dim: Fraction(c)})

    @staticmethod
    def affine(dim: int, coeffs, const) -> "MultiPoly":
        terms = {(0,) * dim: Fraction(const)}
        for i, c in enumerate(coeffs):
            if c != 0:
                e = [0] * dim
                e[i] = 1
                terms[tuple(e)] = Fraction(c)
        return MultiPoly(dim, terms)

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, F0) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return MultiPoly(self.dim, out)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = out.get(e, F0) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return MultiPoly(self.dim, out)

    def scale(self, c) -> "MultiPoly":
        c = Fraction(c)
        return MultiPoly(self.dim, {e: v * c for e, v in self.terms.items()})

    def eval(self, point) -> Fraction:
        total = F0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term *= x ** k
            total += term
        return total

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def compose_affine(self, cols, offset) -> "MultiPoly":
        """Substitute x = offset + sum_j y_j * cols[j]; returns a poly in y."""
        k = len(cols)
        forms = [MultiPoly.affine(k, [col[i] for col in cols], offset[i])
                 for i in range(self.dim)]
        pow_cache: dict[tuple[int, int], MultiPoly] = {}

        def form_pow(i, e):
            if e == 0:
                return None
            key = (i, e)
            if key not in pow_cache:
                p = forms[i]
                out = p
                for _ in range(e - 1):
                    out = out * p
                pow_cache[key] = out
            return pow_cache[key]

        result = MultiPoly(k)
        for e, c in self.terms.items():
            term = MultiPoly.constant(k, c)
            for i, ei in enumerate(e):
                f = form_pow(i, ei)
                if f is not None:
                    term = term * f
            result = result + term
        return result


def integrate_monomials_over_std_simplex(f: MultiPoly) -> Fraction:
    """Exact integral over {y >= 0, sum y <= 1} via the factorial formula."""
    d = f.dim
    total = F0
    for e, c in f.terms.items():
        num = 1
        for k in e:
            num *= math.factorial(k)
        total += c * Fraction(num, math.factorial(d + sum(e)))
    return total


# ---------------------------------------------------------------------------
# vertex enumeration
# ---------------------------------------------------------------------------

def _check_bounded(P: RationalPolytope) -> None:
    """Raise unless the recession cone is trivial.

    Constraints with a finite lower bound pin their normal direction to
    equality in the cone; the rest only impose a.x <= 0.  If the pinned
    normals span, the cone is {0}; otherwise the residual cone is examined
    inside a box in the (low-dimensional) nullspace.
    """
    pinned = [c.a for c in P.constraints if c.lo is not None]
    if mat_rank(pinned) == P.dim:
        return
    basis = nullspace_basis(pinned, P.dim)
    k = len(basis)
    ineq = []
    for c in P.constraints:
        if c.lo is None:
            reduced = tuple(dot(c.a, b) for b in basis)
            if any(x != 0 for x in reduced):
                ineq.append(reduced)
    if not ineq:
        raise UnboundedPolytopeError("polytope has a nontrivial recession cone")
    cs = [(a, None, F0) for a in ineq]
    for i in range(k):
        e = [F0] * k
        e[i] = F1
        cs.append((tuple(e), Fraction(-1), F1))
    box_cone = RationalPolytope.of(k, cs)
    for v in _vertex_set(box_cone):
        if any(x != 0 for x in v):
            raise UnboundedPolytopeError("polytope has a nontrivial recession cone")


def _vertex_set(P: RationalPolytope) -> frozenset:
    """All points on dim independent facet hyperplanes that satisfy every
    constraint of the closure."""
    d = P.dim
    if d == 0:
        feasible = all((c.lo is None or c.lo <= 0) and 0 <= c.hi
                       for c in P.constraints)
        return frozenset({()} if feasible else set())
    found = set()
    for subset in combinations(P.constraints, d):
        rows = [c.a for c in subset]
        side_lists = [[c.hi] if c.lo is None else [c.lo, c.hi]
                      for c in subset]
        inv, _det = mat_invert(rows)
        if inv is None:
            continue
        for rhs in product(*side_lists):
            x = tuple(sum(inv[i][j] * rhs[j] for j in range(d))
                      for i in range(d))
            if x in found:
                continue
            if P.contains(x):
                found.add(x)
    return frozenset(found)


_vertex_hints: dict[RationalPolytope, tuple] = {}


def register_vertices(P: RationalPolytope, verts) -> None:
    """Install a precomputed vertex set (exact callers only: the transform
    layer derives vertices of its parametric regions in one shared pass)."""
    _vertex_hints[P] = tuple(sorted(tuple(v) for v in verts))


@lru_cache(maxsize=32768)
def _vertices_cached(P: RationalPolytope):
    hint = _vertex_hints.pop(P, None)
    if hint is not None:
        return hint
    _check_bounded(P)
    return tuple(sorted(_vertex_set(P)))


def vertex_enumeration(P: RationalPolytope) -> list[tuple[Fraction, ...]]:
    """Exact vertex set of the closure, deduplicated, in sorted order."""
    if P.dim > DIM_GUARD:
        raise ResourceLimitError(f"dimension {P.dim} exceeds guard {DIM_GUARD}")
    return list(_vertices_cached(P))


# ---------------------------------------------------------------------------
# triangulation
# ---------------------------------------------------------------------------

def _canonical_plane(a, c):
    lead = next((x for x in a if x != 0), None)
    if lead is None:
        return None
    s = abs(lead)
    return tuple(x / s for x in a), c / s


# -- integer kernels for the triangulation hot path -------------------------

def int_det(rows) -> int:
    """Fraction-free Bareiss determinant of an integer matrix."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if piv is None:
                return 0
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[-1][-1]


def _idot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _int_rank(rows) -> int:
    m = [list(r) for r in rows if any(x != 0 for x in r)]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        for r in range(rank + 1, len(m)):
            if m[r][col] != 0:
                f = m[r][col]
                m[r] = [x * pv - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def _int_affine_rank(points) -> int:
    p0 = points[0]
    return _int_rank([[x - y for x, y in zip(p, p0)] for p in points[1:]])


def _int_solve_cols(cols, w):
    """Solve sum_j z_j cols[j] = w over the rationals (integer data)."""
    d = len(w)
    k = len(cols)
    m = [[Fraction(cols[j][i]) for j in range(k)] + [Fraction(w[i])]
         for i in range(d)]
    row = 0
    piv_rows = []
    for col in range(k):
        piv = next((r for r in range(row, d) if m[r][col] != 0), None)
        if piv is None:
            raise ContractError("columns are not independent")
        m[row], m[piv] = m[piv], m[row]
        pv = m[row][col]
        m[row] = [x / pv for x in m[row]]
        for r in range(d):
            if r != row and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[row])]
        piv_rows.append(row)
        row += 1
    for r in range(row, d):
        if m[r][k] != 0:
            raise ContractError("vector outside the span of the columns")
    return tuple(m[r][k] for r in piv_rows)


def _lcm_of_denominators(values) -> int:
    L = 1
    for v in values:
        L = L * v.denominator // math.gcd(L, v.denominator)
    return L


def _facet_planes(P: RationalPolytope):
    """Outer-form hyperplanes (a, c) with P inside {a.x <= c}, deduplicated."""
    planes = {}
    for con in P.constraints:
        p = _canonical_plane(con.a, con.hi)
        if p is not None:
            planes[p] = True
        if con.lo is not None:
            p = _canonical_plane(tuple(-x for x in con.a), -con.lo)
            if p is not None:
                planes[p] = True
    return list(planes)


def _canonical_int_plane(a, c):
    g = 0
    for x in a:
        g = math.gcd(g, abs(x))
    g = math.gcd(g, abs(c))
    if g > 1:
        return tuple(x // g for x in a), c // g
    return tuple(a), c


def _triangulate_rec(d, verts, planes):
    """Integer-coordinate coning recursion.

    verts: list of (int coords, tag); planes: (int normal, int offset) pairs
    with the polytope inside {a.x <= c}.  Returns tag tuples; the caller maps
    tags back to exact coordinates.
    """
    if len(verts) == d + 1:
        return [tuple(tag for _, tag in verts)]
    if d == 1:
        vs = sorted(verts)
        return [(vs[0][1], vs[-1][1])]
    v0 = min(verts)
    out = []
    seen = set()
    for a, c in planes:
        if _idot(a, v0[0]) == c:
            continue
        on = [v for v in verts if _idot(a, v[0]) == c]
        if len(on) < d:
            continue
        key = frozenset(tag for _, tag in on)
        if key in seen:
            continue
        seen.add(key)
        if _int_affine_rank([coords for coords, _ in on]) != d - 1:
            continue
        # integer basis of the facet's direction space
        piv = next(i for i, x in enumerate(a) if x != 0)
        basis = []
        for i in range(d):
            if i == piv:
                continue
            vec = [0] * d
            vec[i] = a[piv]
            vec[piv] = -a[i]
            basis.append(tuple(vec))
        p0 = on[0][0]
        sub_coords = []
        for coords, tag in on:
            w = tuple(x - y for x, y in zip(coords, p0))
            sub_coords.append((_int_solve_cols(basis, w), tag))
        scale = _lcm_of_denominators(
            [z for zs, _ in sub_coords for z in zs]) if sub_coords else 1
        sub_verts = [(tuple(int(z * scale) for z in zs), tag)
                     for zs, tag in sub_coords]
        sub_planes = {}
        for a2, c2 in planes:
            n2 = tuple(_idot(a2, b) for b in basis)
            if all(x == 0 for x in n2):
                continue
            p = _canonical_int_plane(n2, (c2 - _idot(a2, p0)) * scale)
            sub_planes[p] = True
        for simplex in _triangulate_rec(d - 1, sub_verts, list(sub_planes)):
            out.append((v0[1],) + simplex)
    return out


def _to_int_data(verts, planes):
    """Scale rational vertices and planes to integer data; returns
    (int verts with original tags, int planes, scale L)."""
    L = _lcm_of_denominators([x for v in verts for x in v])
    iverts = [(tuple(int(x * L) for x in v), v) for v in verts]
    iplanes = []
    for a, c in planes:
        m = _lcm_of_denominators(list(a) + [c])
        iplanes.append(_canonical_int_plane(
            tuple(int(x * m) for x in a), int(c * m * L)))
    return iverts, list(dict.fromkeys(iplanes)), L


def triangulate(vertices, planes=None) -> list[Simplex]:
    """Triangulate the convex hull of the given vertices.

    If supporting hyperplanes are not supplied they are recovered by brute
    force from the vertex set (fine for small inputs; the integration path
    always passes the H-representation's planes).  Returns [] when the
    points do not span the ambient dimension.
    """
    vs = [tuple(Fraction(x) for x in v) for v in vertices]
    vs = sorted(set(vs))
    if not vs:
        return []
    d = len(vs[0])
    if d == 0:
        return []
    if affine_rank(vs) < d:
        return []
    if planes is None:
        planes = _planes_from_vertices(vs, d)
    tagged, iplanes, _L = _to_int_data(vs, planes)
    raw = _triangulate_rec(d, tagged, iplanes)
    out = []
    for simplex in raw:
        s = Simplex(tuple(simplex))
        if s.volume() != 0:
            out.append(s)
    return out


def triangulate_tagged(tagged, planes):
    """Triangulate full-dimensional rational vertices carrying opaque tags.

    tagged: (coords, tag) pairs; planes: (a, c) outer-form hyperplanes.
    Returns simplices as tag tuples, letting callers track which vertex of a
    parametric family each corner came from.
    """
    if not tagged:
        return []
    d = len(tagged[0][0])
    L = _lcm_of_denominators([x for v, _ in tagged for x in v])
    iverts = [(tuple(int(x * L) for x in v), tag) for v, tag in tagged]
    iplanes = []
    for a, c in planes:
        m = _lcm_of_denominators(list(a) + [c])
        iplanes.append(_canonical_int_plane(
            tuple(int(x * m) for x in a), int(c * m * L)))
    return _triangulate_rec(d, iverts, list(dict.fromkeys(iplanes)))


def _planes_from_vertices(vs, d):
    planes = {}
    for subset in combinations(vs, d):
        p0 = subset[0]
        rows = [[x - y for x, y in zip(p, p0)] for p in subset[1:]]
        normal = nullspace_basis(rows, d)
        if len(normal) != 1:
            continue
        a = normal[0]
        c = dot(a, p0)
        vals = [dot(a, v) for v in vs]
        if all(v <= c for v in vals):
            p = _canonical_plane(a, c)
        elif all(v >= c for v in vals):
            p = _canonical_plane(tuple(-x for x in a), -c)
        else:
            continue
        if p is not None:
            planes[p] = True
    return list(planes)


def simplex_affine_data(simplices, d: int):
    """(v0, cols, |det|) records for simplices given as vertex tuples."""
    out = []
    for simplex in simplices:
        v0 = simplex[0]
        cols = [tuple(x - y for x, y in zip(v, v0)) for v in simplex[1:]]
        L = _lcm_of_denominators([x for col in cols for x in col])
        det = int_det([[int(cols[j][i] * L) for j in range(d)]
                       for i in range(d)])
        if det != 0:
            out.append((v0, tuple(cols), Fraction(abs(det), L ** d)))
    return tuple(out)


@lru_cache(maxsize=16384)
def _simplices_cached(P: RationalPolytope):
    """Triangulation with precomputed affine maps: (v0, cols, |det|)."""
    verts = _vertices_cached(P)
    d = P.dim
    if len(verts) < d + 1 or affine_rank(list(verts)) < d:
        return ()
    tagged, iplanes, _L = _to_int_data(list(verts), _facet_planes(P))
    raw = _triangulate_rec(d, tagged, iplanes)
    return simplex_affine_data(raw, d)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def integrate(P: RationalPolytope, f: MultiPoly) -> Fraction:
    """Exact integral of f over P (closure); 0 for empty or degenerate P."""
    if P.dim > DIM_GUARD:
        raise ResourceLimitError(f"dimension {P.dim} exceeds guard {DIM_GUARD}")
    if f.dim != P.dim:
        raise ContractError("integrand dimension mismatch")
    if P.dim == 0:
        verts = _vertex_set(P)
        return f.eval(()) if verts else F0
    total = F0
    for v0, cols, absdet in _simplices_cached(P):
        g = f.compose_affine(cols, v0)
        total += absdet * integrate_monomials_over_std_simplex(g)
    return total


def integrate_factors_on_simplices(records, d: int, factors) -> Fraction:
    """Sum of simplex integrals of a product of composed univariate polys.

    records holds (v0, cols, |det|) affine data; factors is a list of
    (coeffs, a, b) meaning poly(a.x + b).  Degree-zero factors multiply out
    as scalars, so a pure volume never touches multivariate arithmetic.
    """
    scalar = F1
    live = []
    for coeffs, a, b in factors:
        if len(coeffs) == 0:
            return F0
        if len(coeffs) == 1:
            scalar *= coeffs[0]
        else:
            live.append((coeffs, a, b))
    if scalar == 0:
        return F0
    inv_dfact = Fraction(1, math.factorial(d))
    total = F0
    for v0, cols, absdet in records:
        if not live:
            total += absdet * inv_dfact
            continue
        g = MultiPoly.constant(d, 1)
        for coeffs, a, b in live:
            lin = MultiPoly.affine(
                d, [dot(a, col) for col in cols], dot(a, v0) + Fraction(b))
            # Horner in the affine form
            val = MultiPoly.constant(d, 0)
            for c in reversed(coeffs):
                val = val * lin + MultiPoly.constant(d, c)
            if not val.terms:
                g = MultiPoly.constant(d, 0)
                break
            g = g * val
        if g.terms:
            total += absdet * integrate_monomials_over_std_simplex(g)
    return scalar * total


def integrate_factors(P: RationalPolytope, factors) -> Fraction:
    """Integral over P of a product of univariate polynomials composed with
    affine forms: factors is a list of (coeffs, a, b) meaning poly(a.x + b).

    Substitution into each simplex happens factor by factor, which is much
    cheaper than expanding the product in the ambient coordinates first.
    """
    if P.dim > DIM_GUARD:
        raise ResourceLimitError(f"dimension {P.dim} exceeds guard {DIM_GUARD}")
    if P.dim == 0:
        verts = _vertex_set(P)
        if not verts:
            return F0
        out = F1
        for coeffs, _a, b in factors:
            out *= poly_eval(coeffs, Fraction(b))
        return out
    return integrate_factors_on_simplices(
        _simplices_cached(P), P.dim, factors)


def volume(P: RationalPolytope) -> Fraction:
    return integrate(P, MultiPoly.constant(P.dim, 1))


def clear_geometry_caches():
    _vertices_cached.cache_clear()
    _simplices_cached.cache_clear()
