"""The partition-indexed maps at the core of the moment formulas.

For a partition of {1..n} and functions g_1..g_n, `gamma` forms the product
of the g_j over the block containing 1, times the trace of the block product
for every other block.

The companion map of g_1..g_{n-1} is the pointwise product for the discrete
partition; otherwise its value at t is an integral over a region cut out by
the partition's index sets, one band constraint 0 < t + sum_{j in I(p)} x_j
<= 1 per position p, with the integrand the product of the g_p evaluated on
those same affine forms.

Two independent engines compute it.  `lambda_reduce` rewrites the partition
with exact structural rules (gluing adjacent elements of a block, the
wrap-around block, interval factorizations) until a closed form emerges; it
reports failure on any partition with a crossing core, which is exactly the
crossing partitions.  `lambda_eval_at` integrates over the region directly
with exact polytope quadrature at a fixed t.  Each engine checks the other
in the test suite.

`lambda_function` reconstructs the full t-dependence.  It applies the same
rewrite rules, and when an irreducible crossing core remains it rebuilds
that core's t-dependence chamber by chamber: candidate chamber boundaries
come from an exact parametric vertex pass (every fiber vertex moves
affinely in t), each chamber is interpolated from exact point values, and
two verification points per chamber guard against hidden breakpoints.
Results are memoized, with constants factored out through multilinearity
first so that equivalent requests share cache entries.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Callable, Optional, Sequence

from .cache import LambdaCache, default_cache
from .errors import BreakpointInsideInterval, ContractError
from .funcspace import (ONE, PiecewisePoly, as_piecewise, const, interpolate,
                        piecewise, poly_eval)
from .partitions import SetPartition, geometry
from .polytopes import (RationalPolytope, int_det, integrate_factors,
                        integrate_factors_on_simplices, mat_invert,
                        register_vertices, triangulate_tagged)

F0 = Fraction(0)
F1 = Fraction(1)

#: when set, tau_lambda re-derives every value from the rotated partition
#: and asserts exact agreement (slow; meant for debugging sessions)
CHECK_ROTATION = False


# ---------------------------------------------------------------------------
# gamma
# ---------------------------------------------------------------------------

def gamma(p: SetPartition, gs: Sequence[PiecewisePoly]) -> PiecewisePoly:
    """Product over the block of 1, weighted by traces of the other blocks."""
    gs = [as_piecewise(g) for g in gs]
    if len(gs) != p.n:
        raise ContractError(f"gamma needs {p.n} functions, got {len(gs)}")
    out = ONE
    for j in p.blocks[0]:
        out = out * gs[j - 1]
    weight = F1
    for block in p.blocks[1:]:
        prod = ONE
        for j in block:
            prod = prod * gs[j - 1]
        weight *= prod.tau()
    return out.scale(weight)


def tau_gamma(p: SetPartition, gs: Sequence[PiecewisePoly]) -> Fraction:
    """Trace of gamma: the product of block-product traces."""
    gs = [as_piecewise(g) for g in gs]
    if len(gs) != p.n:
        raise ContractError(f"tau_gamma needs {p.n} functions, got {len(gs)}")
    total = F1
    for block in p.blocks:
        prod = ONE
        for j in block:
            prod = prod * gs[j - 1]
        total *= prod.tau()
    return total


# ---------------------------------------------------------------------------
# the integration region
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _region_data(p: SetPartition):
    """(jvars, normals, factor_normals): variable order, deduplicated
    constraint normals, and the per-position affine normal (None when the
    index set is empty and the position contributes a plain factor g(t))."""
    geo = geometry(p)
    jvars = sorted(geo.j_set)
    index = {j: k for k, j in enumerate(jvars)}
    factor_normals = []
    normals = []
    seen = set()
    for q in range(1, p.n):
        iset = geo.i_sets[q]
        if not iset:
            factor_normals.append(None)
            continue
        normal = [F0] * len(jvars)
        for j in iset:
            normal[index[j]] = F1
        normal = tuple(normal)
        factor_normals.append(normal)
        if normal not in seen:
            seen.add(normal)
            normals.append(normal)
    return tuple(jvars), tuple(normals), tuple(factor_normals)


def e_polytope(p: SetPartition, t: Fraction) -> RationalPolytope:
    """The closure of the region at parameter t, in H-representation."""
    t = Fraction(t)
    jvars, normals, _ = _region_data(p)
    return RationalPolytope.of(
        len(jvars), [(a, -t, 1 - t) for a in normals])


@lru_cache(maxsize=None)
def _parametric_records(p: SetPartition):
    """Fiber vertex trajectories: (u, w, tlo, thi) with x(t) = u - t*w being
    a closure vertex of the region exactly for t in [tlo, thi].

    Each record solves a square subsystem a_i.x = s_i - t with sides s_i in
    {0, 1}; the feasibility window endpoints are rational and double as
    chamber boundary candidates for the t-dependence.
    """
    jvars, normals, _ = _region_data(p)
    d = len(jvars)
    records = []
    seen_trajectories = set()
    for subset in combinations(range(len(normals)), d):
        rows = [normals[i] for i in subset]
        inv, _det = mat_invert(rows)
        if inv is None:
            continue
        w = tuple(sum(inv[i][j] for j in range(d)) for i in range(d))
        for sides in product((F0, F1), repeat=d):
            u = tuple(sum(inv[i][j] * sides[j] for j in range(d))
                      for i in range(d))
            lo_t, hi_t = F0, F1
            feasible = True
            for nrm in normals:
                alpha = sum(nrm[i] * u[i] for i in range(d))
                slope = F1 - sum(nrm[i] * w[i] for i in range(d))
                if slope == 0:
                    if alpha < 0 or alpha > 1:
                        feasible = False
                        break
                else:
                    t1 = (F0 - alpha) / slope
                    t2 = (F1 - alpha) / slope
                    if t1 > t2:
                        t1, t2 = t2, t1
                    lo_t = max(lo_t, t1)
                    hi_t = min(hi_t, t2)
                    if lo_t > hi_t:
                        feasible = False
                        break
            if feasible and (u, w) not in seen_trajectories:
                seen_trajectories.add((u, w))
                records.append((u, w, lo_t, hi_t))
    return tuple(records)


def _hinted_polytope(p: SetPartition, t: Fraction) -> RationalPolytope:
    """Region polytope with its vertex set precomputed from the trajectories."""
    P = e_polytope(p, t)
    verts = set()
    for u, w, lo_t, hi_t in _parametric_records(p):
        if lo_t <= t <= hi_t:
            verts.add(tuple(ui - t * wi for ui, wi in zip(u, w)))
    register_vertices(P, verts)
    return P


# ---------------------------------------------------------------------------
# engine 1: direct exact integration at fixed t
# ---------------------------------------------------------------------------

def lambda_eval_at(p: SetPartition, gs: Sequence[PiecewisePoly],
                   t: Fraction) -> Fraction:
    """Exact value at t by polytope quadrature.

    Piecewise inputs split the region along the lifted breakpoint
    hyperplanes so that each cell sees a single polynomial per factor.
    """
    gs = [as_piecewise(g) for g in gs]
    if len(gs) != p.n - 1:
        raise ContractError(f"expected {p.n - 1} functions, got {len(gs)}")
    t = Fraction(t)
    if t < 0 or t > 1:
        raise ContractError("t outside [0,1]")
    if p.n == 1:
        return F1
    jvars, normals, factor_normals = _region_data(p)
    if not jvars:  # discrete partition: plain pointwise product
        out = F1
        for g in gs:
            out *= g.eval_at(t)
        return out
    dim = len(jvars)
    multiplier = F1
    live = []  # (g, normal) pairs entering the integrand
    for g, normal in zip(gs, factor_normals):
        if normal is None:
            multiplier *= g.eval_at(t)
        else:
            live.append((g, normal))
    if multiplier == 0:
        return F0
    if all(len(g.pieces) == 1 for g, _ in live):
        P = _hinted_polytope(p, t)
        return multiplier * integrate_factors(
            P, [(g.pieces[0], a, t) for g, a in live])
    # piecewise factors: decompose into cells with one polynomial per factor
    base = [(a, -t, 1 - t) for a in normals]
    cells = [(base, [])]
    for g, normal in live:
        if len(g.pieces) == 1:
            for _, facs in cells:
                facs.append((g.pieces[0], normal))
        else:
            split = []
            for cons, facs in cells:
                for i, piece in enumerate(g.pieces):
                    lo = g.breakpoints[i] - t
                    hi = g.breakpoints[i + 1] - t
                    split.append((cons + [(normal, lo, hi)],
                                  facs + [(piece, normal)]))
            cells = split
    total = F0
    for cons, facs in cells:
        P = RationalPolytope.of(dim, cons)
        total += integrate_factors(P, [(piece, a, t) for piece, a in facs])
    return multiplier * total


# ---------------------------------------------------------------------------
# engine 2: structural rewriting
# ---------------------------------------------------------------------------

def _interval_splits(p: SetPartition, a: int, b: int) -> bool:
    members = set(range(a, b + 1))
    for block in p.blocks:
        s = set(block)
        if s & members and not s <= members:
            return False
    return True


def _apply_rules(p: SetPartition, gs: list,
                 recurse: Callable[[SetPartition, list], Optional[PiecewisePoly]]
                 ) -> tuple[bool, Optional[PiecewisePoly]]:
    """One rewrite step.  Returns (matched, value); value None means a
    sub-computation declined (only possible when recurse can decline)."""
    n = p.n

    # (1) adjacent elements in one block: glue and emit tau(g_k)
    for k in range(1, n):
        if p.same_block(k, k + 1):
            glued = p.restrict(set(range(1, n + 1)) - {k + 1})
            sub = recurse(glued, gs[:k - 1] + gs[k:])
            if sub is None:
                return True, None
            return True, sub.scale(gs[k - 1].tau())

    # (2) wrap-around block through 1 and n: constant value
    if n >= 2 and p.same_block(1, n):
        inner = recurse(p.restrict(range(1, n)), gs[:-1])
        if inner is None:
            return True, None
        return True, const((inner * gs[-1]).tau())

    # (3) a prefix interval that is a union of blocks: factor
    for x in range(1, n):
        if _interval_splits(p, 1, x):
            left = recurse(p.restrict(range(1, x + 1)), gs[:x - 1])
            if left is None:
                return True, None
            right = recurse(p.restrict(range(x + 1, n + 1)), gs[x:])
            if right is None:
                return True, None
            return True, left * gs[x - 1] * right

    # (4) an internal interval that is a union of blocks: collapse inward
    for y in range(1, n - 1):
        for x in range(1, n - y):
            if x + y > n - 1:
                break
            if _interval_splits(p, x + 1, x + y):
                inner = recurse(p.restrict(range(x + 1, x + y + 1)),
                                gs[x:x + y - 1])
                if inner is None:
                    return True, None
                merged = gs[x - 1] * inner * gs[x + y - 1]
                outer = p.restrict(set(range(1, n + 1)) -
                                   set(range(x + 1, x + y + 1)))
                return True, recurse(outer, gs[:x - 1] + [merged] + gs[x + y:])

    # (5) direct closed forms
    if p.is_full():
        c = F1
        for g in gs:
            c *= g.tau()
        return True, const(c)
    if p.is_discrete():
        out = ONE
        for g in gs:
            out = out * g
        return True, out

    return False, None


def lambda_reduce(p: SetPartition,
                  gs: Sequence[PiecewisePoly]) -> Optional[PiecewisePoly]:
    """Closed form by structural rules alone, or None on a crossing core.

    Rules in fixed precedence: glue an adjacent pair of a block, the
    wrap-around block, prefix interval factorization, internal interval
    collapse, then the one-block and all-singleton formulas.  Noncrossing
    partitions always reduce fully.
    """
    gs = [as_piecewise(g) for g in gs]
    n = p.n
    if len(gs) != n - 1:
        raise ContractError(f"expected {n - 1} functions, got {len(gs)}")
    if n == 1:
        return ONE

    def recurse(q, hs):
        return lambda_reduce(q, hs)

    matched, value = _apply_rules(p, list(gs), recurse)
    return value if matched else None


# ---------------------------------------------------------------------------
# reconstruction of the t-dependence
# ---------------------------------------------------------------------------

def lambda_interpolate(p: SetPartition, gs: Sequence[PiecewisePoly],
                       interval=(F0, F1),
                       degree_bound: Optional[int] = None):
    """Polynomial coefficients matching the integral engine on (a, b).

    Samples degree_bound+1 interior rationals, interpolates exactly, then
    demands exact agreement at two fresh points.  Disagreement means the map
    is genuinely piecewise on the interval and the caller must subdivide.
    """
    gs = [as_piecewise(g) for g in gs]
    a, b = Fraction(interval[0]), Fraction(interval[1])
    if not (0 <= a < b <= 1):
        raise ContractError("interval must be inside [0,1] and nondegenerate")
    if degree_bound is None:
        jvars, _, _ = _region_data(p)
        degree_bound = len(jvars) + sum(g.degree() for g in gs)
    if degree_bound < 0:
        raise ContractError("degree bound must be nonnegative")
    m = degree_bound + 2
    width = b - a
    points = []
    for k in range(1, degree_bound + 2):
        tk = a + width * Fraction(k, m)
        points.append((tk, lambda_eval_at(p, gs, tk)))
    poly = interpolate(points)
    for num, den in ((1, 2 * m), (2 * m - 1, 2 * m)):
        tv = a + width * Fraction(num, den)
        if poly_eval(poly, tv) != lambda_eval_at(p, gs, tv):
            raise BreakpointInsideInterval(
                f"interpolant fails verification at t={tv}; "
                f"a breakpoint lies inside ({a}, {b})")
    return poly


@lru_cache(maxsize=None)
def _chamber_candidates(p: SetPartition, cuts: tuple) -> tuple[Fraction, ...]:
    """Sorted t-values where the region's combinatorial shape can change.

    Without cuts these are the feasibility window endpoints of the vertex
    trajectories.  cuts holds extra (normal, offset) hyperplanes lifted from
    breakpoints of piecewise inputs; they join the subsystem enumeration as
    candidate generators without constraining the region.
    """
    candidates = {F0, F1}
    if not cuts:
        for _u, _w, lo_t, hi_t in _parametric_records(p):
            candidates.add(lo_t)
            candidates.add(hi_t)
        return tuple(sorted(c for c in candidates if 0 <= c <= 1))
    jvars, normals, _ = _region_data(p)
    d = len(jvars)
    items = [(a, (F0, F1)) for a in normals]
    items += [(a, (beta,)) for a, beta in cuts]
    for subset in combinations(range(len(items)), d):
        rows = [items[i][0] for i in subset]
        inv, _det = mat_invert(rows)
        if inv is None:
            continue
        w = [sum(inv[i][j] for j in range(d)) for i in range(d)]
        for rhs in product(*(items[i][1] for i in subset)):
            u = [sum(inv[i][j] * rhs[j] for j in range(d)) for i in range(d)]
            lo_t, hi_t = F0, F1
            feasible = True
            for nrm in normals:
                alpha = sum(nrm[i] * u[i] for i in range(d))
                slope = F1 - sum(nrm[i] * w[i] for i in range(d))
                if slope == 0:
                    if alpha < 0 or alpha > 1:
                        feasible = False
                        break
                else:
                    t1 = (F0 - alpha) / slope
                    t2 = (F1 - alpha) / slope
                    if t1 > t2:
                        t1, t2 = t2, t1
                    lo_t = max(lo_t, t1)
                    hi_t = min(hi_t, t2)
                    if lo_t > hi_t:
                        feasible = False
                        break
            if feasible:
                candidates.add(lo_t)
                candidates.add(hi_t)
    return tuple(sorted(c for c in candidates if 0 <= c <= 1))


def _cut_planes(p: SetPartition, gs) -> tuple:
    _, _, factor_normals = _region_data(p)
    cuts = set()
    for g, normal in zip(gs, factor_normals):
        if normal is None:
            continue
        for beta in g.breakpoints[1:-1]:
            cuts.add((normal, beta))
    return tuple(sorted(cuts))


def _interp_segments(p, gs, a, b, bound, depth=0):
    """(end, poly) segments covering (a, b), subdividing on verify failures."""
    try:
        return [(b, lambda_interpolate(p, gs, (a, b), bound))]
    except BreakpointInsideInterval:
        if depth >= 12:
            raise
        mid = (a + b) / 2
        return (_interp_segments(p, gs, a, mid, bound, depth + 1)
                + _interp_segments(p, gs, mid, b, bound, depth + 1))


@lru_cache(maxsize=4096)
def _chamber_triangulation(p: SetPartition, a: Fraction, b: Fraction):
    """Simplices of the fiber as trajectory-index tuples, valid on (a, b).

    Inside a chamber no trajectory enters or leaves a facet, so the face
    lattice is constant and one triangulation (computed at an interior
    probe) covers the whole chamber.  A probe where two trajectories
    momentarily coincide is retried at a different interior point.
    """
    records = _parametric_records(p)
    for num, den in ((1, 2), (5, 11), (7, 13), (3, 7), (11, 17)):
        tm = a + (b - a) * Fraction(num, den)
        pts: dict[tuple, int] = {}
        clash = False
        for i, (u, w, lo_t, hi_t) in enumerate(records):
            if lo_t <= tm <= hi_t:
                pt = tuple(ui - tm * wi for ui, wi in zip(u, w))
                if pt in pts:
                    clash = True
                    break
                pts[pt] = i
        if clash:
            continue
        tagged = [(pt, i) for pt, i in pts.items()]
        _, normals, _ = _region_data(p)
        planes = [(nrm, 1 - tm) for nrm in normals]
        planes += [(tuple(-x for x in nrm), tm) for nrm in normals]
        return tuple(triangulate_tagged(tagged, planes))
    raise RuntimeError(f"no clean probe point found in ({a}, {b}) "
                       f"for {p.to_text()}")


def _fiber_simplex_data(p: SetPartition, id_simplices, t: Fraction):
    """(v0, cols, |det|) records at parameter t for index simplices."""
    records = _parametric_records(p)
    coords: dict[int, tuple] = {}
    den = 1
    for ids in id_simplices:
        for i in ids:
            if i not in coords:
                u, w, _, _ = records[i]
                pt = tuple(ui - t * wi for ui, wi in zip(u, w))
                coords[i] = pt
                for x in pt:
                    den = den * x.denominator // math.gcd(den, x.denominator)
    ipts = {i: tuple(int(x * den) for x in pt) for i, pt in coords.items()}
    out = []
    d = len(next(iter(coords.values()))) if coords else 0
    for ids in id_simplices:
        v0 = coords[ids[0]]
        iv0 = ipts[ids[0]]
        icols = [[ipts[i][k] - iv0[k] for i in ids[1:]] for k in range(d)]
        det = int_det(icols)
        if det == 0:
            continue
        cols = tuple(tuple(coords[i][k] - v0[k] for k in range(d))
                     for i in ids[1:])
        out.append((v0, cols, Fraction(abs(det), den ** d)))
    return out


def _interp_chamber(p: SetPartition, gs: list, a: Fraction, b: Fraction,
                    bound: int):
    """Interpolate one chamber, reusing a single triangulation for all
    samples.  Raises BreakpointInsideInterval if verification fails."""
    _, _, factor_normals = _region_data(p)
    plain = []  # factors with an empty index set: scalar g(t) multipliers
    templates = []  # (coeffs, normal) for the live integrand factors
    for g, normal in zip(gs, factor_normals):
        if normal is None:
            plain.append(g)
        else:
            templates.append((g.pieces[0], normal))
    ids = _chamber_triangulation(p, a, b)
    d = len(_region_data(p)[0])

    def value_at(t):
        mult = F1
        for g in plain:
            mult *= g.eval_at(t)
        if mult == 0:
            return F0
        data = _fiber_simplex_data(p, ids, t)
        return mult * integrate_factors_on_simplices(
            data, d, [(coeffs, nrm, t) for coeffs, nrm in templates])

    m = bound + 2
    width = b - a
    points = []
    for k in range(1, bound + 2):
        tk = a + width * Fraction(k, m)
        points.append((tk, value_at(tk)))
    poly = interpolate(points)
    for num, den in ((1, 2 * m), (2 * m - 1, 2 * m)):
        tv = a + width * Fraction(num, den)
        if poly_eval(poly, tv) != value_at(tv):
            raise BreakpointInsideInterval(
                f"chamber ({a}, {b}) of {p.to_text()} is not polynomial")
    return poly


def _interp_function(p: SetPartition, gs: list) -> PiecewisePoly:
    """Chamber-by-chamber reconstruction of the full map."""
    jvars, _, _ = _region_data(p)
    bound = len(jvars) + sum(g.degree() for g in gs)
    cuts = _cut_planes(p, gs)
    cand = list(_chamber_candidates(p, cuts))
    breakpoints = [cand[0]]
    polys = []
    for a, b in zip(cand, cand[1:]):
        if not cuts:
            try:
                breakpoints.append(b)
                polys.append(_interp_chamber(p, gs, a, b, bound))
                continue
            except BreakpointInsideInterval:
                breakpoints.pop()
        for end, poly in _interp_segments(p, gs, a, b, bound):
            breakpoints.append(end)
            polys.append(poly)
    value = piecewise(breakpoints, polys)
    for i in range(1, len(value.breakpoints) - 1):
        x = value.breakpoints[i]
        if poly_eval(value.pieces[i - 1], x) != poly_eval(value.pieces[i], x):
            # the map is continuous; a jump would expose an engine defect
            raise RuntimeError(f"discontinuity detected at t={x} for "
                               f"{p.to_text()}; this is a bug")
    return value


def _g_list_key(gs) -> str:
    return ";".join(g.canonical_key() for g in gs)


def _split_constants(gs):
    scalar = F1
    core = []
    for g in gs:
        if g.is_constant():
            scalar *= g.constant_value()
            core.append(ONE)
        else:
            core.append(g)
    return scalar, core


def lambda_function(p: SetPartition, gs: Sequence[PiecewisePoly],
                    cache: Optional[LambdaCache] = None) -> PiecewisePoly:
    """The full map as an element of C[0,1], memoized.

    Constant inputs are factored out through multilinearity before the cache
    key is formed.  Structural rules run first; each irreducible crossing
    core that remains is reconstructed by chamber interpolation, so the
    expensive integrals happen only on the small cores and only once.
    """
    gs = [as_piecewise(g) for g in gs]
    n = p.n
    if len(gs) != n - 1:
        raise ContractError(f"expected {n - 1} functions, got {len(gs)}")
    scalar, core = _split_constants(gs)
    if scalar == 0:
        return const(0)
    if n == 1:
        return const(scalar)
    cache = cache if cache is not None else default_cache()
    key = f"{p.to_text()}|{_g_list_key(core)}"
    hit = cache.lookup(key, "fn")
    if hit is not None:
        return hit.scale(scalar)

    value = lambda_reduce(p, core)
    engine = "reduce"
    if value is None:
        engine = "interpolate"

        def recurse(q, hs):
            return lambda_function(q, hs, cache)

        matched, value = _apply_rules(p, core, recurse)
        if not matched:
            value = _interp_function(p, core)
    cache.store(key, "fn", value, engine)
    return value.scale(scalar)


def lambda_point(p: SetPartition, gs: Sequence[PiecewisePoly], t: Fraction,
                 cache: Optional[LambdaCache] = None) -> Fraction:
    """Cached point value; the key carries the evaluation point."""
    gs = [as_piecewise(g) for g in gs]
    t = Fraction(t)
    scalar, core = _split_constants(gs)
    if scalar == 0:
        return F0
    if p.n == 1:
        return scalar
    cache = cache if cache is not None else default_cache()
    key = f"{p.to_text()}|{_g_list_key(core)}|t={t}"
    hit = cache.lookup(key, "pt")
    if hit is not None:
        return hit * scalar
    value = lambda_eval_at(p, core, t)
    cache.store(key, "pt", value, "integrate")
    return value * scalar


def tau_lambda(p: SetPartition, gs: Sequence[PiecewisePoly],
               g_n: PiecewisePoly,
               cache: Optional[LambdaCache] = None) -> Fraction:
    """Exact trace of the map times a final function."""
    g_n = as_piecewise(g_n)
    value = (lambda_function(p, gs, cache) * g_n).tau()
    if CHECK_ROTATION:
        gs = [as_piecewise(g) for g in gs]
        rotated = (lambda_function(p.rotate_left(), list(gs[1:]) + [g_n], cache)
                   * gs[0]).tau()
        assert value == rotated, (p, value, rotated)
    return value
