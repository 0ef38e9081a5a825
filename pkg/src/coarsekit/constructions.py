"""Construction ASTs and their builders.

Every builder returns a :class:`~coarsekit.core.CoarsePresentation` whose probe
``n`` relates x and y exactly when the closed-form level distance is at most n.
For a bornology with chain B_0 ⊆ B_1 ⊆ ... the level of a finite index set D
is the least n with D ⊆ B_n.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Optional

import numpy as np

from .bornology import (
    Abstract,
    BornologyPresentation,
    ChainBase,
    DomainError,
    ExplicitBase,
    FiniteSubsets,
    OracleBacked,
    Powerset,
    ProductOf,
    chain_member,
    has_chain,
    index_set,
    is_finite_subsets,
    restrict_bornology,
)
from .core import (
    BallMap,
    BlockEnt,
    CoarsePresentation,
    Diagonal,
    Entourage,
    FiniteRelation,
    GlueEnt,
    ProductEnt,
    StepEnt,
    SupportEnt,
    UnionEnt,
    UnsupportedPresentation,
    apply,
    bounded_by_probes,
    bounded_sets,
    finite_metric,
    metric_nat,
    restrict_to,
)
from .groundsets import (
    DEFAULT_HORIZON,
    NAT,
    WEDGE_POINT,
    EncodingError,
    Finite,
    GroundSet,
    IndexedUnion,
    Naturals,
    Predicate,
    SetExpr,
    SupportSpace,
    Supports,
    TaggedUnion,
    TupleSpace,
    Verdict,
    finiteness,
)

# ====================================================================== AST


class BalleanExpr:
    """Base class of construction nodes."""


@dataclass(frozen=True)
class MetricNat(BalleanExpr):
    """N with |x - y|, pointed at 0 (a metric ray)."""


@dataclass(frozen=True)
class FiniteMetric(BalleanExpr):
    """{0, ..., n-1} with |x - y|, pointed at 0; n = 2 is the doubleton."""

    n: int = 2


@dataclass(frozen=True)
class Discrete(BalleanExpr):
    """↓B: generated by the blocks (B × B) ∪ Δ."""

    bornology: BornologyPresentation = None


@dataclass(frozen=True)
class Antidiscrete(BalleanExpr):
    """↑B, presented by its blocks plus registered symmetric witnesses."""

    bornology: BornologyPresentation = None
    witnesses: tuple = ()


@dataclass(frozen=True)
class AbstractBallean(BalleanExpr):
    """A ballean known only through its (abstract) bornology of bounded sets."""

    bornology: Abstract = None
    name: str = "X"


@dataclass(frozen=True)
class Product(BalleanExpr):
    factors: tuple = ()


@dataclass(frozen=True)
class Family:
    """Pointed balleans indexed by A: one ``uniform`` member for every index, or
    an explicit ``members`` list matched against a finite A in order."""

    uniform: Optional[BalleanExpr] = None
    members: tuple = ()

    def at(self, i: int) -> BalleanExpr:
        return self.uniform if self.uniform is not None else self.members[i]

    def all_members(self, k: Optional[int]) -> list:
        if self.uniform is not None:
            return [self.uniform]
        if k is not None and k != len(self.members):
            raise ValueError(f"family has {len(self.members)} members, index set has {k}")
        return list(self.members)


def rays() -> Family:
    return Family(MetricNat())


@dataclass(frozen=True)
class BProduct(BalleanExpr):
    bornology: BornologyPresentation = None
    family: Family = None


@dataclass(frozen=True)
class Macrocube(BalleanExpr):
    bornology: BornologyPresentation = None


@dataclass(frozen=True)
class Bouquet(BalleanExpr):
    bornology: BornologyPresentation = None
    family: Family = None


@dataclass(frozen=True)
class Comb(BalleanExpr):
    handle: BalleanExpr = None
    spine_index: SetExpr = None
    family: Family = None


@dataclass(frozen=True)
class Subballean(BalleanExpr):
    parent: BalleanExpr = None
    subset: SetExpr = None


# ====================================================================== bornology levels

def level_fn(B: BornologyPresentation) -> Callable[[list], Optional[int]]:
    """Fast ``points -> least n with points ⊆ B_n`` for chain-presented bornologies."""
    if isinstance(B, Powerset):
        return _with_cost(lambda pts: 0, lambda p: 0)
    if isinstance(B, ExplicitBase) and len(B.members) == 1:
        M = B.members[0]
        return _with_cost(lambda pts: 0 if all(M.contains(p) for p in pts) else None,
                          lambda p: 0 if M.contains(p) else None)
    if isinstance(B, FiniteSubsets):
        tail, carrier = None, B.carrier
    elif isinstance(B, ChainBase):
        tail, carrier = B.tail, B.carrier
    else:
        raise DomainError(f"{B} has no canonical chain")
    g = B.ground

    def rank(p):
        if carrier is None:
            return g.encode(p)
        if not carrier.contains(p):
            return None
        return carrier.index_of(p)

    ranks = {}

    def cost(p):
        # 0 for tail points, None outside the carrier, else the chain rank
        if p not in ranks:
            ranks[p] = 0 if tail is not None and tail.contains(p) else rank(p)
        return ranks[p]

    def level(pts):
        top = 0
        for p in pts:
            r = cost(p)
            if r is None:
                return None
            top = max(top, r)
        return top

    return _with_cost(level, cost)


def _with_cost(level, cost):
    # cost(p): the level of {p} alone (None when p lies in no chain member)
    level.cost = cost
    return level


def _coordinate_pairwise(values_of, cost, base):
    """Window distance matrix for ``max(level of differing indices, max |Δ|)``.

    ``values_of(x)`` maps index -> coordinate for the off-basepoint coordinates.
    Pairs differing at an index of unknown level are unrelated (BIG).
    """
    from .core import BIG

    def pairwise(elems):
        rows = [values_of(x) for x in elems]
        keys = sorted({a for r in rows for a in r}, key=repr)
        N, K = len(rows), len(keys)
        col = {a: j for j, a in enumerate(keys)}
        V = np.full((N, K), base, dtype=np.int64)
        for i, r in enumerate(rows):
            for a, v in r.items():
                V[i, col[a]] = v
        costs = [cost(a) for a in keys]
        outside = np.array([c is None for c in costs], dtype=bool)
        w = np.array([0 if c is None else c for c in costs], dtype=np.int64)
        D = np.zeros((N, N), dtype=np.int64)
        for i in range(N):
            diff = V != V[i]
            lev = np.where(diff, w, 0).max(axis=1, initial=0)
            gap = np.abs(V - V[i]).max(axis=1, initial=0)
            d = np.maximum(lev, gap)
            d[(diff & outside).any(axis=1)] = BIG
            D[i] = d
        return D

    return pairwise


def chain_points(B: BornologyPresentation, n: int) -> Optional[list]:
    """B_n as a list when it is finite."""
    if isinstance(B, ChainBase) and B.tail is not None:
        return None
    if isinstance(B, Powerset):
        return B.ground.elements(B.ground.size - 1) if B.ground.size is not None else None
    if isinstance(B, ExplicitBase):
        M = B.members[0]
        return list(M.elements) if isinstance(M, Finite) else None
    M = chain_member(B, n)
    return list(M.elements)


def _index_count(A: SetExpr) -> Optional[int]:
    return A.count()


# ====================================================================== builders

_BUILD_CACHE: dict = {}


def build(expr: BalleanExpr) -> CoarsePresentation:
    """The coarse presentation of a construction (memoized per expression)."""
    try:
        key = (type(expr), expr)
        hash(key)
    except TypeError:
        key = None
    if key is not None and key in _BUILD_CACHE:
        return _BUILD_CACHE[key]
    X = _build(expr)
    X.expr = expr
    if key is not None:
        _BUILD_CACHE[key] = X
    return X


def _build(expr):
    if isinstance(expr, MetricNat):
        X = metric_nat()
        X.meta["bounded_balls"] = True
        return X
    if isinstance(expr, FiniteMetric):
        X = finite_metric(expr.n)
        X.meta["bounded_balls"] = True
        return X
    if isinstance(expr, Discrete):
        return smallest_compatible(expr.bornology)
    if isinstance(expr, Antidiscrete):
        return largest_presentation(expr.bornology, expr.witnesses)
    if isinstance(expr, AbstractBallean):
        raise UnsupportedPresentation("abstract balleans have no executable presentation")
    if isinstance(expr, Product):
        return product([build(f) for f in expr.factors])
    if isinstance(expr, BProduct):
        return b_product(expr.bornology, expr.family)
    if isinstance(expr, Macrocube):
        return macrocube(expr.bornology)
    if isinstance(expr, Bouquet):
        return bouquet(expr.bornology, expr.family)
    if isinstance(expr, Comb):
        return comb(expr.handle, expr.spine_index, expr.family)
    if isinstance(expr, Subballean):
        return restrict_to(build(expr.parent), expr.subset)
    raise TypeError(f"not a construction: {expr!r}")


def _finite_balls(X: CoarsePresentation) -> bool:
    """Are all bounded sets of X finite (bornology = finite subsets)?"""
    B = X.bornology
    return isinstance(B, FiniteSubsets) or (X.ground.size is not None)


def product(factors: list) -> CoarsePresentation:
    """Cartesian product; probe n is the product of the factors' probes n."""
    if not factors:
        raise ValueError("product needs at least one factor")
    ground = TupleSpace(tuple(f.ground for f in factors))

    def dist(x, y):
        worst = 0
        for f, a, b in zip(factors, x, y):
            d = f.distance(a, b, limit=1 << 62) if a != b else 0
            if d is None:
                return None
            worst = max(worst, d)
        return worst

    born = None
    if len(factors) == 2 and all(f.bornology is not None for f in factors):
        born = ProductOf(factors[0].bornology, factors[1].bornology)
    elif all(_finite_balls(f) for f in factors):
        born = FiniteSubsets(ground)
    X = CoarsePresentation(
        ground, lambda n: ProductEnt(tuple(f.entourage(n) for f in factors)), "product",
        cofinal=all(f.cofinal for f in factors), basepoint=tuple(f.basepoint for f in factors),
        bornology=born, distance_fn=dist,
        connected=all(f.connected is True for f in factors) or None,
    )
    X.meta["factors"] = tuple(factors)
    return X


def _coordinate_maps(comps, A, uniform):
    """Per-index component presentation lookup."""
    if uniform:
        return lambda a: comps[0]
    table = {A.nth(i): c for i, c in enumerate(comps)}
    return lambda a: table[a]


def b_product(B: BornologyPresentation, family: Family) -> CoarsePresentation:
    """Support-restricted product over the index bornology B.

    Points are written by their off-basepoint coordinates. Probe n relates x and
    y when the coordinates where they differ form a set of level <= n and each
    differs by at most n; coordinates outside B_n must agree.
    """
    if isinstance(B, Abstract):
        raise UnsupportedPresentation("B-products over abstract bornologies are symbolic only")
    if not has_chain(B):
        raise UnsupportedPresentation(f"{B} has no chain presentation")
    A = index_set(B)
    k = _index_count(A)
    uniform = family.uniform is not None
    comps = [build(m) for m in family.all_members(k)]
    comp_of = _coordinate_maps(comps, A, uniform)
    L = level_fn(B)
    fast = base = None
    if uniform:
        c = comps[0]
        # one closed-form coordinate metric: skip the per-coordinate lookups
        fast, base = c.distance_fn, c.basepoint
        ground = SupportSpace(A, c.ground, c.basepoint)

        def coords(x):
            return dict(x)
    else:
        ground = TupleSpace(tuple(c.ground for c in comps))
        idx = [A.nth(i) for i in range(k)]

        def coords(x):
            return {a: v for a, v, c in zip(idx, x, comps) if v != c.basepoint}

    seen = {}

    def coords_of(x):
        if x not in seen:
            seen[x] = coords(x)
        return seen[x]

    def dist(x, y):
        if x == y:
            return 0
        cx, cy = coords_of(x), coords_of(y)
        if fast is not None:
            diff = [a for a in cx.keys() | cy.keys() if cx.get(a, base) != cy.get(a, base)]
            lev = L(diff)
            if lev is None:
                return None
            ds = [fast(cx.get(a, base), cy.get(a, base)) for a in diff]
            return None if None in ds else max([lev] + ds)
        diff = [a for a in set(cx) | set(cy) if cx.get(a, comp_of(a).basepoint) != cy.get(a, comp_of(a).basepoint)]
        lev = L(diff)
        if lev is None:
            return None
        worst = lev
        for a in diff:
            comp = comp_of(a)
            d = comp.distance(cx.get(a, comp.basepoint), cy.get(a, comp.basepoint), limit=1 << 62)
            if d is None:
                return None
            worst = max(worst, d)
        return worst

    carrier = None
    if isinstance(B, ExplicitBase):
        M = B.members[0]
        carrier = Predicate(ground, lambda x: all(M.contains(a) for a in coords(x)), f"supp ⊆ {M}")
    fin_index = is_finite_subsets(B)
    cofinal = all(c.cofinal for c in comps) and (k is not None or fin_index.is_true) or \
        all(c.ground.size is not None for c in comps)
    born = FiniteSubsets(ground) if fin_index.is_true and all(_finite_balls(c) for c in comps) else None
    basepoint = () if uniform else tuple(c.basepoint for c in comps)
    X = CoarsePresentation(
        ground, lambda n: SupportEnt(ground, dist, n, None, carrier, "support"), "b-product",
        cofinal=cofinal, carrier=carrier, basepoint=basepoint, bornology=born, distance_fn=dist,
    )
    X.meta.update(index=A, index_bornology=B, components=tuple(comps), uniform=uniform, level=L, coords=coords)
    if uniform and comps[0].origin in ("metric-nat", "finite-metric"):
        X.meta["pairwise"] = _coordinate_pairwise(coords, L.cost, base)
    if born is None:
        X.bornology = bounded_sets_oracle(X)
    return X


def bounded_sets_oracle(X: CoarsePresentation) -> OracleBacked:
    return OracleBacked(X.ground, lambda S, h=DEFAULT_HORIZON: bounded_by_probes(X, S, h), f"bounded({X.origin})",
                        X.carrier)


def macrocube(B: BornologyPresentation) -> CoarsePresentation:
    """The B-product of doubletons {0, 1}; points are their supports."""
    if isinstance(B, Abstract):
        raise UnsupportedPresentation("macrocubes over abstract bornologies are symbolic only")
    A = index_set(B)
    ground = Supports(A)
    L = level_fn(B)

    def dist(x, y):
        if x == y:
            return 0
        lev = L(sorted(x ^ y, key=A.ground.encode))
        return None if lev is None else max(lev, 1)

    fin_index = is_finite_subsets(B)
    born = FiniteSubsets(ground) if fin_index.is_true else None
    X = CoarsePresentation(
        ground, lambda n: SupportEnt(ground, dist, n, None, None, "cube"), "macrocube",
        cofinal=True, basepoint=frozenset(), bornology=born, distance_fn=dist,
    )
    X.meta.update(index=A, index_bornology=B, level=L)
    # a point's coordinates are 1 on its support and 0 elsewhere
    X.meta["pairwise"] = _coordinate_pairwise(lambda x: dict.fromkeys(x, 1), L.cost, 0)
    if born is None:
        X.bornology = bounded_sets_oracle(X)
    return X


def _bouquet_parts(B, family):
    A = index_set(B)
    k = _index_count(A)
    uniform = family.uniform is not None
    comps = [build(m) for m in family.all_members(k)]
    return A, k, uniform, comps, _coordinate_maps(comps, A, uniform)


def _spine_distance(L, comp_of, x, y):
    """Level distance in the wedge of spines; WEDGE_POINT is the glued basepoint."""
    if x == y:
        return 0
    if x == WEDGE_POINT:
        x, y = y, x
    if y == WEDGE_POINT:
        a, s = x
        c = comp_of(a)
        lev, d = L([a]), c.distance(c.basepoint, s, limit=1 << 62)
        return None if lev is None or d is None else max(lev, d)
    (a, s), (b, t) = x, y
    if a == b:
        c = comp_of(a)
        lev, d = L([a]), c.distance(s, t, limit=1 << 62)
        return None if lev is None or d is None else max(lev, d)
    ca, cb = comp_of(a), comp_of(b)
    lev = L([a, b])
    da, db = ca.distance(ca.basepoint, s, limit=1 << 62), cb.distance(cb.basepoint, t, limit=1 << 62)
    if lev is None or da is None or db is None:
        return None
    return max(lev, da, db)


def bouquet(B: BornologyPresentation, family: Family) -> CoarsePresentation:
    """Support-<=1 part of the B-product with all basepoints glued into ``e``."""
    if isinstance(B, Abstract):
        raise UnsupportedPresentation("bouquets over abstract bornologies are symbolic only")
    if not has_chain(B):
        raise UnsupportedPresentation(f"{B} has no chain presentation")
    A, k, uniform, comps, comp_of = _bouquet_parts(B, family)
    L = level_fn(B)
    if uniform:
        ground = IndexedUnion(A, comps[0].ground, comps[0].basepoint, wedge=True)
    else:
        ground = TaggedUnion(tuple((A.nth(i), c.ground) for i, c in enumerate(comps)),
                             tuple(c.basepoint for c in comps))

    def wrap(a, s):
        return WEDGE_POINT if s == comp_of(a).basepoint else (a, s)

    def dist(x, y):
        return _spine_distance(L, comp_of, x, y)

    def neighbors(x, n):
        spines = chain_points(B, n)
        if spines is None:
            return None
        spines = [a for a in spines if A.contains(a)]
        out = []
        if x == WEDGE_POINT:
            own = None
        else:
            own, s = x
            lst = comp_of(own).ball_list(n, s)
            if lst is None:
                return None
            out.extend(wrap(own, t) for t in lst)
        for a in spines:
            c = comp_of(a)
            lst = c.ball_list(n, c.basepoint)
            if lst is None:
                return None
            out.extend(wrap(a, t) for t in lst)
        return out

    fin_index = is_finite_subsets(B)
    cofinal = all(c.ground.size is not None for c in comps) or (
        all(c.cofinal for c in comps) and (k is not None or fin_index.is_true))
    born = FiniteSubsets(ground) if fin_index.is_true and all(_finite_balls(c) for c in comps) else None
    X = CoarsePresentation(
        ground, lambda n: GlueEnt(ground, dist, n, neighbors, None, "wedge"), "bouquet",
        cofinal=cofinal, basepoint=WEDGE_POINT, bornology=born, distance_fn=dist,
    )
    X.meta.update(index=A, index_bornology=B, components=tuple(comps), comp_of=comp_of, level=L, uniform=uniform)
    if born is None:
        X.bornology = bounded_sets_oracle(X)
    return X


def comb(handle: BalleanExpr, A: SetExpr, family: Family) -> CoarsePresentation:
    """Handle points ("handle", x) and teeth ("tooth", (α, s)) for α in A, s off the basepoint.

    The structure is the restriction of handle × bouquet, where the bouquet's
    index bornology is the handle bornology induced on A.
    """
    H = build(handle)
    if A.ground != H.ground:
        raise EncodingError("spine index set must live in the handle ground")
    BH = bounded_sets(H)
    induced = restrict_bornology(BH, A)
    k = _index_count(A)
    uniform = family.uniform is not None
    comps = [build(m) for m in family.all_members(k)]
    comp_of = _coordinate_maps(comps, A, uniform)
    if not uniform:
        raise UnsupportedPresentation("combs take a uniform spine family")
    c0 = comps[0]
    teeth = IndexedUnion(A, c0.ground, c0.basepoint, wedge=False)
    ground = TaggedUnion((("handle", H.ground), ("tooth", teeth)))
    L = level_fn(induced)

    def split(p):
        """(handle coordinate, bouquet point)."""
        tag, v = p
        if tag == "handle":
            return v, WEDGE_POINT
        return v[0], v

    def dist(x, y):
        if x == y:
            return 0
        hx, bx = split(x)
        hy, by = split(y)
        dh = H.distance(hx, hy, limit=1 << 62) if hx != hy else 0
        db = _spine_distance(L, comp_of, bx, by)
        if dh is None or db is None:
            return None
        return max(dh, db)

    def neighbors(x, n):
        hx, bx = split(x)
        near = H.ball_list(n, hx)
        if near is None:
            return None
        out = [("handle", y) for y in near]
        base_ball = c0.ball_list(n, c0.basepoint)
        for a in near:
            if A.contains(a):
                out.extend(("tooth", (a, t)) for t in base_ball if t != c0.basepoint)
        if bx != WEDGE_POINT:
            a, s = bx
            own = c0.ball_list(n, s)
            out.extend(("tooth", (a, t)) if t != c0.basepoint else ("handle", a) for t in own)
        return out

    fin_ok = isinstance(BH, FiniteSubsets) and _finite_balls(c0)
    born = FiniteSubsets(ground) if fin_ok else None
    cofinal = H.cofinal and (c0.ground.size is not None or (c0.cofinal and is_finite_subsets(induced).is_true))
    X = CoarsePresentation(
        ground, lambda n: GlueEnt(ground, dist, n, neighbors, None, "comb"), "comb",
        cofinal=cofinal, basepoint=("handle", H.basepoint), bornology=born, distance_fn=dist,
    )
    X.meta.update(handle=H, spine_index=A, index_bornology=induced, components=(c0,), comp_of=comp_of,
                  level=L, pointed=False, split=split)
    if born is None:
        X.bornology = bounded_sets_oracle(X)
    return X


def comb_product_view(X: CoarsePresentation):
    """(handle × bouquet presentation, embedding of comb points) for restriction checks."""
    H = X.meta["handle"]
    comps = X.meta["components"]
    bq = bouquet(X.meta["index_bornology"], Family(comps[0].expr if comps[0].expr is not None else MetricNat()))
    P = product([H, bq])
    split = X.meta["split"]
    return P, lambda p: split(p)


# ====================================================================== ↓B and ↑B

def smallest_compatible(B: BornologyPresentation) -> CoarsePresentation:
    """↓B: probe n is the block (B_n × B_n) ∪ Δ."""
    if isinstance(B, Abstract):
        raise UnsupportedPresentation("↓ of an abstract bornology is symbolic only")
    if not has_chain(B):
        raise UnsupportedPresentation(f"{B} has no chain presentation")
    L = level_fn(B)
    carrier = getattr(B, "carrier", None)

    @lru_cache(maxsize=None)
    def probe(n):
        return BlockEnt(chain_member(B, n))

    def dist(x, y):
        return 0 if x == y else L([x, y])

    X = CoarsePresentation(
        B.ground, probe, "down", cofinal=True, carrier=carrier, bornology=B, distance_fn=dist,
        basepoint=B.points(0)[0],
    )
    X.meta.update(index_bornology=B, level=L)
    return X


def graph_relation(fn: Callable[[int], int], inverse: Callable[[int], list], name: str,
                   mask_image=None) -> BallMap:
    """Symmetrized graph {(n, f(n))} ∪ inverse ∪ Δ on N.

    ``mask_image`` maps a boolean mask over 0..h to the mask of its image (same length).
    """
    return BallMap(NAT, lambda x: [fn(x)] + list(inverse(x)), None, name, True, mask_image)


def _doubling_mask(m):
    out = np.zeros_like(m)
    idx = np.flatnonzero(m)
    fwd = 2 * idx
    out[fwd[fwd < len(m)]] = True
    out[idx[idx % 2 == 0] // 2] = True
    return out


def doubling_relation() -> BallMap:
    return graph_relation(lambda n: 2 * n, lambda x: [x // 2] if x % 2 == 0 else [], "n->2n", _doubling_mask)


def shift_relation(k: int = 2) -> BallMap:
    if k < 1:
        raise ValueError("shift must be positive")

    def image(m):
        out = np.zeros_like(m)
        out[k:] |= m[:-k]
        out[:-k] |= m[k:]
        return out

    return graph_relation(lambda n: n + k, lambda x: [x - k] if x >= k else [], f"n->n+{k}", image)


def largest_membership(B: BornologyPresentation, E: Entourage, horizon: int = DEFAULT_HORIZON,
                       samples: int = 8) -> Verdict:
    """Is E in ↑B, i.e. E = E⁻¹ and E[B] ∈ B for the base members B (sampled)?"""
    if isinstance(E, FiniteRelation):
        for a, b in sorted(E.pairs):
            if (b, a) not in E.pairs:
                return Verdict.false({"pair": (a, b), "missing": (b, a)}, note="E differs from its inverse")
    elif not E.symmetric:
        for x in B.points(min(horizon, 256)):
            lst = E.ball_list(x)
            if lst is None:
                return Verdict.unknown(horizon, note="symmetry not checkable")
            for y in lst:
                if not E.related(y, x):
                    return Verdict.false({"pair": (x, y), "missing": (y, x)}, note="E differs from its inverse")
    base = B.sample_base(samples)
    base += [Finite((x,), B.ground) for x in B.points(samples)]
    undecided = False
    for Bm in base:
        img = apply(E, Bm)
        v = B.member(img, horizon)
        if v.is_false:
            return Verdict.false({"base": str(Bm), "image": str(img)}, note="E[B] is not bounded")
        undecided |= v.is_unknown
    if undecided:
        return Verdict.unknown(horizon)
    return Verdict.true(note=f"symmetric; images of {len(base)} sampled base members are bounded")


def largest_presentation(B: BornologyPresentation, witnesses=()) -> CoarsePresentation:
    """↑B through a cofinal sample: probe n = (block_n ∪ registered witnesses)^n."""
    if isinstance(B, Abstract):
        raise UnsupportedPresentation("↑ of an abstract bornology is symbolic only")
    if not has_chain(B):
        raise UnsupportedPresentation(f"{B} has no chain presentation")
    for W in witnesses:
        v = largest_membership(B, W)
        if v.is_false:
            raise ValueError(f"registered witness {W!r} is not in ↑B: {v}")
    carrier = getattr(B, "carrier", None)

    @lru_cache(maxsize=None)
    def probe(n):
        block = BlockEnt(chain_member(B, n))
        if not witnesses or n == 0:
            return block
        return StepEnt(UnionEnt((block,) + tuple(witnesses)), n)

    L = level_fn(B)
    dist = None if witnesses else (lambda x, y: 0 if x == y else L([x, y]))
    X = CoarsePresentation(
        B.ground, probe, "up", cofinal=False, carrier=carrier, bornology=B, distance_fn=dist,
        basepoint=B.points(0)[0],
    )
    X.meta.update(index_bornology=B, witnesses=tuple(witnesses), level=L)
    return X


# ====================================================================== diagonal witness

def diagonal_witness(X: CoarsePresentation, probes: int = 16) -> Optional[list]:
    """Pairs showing the probe chain is not a base, by diagonalizing over an infinite
    member T of the index bornology.

    For the n-th index α_n in T, the entourage with support T and radius n+1 at
    α_n relates the basepoint to the point moved n+1 away at α_n; the returned
    list holds, per n, that pair together with its probe distance (> n).
    Returns None when the index bornology has no infinite member to diagonalize
    over, or the factors are bounded.
    """
    B = X.meta.get("index_bornology")
    if B is None or X.origin not in ("b-product", "bouquet"):
        return None
    tail = getattr(B, "tail", None)
    if tail is None or not finiteness(tail).is_false:
        return None
    comps = X.meta["components"]
    if any(c.ground.size is not None for c in comps):
        return None
    out = []
    for n in range(probes):
        a = tail.nth(n)
        comp = comps[0] if X.meta["uniform"] else X.meta["comp_of"](a)
        s = _point_at_distance(comp, n + 1)
        if X.origin == "b-product":
            y = ((a, s),) if X.meta["uniform"] else None
        else:
            y = (a, s)
        if y is None:
            return None
        d = X.distance(X.basepoint, y, limit=1 << 62)
        if d is None or d <= n:
            return None
        out.append({"n": n, "index": a, "pair": (X.basepoint, y), "probe_distance": d})
    return out


def _point_at_distance(comp: CoarsePresentation, r: int):
    """A point at level distance exactly r from the basepoint (rays: r itself)."""
    for x in comp.window_elements(4 * r + 8):
        if comp.distance(comp.basepoint, x, limit=1 << 62) == r:
            return x
    raise DomainError("factor has no point at the requested distance")
