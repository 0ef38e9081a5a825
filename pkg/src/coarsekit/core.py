"""Entourages, coarse-structure presentations and the basic predicates on them.

Composition convention, used everywhere: ``(E ∘ F)[x] = F[E[x]]``, i.e. the
relation {(x, y) : ∃z (x, z) ∈ E, (z, y) ∈ F}.

A :class:`CoarsePresentation` exposes its base as a directed chain of *probe*
entourages ``E_0 ⊆ E_1 ⊆ ...``. When ``cofinal`` is set the chain is a base of
the structure (a countable base); otherwise the probes only sample it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Optional

import numpy as np

from . import kernels
from .bornology import DomainError
from .groundsets import (
    DEFAULT_HORIZON,
    NAT,
    Complement,
    EncodingError,
    EventuallyPeriodic,
    Finite,
    FinitePoints,
    GroundMismatch,
    GroundSet,
    Naturals,
    Predicate,
    Rectangle,
    SetExpr,
    TupleSpace,
    Union,
    Verdict,
    combine,
    exact_form,
    finite,
    finiteness,
    full,
    is_empty,
    is_subset,
    normalize,
)

BIG = 1 << 60
DEFAULT_RADII = (0, 1, 2, 4, 8, 16)
SLOW_WINDOW_CAP = 1024


class UnsupportedPresentation(ValueError):
    """The operation needs information this entourage presentation lacks."""


# ====================================================================== entourages

class Entourage:
    """A reflexive relation given by its balls."""

    ground: GroundSet

    def ball_list(self, x) -> Optional[list]:
        """The ball as a finite list when that is cheap, else None."""
        return None

    def ball(self, x) -> SetExpr:
        lst = self.ball_list(x)
        if lst is None:
            raise UnsupportedPresentation(f"{type(self).__name__} has no ball presentation")
        return Finite(tuple(lst), self.ground)

    def related(self, x, y) -> bool:
        lst = self.ball_list(x)
        if lst is not None:
            return y in lst
        return self.ball(x).contains(y)

    @property
    def symmetric(self) -> bool:
        return False


@dataclass(frozen=True)
class Diagonal(Entourage):
    ground: GroundSet = NAT

    def ball_list(self, x):
        self.ground.encode(x)
        return [x]

    @property
    def symmetric(self):
        return True


@dataclass(frozen=True)
class MetricRadius(Entourage):
    """{(x, y) : |x - y| <= r} on N or on a finite initial segment."""

    r: int = 0
    ground: GroundSet = NAT

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("radius must be non-negative")
        if not isinstance(self.ground, (Naturals, FinitePoints)):
            raise GroundMismatch("MetricRadius lives on N or FinitePoints")

    def _hi(self, x):
        top = x + self.r
        if self.ground.size is not None:
            top = min(top, self.ground.size - 1)
        return top

    def ball_list(self, x):
        self.ground.encode(x)
        return list(range(max(0, x - self.r), self._hi(x) + 1))

    def related(self, x, y):
        return abs(x - y) <= self.r

    @property
    def symmetric(self):
        return True


@dataclass(frozen=True)
class FiniteRelation(Entourage):
    """Finitely many pairs, implicitly together with the diagonal."""

    pairs: frozenset = frozenset()
    ground: GroundSet = NAT

    def __post_init__(self):
        ps = frozenset((a, b) for a, b in self.pairs if a != b)
        for a, b in ps:
            self.ground.encode(a)
            self.ground.encode(b)
        object.__setattr__(self, "pairs", ps)
        succ = {}
        for a, b in sorted(ps, key=lambda p: (self.ground.encode(p[0]), self.ground.encode(p[1]))):
            succ.setdefault(a, []).append(b)
        object.__setattr__(self, "_succ", succ)

    def ball_list(self, x):
        self.ground.encode(x)
        return [x] + list(self._succ.get(x, ()))

    def related(self, x, y):
        return x == y or (x, y) in self.pairs

    @property
    def symmetric(self):
        return all((b, a) in self.pairs for a, b in self.pairs)

    def as_pairs(self, n=None):
        """All pairs including the diagonal (finite grounds only)."""
        size = self.ground.size if n is None else n
        return frozenset(self.pairs) | {(i, i) for i in range(size)}


@dataclass(frozen=True, eq=False)
class BallMap(Entourage):
    """Balls given by a function; ``inverse`` optionally gives the transposed balls."""

    ground: GroundSet = NAT
    fn: Callable[[Any], Any] = None
    inverse_fn: Optional[Callable[[Any], Any]] = None
    name: str = "ballmap"
    is_symmetric: bool = False
    mask_image: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def _as_list(self, val, x):
        if isinstance(val, SetExpr):
            return None
        out = [x] + [y for y in val if y != x]
        return out

    def ball_list(self, x):
        self.ground.encode(x)
        return self._as_list(self.fn(x), x)

    def ball(self, x):
        val = self.fn(x)
        if isinstance(val, SetExpr):
            return Union((val, Finite((x,), self.ground)))
        return Finite(tuple(self._as_list(val, x)), self.ground)

    @property
    def symmetric(self):
        return self.is_symmetric

    def __repr__(self):
        return f"BallMap({self.name})"


@dataclass(frozen=True)
class ProductEnt(Entourage):
    """Componentwise entourage on a TupleSpace; balls are rectangles."""

    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def ground(self):
        return TupleSpace(tuple(c.ground for c in self.components))

    def ball_list(self, x):
        lists = [c.ball_list(v) for c, v in zip(self.components, x)]
        if any(l is None for l in lists):
            return None
        return list(itertools.product(*lists))

    def ball(self, x):
        return Rectangle(tuple(c.ball(v) for c, v in zip(self.components, x)))

    def related(self, x, y):
        return all(c.related(a, b) for c, a, b in zip(self.components, x, y))

    @property
    def symmetric(self):
        return all(c.symmetric for c in self.components)


@dataclass(frozen=True)
class BlockEnt(Entourage):
    """(B × B) ∪ Δ for one block B."""

    block: SetExpr = None

    @property
    def ground(self):
        return self.block.ground

    def ball(self, x):
        if self.block.contains(x):
            return self.block
        return Finite((x,), self.ground)

    def ball_list(self, x):
        if self.block.contains(x):
            if isinstance(self.block, Finite):
                return list(self.block.elements)
            return None
        return [x]

    def related(self, x, y):
        return x == y or (self.block.contains(x) and self.block.contains(y))

    @property
    def symmetric(self):
        return True


@dataclass(frozen=True)
class UnionEnt(Entourage):
    parts: tuple = ()

    @property
    def ground(self):
        return self.parts[0].ground

    def ball_list(self, x):
        out = {}
        for p in self.parts:
            lst = p.ball_list(x)
            if lst is None:
                return None
            for y in lst:
                out[y] = None
        return list(out)

    def ball(self, x):
        lst = self.ball_list(x)
        if lst is not None:
            return Finite(tuple(lst), self.ground)
        return Union(tuple(p.ball(x) for p in self.parts))

    def related(self, x, y):
        return any(p.related(x, y) for p in self.parts)

    @property
    def symmetric(self):
        return all(p.symmetric for p in self.parts)


@dataclass(frozen=True)
class Composite(Entourage):
    """E ∘ F with balls F[E[x]]."""

    first: Entourage = None
    second: Entourage = None

    @property
    def ground(self):
        return self.first.ground

    def ball_list(self, x):
        inner = self.first.ball_list(x)
        if inner is None:
            return None
        out = {}
        for z in inner:
            lst = self.second.ball_list(z)
            if lst is None:
                return None
            for y in lst:
                out[y] = None
        return list(out)

    def ball(self, x):
        lst = self.ball_list(x)
        if lst is not None:
            return Finite(tuple(lst), self.ground)
        return apply(self.second, self.first.ball(x))


@dataclass(frozen=True)
class Restricted(Entourage):
    """E ∩ (Y × Y); balls outside Y are just the centre."""

    inner: Entourage = None
    carrier: SetExpr = None

    @property
    def ground(self):
        return self.inner.ground

    def ball_list(self, x):
        if not self.carrier.contains(x):
            return [x]
        lst = self.inner.ball_list(x)
        if lst is None:
            return None
        return [y for y in lst if self.carrier.contains(y)]

    def ball(self, x):
        lst = self.ball_list(x)
        if lst is not None:
            return Finite(tuple(lst), self.ground)
        from .groundsets import Intersection

        return Intersection((self.inner.ball(x), self.carrier))

    def related(self, x, y):
        if x == y:
            return True
        return self.carrier.contains(x) and self.carrier.contains(y) and self.inner.related(x, y)

    @property
    def symmetric(self):
        return self.inner.symmetric


@dataclass(frozen=True, eq=False)
class StepEnt(Entourage):
    """n-fold composition of a symmetric one-step relation (generated structures)."""

    step: Entourage = None
    n: int = 0

    @property
    def ground(self):
        return self.step.ground

    def ball_list(self, x):
        seen = {x: None}
        frontier = [x]
        for _ in range(self.n):
            nxt = []
            for z in frontier:
                lst = self.step.ball_list(z)
                if lst is None:
                    return None
                for y in lst:
                    if y not in seen:
                        seen[y] = None
                        nxt.append(y)
            frontier = nxt
            if not frontier:
                break
        return list(seen)

    def ball(self, x):
        lst = self.ball_list(x)
        if lst is not None:
            return Finite(tuple(lst), self.ground)
        g = self.ground
        if isinstance(g, Naturals):
            cache = {}

            def nat_lister(h):
                if h not in cache:
                    # search a wider range so that paths leaving the window are kept
                    m = _step_mask(self.step, x, self.n, 2 * h + 2)
                    cache[h] = [int(i) for i in np.flatnonzero(m[: h + 1])]
                return cache[h]

            def member(y):
                return y in set(nat_lister(max(DEFAULT_HORIZON, y)))

            return Predicate(g, member, f"step{self.n}[{x!r}]", nat_lister)

        def lister(h):
            seen = {x: None}
            frontier = [x]
            for _ in range(self.n):
                nxt = []
                for z in frontier:
                    zl = self.step.ball_list(z)
                    for y in zl if zl is not None else self.step.ball(z).enumerate(h):
                        if y not in seen and g.encode(y) <= h:
                            seen[y] = None
                            nxt.append(y)
                frontier = nxt
            return sorted(seen, key=g.encode)

        return Predicate(g, lambda y: y in lister(max(DEFAULT_HORIZON, g.encode(y))), f"step{self.n}[{x!r}]", lister)

    def related(self, x, y):
        lst = self.ball_list(x)
        if lst is not None:
            return y in lst
        return self.ball(x).contains(y)

    @property
    def symmetric(self):
        return self.step.symmetric


@lru_cache(maxsize=256)
def _set_mask(S: SetExpr, h: int) -> np.ndarray:
    return S.mask(h)


def _image_mask(E: Entourage, m: np.ndarray) -> np.ndarray:
    """E[S] on N as a mask over 0..len(m)-1 (points beyond are dropped)."""
    h = len(m) - 1
    if isinstance(E, Diagonal):
        return m
    if isinstance(E, UnionEnt):
        out = m.copy()
        for p in E.parts:
            out |= _image_mask(p, m)
        return out
    if isinstance(E, BlockEnt):
        bm = _set_mask(E.block, h)
        return m | bm if (m & bm).any() else m
    if isinstance(E, MetricRadius):
        return kernels.distance_transform(m) <= E.r
    if isinstance(E, BallMap) and E.mask_image is not None:
        return m | E.mask_image(m)
    out = m.copy()
    for x in np.flatnonzero(m):
        lst = E.ball_list(int(x))
        if lst is None:
            lst = E.ball(int(x)).enumerate(h)
        out[[y for y in lst if y <= h]] = True
    return out


def _step_mask(step: Entourage, x: int, n: int, h: int) -> np.ndarray:
    m = np.zeros(h + 1, dtype=bool)
    if x > h:
        return m
    m[x] = True
    for _ in range(n):
        nxt = _image_mask(step, m)
        if (nxt == m).all():
            break
        m = nxt
    return m


@dataclass(frozen=True, eq=False)
class DistanceEnt(Entourage):
    """{(x, y) : dist(x, y) <= n} for a presentation with a closed-form level distance.

    ``neighbors(x, n)`` may list a finite superset of the ball; otherwise balls
    are predicates.
    """

    ground: GroundSet = NAT
    dist: Callable[[Any, Any], Optional[int]] = None
    n: int = 0
    neighbors: Optional[Callable[[Any, int], Optional[list]]] = None
    carrier: Optional[SetExpr] = None
    label: str = "dist"

    def related(self, x, y):
        if x == y:
            return True
        d = self.dist(x, y)
        return d is not None and d <= self.n

    def ball_list(self, x):
        if self.neighbors is None:
            return None
        cand = self.neighbors(x, self.n)
        if cand is None:
            return None
        out = {x: None}
        for y in cand:
            if y not in out and self.related(x, y):
                out[y] = None
        return list(out)

    def ball(self, x):
        lst = self.ball_list(x)
        if lst is not None:
            return Finite(tuple(lst), self.ground)
        g = self.ground

        def lister(h):
            pts = self.carrier.enumerate(h) if self.carrier is not None else g.elements(h)
            return [y for y in pts if self.related(x, y)]

        return Predicate(g, lambda y: self.related(x, y), f"{self.label}_{self.n}[{x!r}]", lister)

    @property
    def symmetric(self):
        return True

    def __repr__(self):
        return f"{self.label}({self.n})"


class SupportEnt(DistanceEnt):
    """B-product entourage: coordinates outside B_n agree, coordinates in B_n within radius n."""


class GlueEnt(DistanceEnt):
    """Entourage on a wedge-type carrier (bouquets, combs)."""


# ====================================================================== algebra

def _same_ground(E, F):
    if E.ground != F.ground:
        raise GroundMismatch(f"{E.ground} vs {F.ground}")


def compose(E: Entourage, F: Entourage) -> Entourage:
    """E ∘ F; the ball at x is F[E[x]]."""
    _same_ground(E, F)
    if isinstance(E, Diagonal):
        return F
    if isinstance(F, Diagonal):
        return E
    if isinstance(E, MetricRadius) and isinstance(F, MetricRadius):
        return MetricRadius(E.r + F.r, E.ground)
    if isinstance(E, FiniteRelation) and isinstance(F, FiniteRelation):
        pairs = set()
        for x, z in E.pairs | {(b, b) for _, b in E.pairs} | {(a, a) for a, _ in F.pairs}:
            pairs.add((x, z))
            for a, y in F.pairs:
                if a == z:
                    pairs.add((x, y))
        return FiniteRelation(frozenset(pairs), E.ground)
    return Composite(E, F)


def invert(E: Entourage) -> Entourage:
    """E^{-1}; raises :class:`UnsupportedPresentation` when no inverse is computable."""
    if isinstance(E, (Diagonal, MetricRadius, BlockEnt)):
        return E
    if isinstance(E, FiniteRelation):
        return FiniteRelation(frozenset((b, a) for a, b in E.pairs), E.ground)
    if isinstance(E, ProductEnt):
        return ProductEnt(tuple(invert(c) for c in E.components))
    if isinstance(E, UnionEnt):
        return UnionEnt(tuple(invert(p) for p in E.parts))
    if isinstance(E, Composite):
        return compose(invert(E.second), invert(E.first))
    if isinstance(E, Restricted):
        return Restricted(invert(E.inner), E.carrier)
    if isinstance(E, BallMap):
        if E.is_symmetric:
            return E
        if E.inverse_fn is None:
            raise UnsupportedPresentation(f"{E.name} has no computable inverse image; bound the search explicitly")
        return BallMap(E.ground, E.inverse_fn, E.fn, E.name + "^-1")
    if E.symmetric:
        return E
    raise UnsupportedPresentation(f"cannot invert {type(E).__name__}")


def apply(E: Entourage, S: SetExpr) -> SetExpr:
    """E[S], the union of the balls centred in S."""
    if E.ground != S.ground:
        raise GroundMismatch(f"{E.ground} vs {S.ground}")
    if isinstance(E, Diagonal):
        return S
    if isinstance(E, MetricRadius) and isinstance(E.ground, Naturals):
        ex = exact_form(S)
        if ex is not None:
            return _dilate_exact(normalize(ex), E.r)
    if isinstance(S, Finite):
        lists = [E.ball_list(x) for x in S.elements]
        if all(l is not None for l in lists):
            return Finite(tuple(y for l in lists for y in l), S.ground)
        balls = tuple(E.ball(x) for x in S.elements)
        return Union(balls) if balls else S
    if S.ground.size is None and _is_full(S):
        return S
    if isinstance(E, BlockEnt):
        # the block is swallowed whole as soon as S touches it
        meet = is_empty(combine(S, E.block, "intersection"))
        if meet.is_true:
            return S
        if meet.is_false:
            return combine(S, E.block, "union")
    try:
        inv = invert(E)
    except UnsupportedPresentation:
        inv = None

    def member(y):
        if S.contains(y):
            return True
        if inv is not None:
            lst = inv.ball_list(y)
            if lst is not None:
                return any(S.contains(z) for z in lst)
        raise UnsupportedPresentation("membership in E[S] needs a computable inverse image")

    def lister(h):
        found = {}
        for x in S.enumerate(h):
            lst = E.ball_list(x)
            for y in lst if lst is not None else E.ball(x).enumerate(h):
                if S.ground.encode(y) <= h:
                    found[y] = None
        return sorted(found, key=S.ground.encode)

    return Predicate(S.ground, member, f"E[{S}]", lister)


def _is_full(S):
    if isinstance(S, EventuallyPeriodic):
        return normalize(S) == full(NAT)
    if isinstance(S, Complement) and isinstance(S.inner, Finite) and not S.inner.elements:
        return True
    return False


def _dilate_exact(S, r):
    if isinstance(S, Finite):
        return normalize(Finite(tuple(y for x in S.elements for y in range(max(0, x - r), x + r + 1)), NAT))
    t, p = S.threshold, S.period
    top = t + r + p
    m = S.mask(top + r)
    d = kernels.distance_transform(m) <= r
    prelude = frozenset(int(x) for x in np.flatnonzero(d[: t + r]))
    residues = frozenset(int(x) % p for x in range(t + r, t + r + p) if d[x])
    return normalize(EventuallyPeriodic(prelude, p, residues, t + r))


# ====================================================================== presentations

@dataclass(eq=False)
class CoarsePresentation:
    """A coarse structure presented by a directed chain of probe entourages."""

    ground: GroundSet
    probe_fn: Callable[[int], Entourage]
    origin: str
    cofinal: bool = True
    carrier: Optional[SetExpr] = None
    basepoint: Any = None
    bornology: Any = None
    distance_fn: Optional[Callable[[Any, Any], Optional[int]]] = None
    connected: Optional[bool] = True
    expr: Any = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._probe_cache = {}
        if self.basepoint is None:
            self.basepoint = self.window_elements(0)[0] if self.window_elements(0) else self.ground.decode(0)

    def entourage(self, i: int) -> Entourage:
        if i not in self._probe_cache:
            self._probe_cache[i] = self.probe_fn(i)
        return self._probe_cache[i]

    def ball(self, i: int, x) -> SetExpr:
        E = self.entourage(i)
        b = E.ball(x)
        if self.carrier is not None:
            from .groundsets import Intersection

            return Intersection((b, self.carrier))
        return b

    def ball_list(self, i: int, x) -> Optional[list]:
        lst = self.entourage(i).ball_list(x)
        if lst is None or self.carrier is None:
            return lst
        return [y for y in lst if self.carrier.contains(y)]

    def distance(self, x, y, limit: int = 64) -> Optional[int]:
        """Least probe index relating x to y (None if beyond ``limit``)."""
        if self.distance_fn is not None:
            d = self.distance_fn(x, y)
            return None if d is None or d > limit else d
        # gallop to a relating probe, then bisect below it
        lo, hi = 0, 1
        while not self.entourage(hi).related(x, y):
            if hi >= limit:
                return None
            lo, hi = hi + 1, min(2 * hi, limit)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.entourage(mid).related(x, y):
                hi = mid
            else:
                lo = mid + 1
        return lo

    def norm(self, x, limit: int = BIG) -> Optional[int]:
        return self.distance(self.basepoint, x, limit)

    def window_elements(self, horizon: int) -> list:
        if self.carrier is None:
            return self.ground.elements(horizon)
        return self.carrier.enumerate(horizon)

    @property
    def full_set(self) -> SetExpr:
        return self.carrier if self.carrier is not None else full(self.ground)

    def __repr__(self):
        return f"CoarsePresentation({self.origin} on {self.ground})"


def metric_nat() -> CoarsePresentation:
    """(N, |x - y|) pointed at 0."""
    from .bornology import FiniteSubsets

    return CoarsePresentation(
        NAT, lambda i: MetricRadius(i), "metric-nat", basepoint=0,
        bornology=FiniteSubsets(NAT), distance_fn=lambda x, y: abs(x - y),
    )


def finite_metric(n: int) -> CoarsePresentation:
    """{0..n-1} with |x - y|; bounded."""
    from .bornology import Powerset

    g = FinitePoints(n)
    return CoarsePresentation(
        g, lambda i: MetricRadius(i, g), "finite-metric", basepoint=0,
        bornology=Powerset(g), distance_fn=lambda x, y: abs(x - y),
    )


def from_relation_chain(ground: FinitePoints, masks: Callable[[int], int], origin="finite") -> CoarsePresentation:
    n = ground.size

    def probe(i):
        return FiniteRelation(frozenset(mask_to_pairs(masks(i), n)), ground)

    top = masks(n * n + 1)
    connected = top == kernels.full_mask(n)
    return CoarsePresentation(ground, probe, origin, basepoint=0, connected=connected, meta={"top_mask": top})


# ====================================================================== finite relations <-> masks

def pairs_to_mask(pairs, n: int) -> int:
    m = kernels.diag_mask(n)
    for a, b in pairs:
        if not (0 <= a < n and 0 <= b < n):
            raise EncodingError(f"pair {(a, b)} outside {n} points")
        m |= 1 << (a * n + b)
    return m


def mask_to_pairs(mask: int, n: int) -> list:
    return [(i, j) for i in range(n) for j in range(n) if (mask >> (i * n + j)) & 1]


def relation_mask(E: Entourage, n: Optional[int] = None) -> int:
    n = E.ground.size if n is None else n
    m = 0
    for x in range(n):
        for y in E.ball_list(x):
            m |= 1 << (x * n + y)
    return m


# ====================================================================== generated structures

def _successor_like(E):
    return (isinstance(E, MetricRadius) and E.r >= 1) or getattr(E, "name", "") == "successor"


def successor_relation() -> BallMap:
    """{(n, n+1)}; its symmetrization generates the metric structure on N."""
    return BallMap(NAT, lambda x: [x + 1], lambda x: [x - 1] if x > 0 else [], "successor")


def _connecting_pairs(ground, union_mask_or_none, finite_pairs, n_needed, n_points=None):
    """First ``n_needed`` canonical pairs joining distinct components."""
    parent = {}

    def find(a):
        parent.setdefault(a, a)
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in finite_pairs:
        parent[find(a)] = find(b)
    out = []
    y = 1
    while len(out) < n_needed:
        if n_points is not None and y >= n_points:
            break
        for x in range(y):
            if len(out) >= n_needed:
                break
            a, b = ground.decode(x), ground.decode(y)
            if find(a) != find(b):
                parent[find(a)] = find(b)
                out.append((a, b))
        y += 1
    return out


def generate(generators, ground: GroundSet, connect: bool = True) -> CoarsePresentation:
    """Chain base of the structure generated by relation fragments.

    Stage n is the n-fold composition of Δ ∪ ⋃(F ∪ F⁻¹) together with the first
    n connecting pairs (canonical order, only pairs that join two components).
    """
    generators = list(generators)
    for g in generators:
        if g.ground != ground:
            raise GroundMismatch(f"generator over {g.ground}, expected {ground}")
    if ground.size is not None:
        n = ground.size
        if n > kernels.MAX_POINTS:
            raise ValueError("finite grounds are limited to 6 points")
        base = kernels.diag_mask(n)
        for g in generators:
            m = relation_mask(g, n)
            base |= m | kernels.invert(m, n)
        fin_pairs = mask_to_pairs(base, n)
        links = _connecting_pairs(ground, base, fin_pairs, n, n) if connect else []

        @lru_cache(maxsize=None)
        def stage(i):
            step = base
            for a, b in links[:i]:
                step |= (1 << (a * n + b)) | (1 << (b * n + a))
            m = kernels.diag_mask(n)
            for _ in range(i):
                m = kernels.compose(m, step, n)
            return m

        X = from_relation_chain(ground, stage, "generated")
        X.meta["generators"] = tuple(generators)
        X.meta["links"] = tuple(links)
        return X

    finite_pairs = []
    successor = False
    for g in generators:
        if _successor_like(g):
            successor = True
        elif isinstance(g, FiniteRelation):
            finite_pairs.extend(g.pairs)
        elif not isinstance(g, Diagonal):
            raise UnsupportedPresentation("infinite grounds accept MetricRadius, successor or FiniteRelation generators")
    steps = []
    for g in generators:
        if isinstance(g, FiniteRelation):
            steps.append(FiniteRelation(g.pairs | {(b, a) for a, b in g.pairs}, ground))
        elif isinstance(g, BallMap):
            steps.append(BallMap(ground, lambda x, g=g: list(g.fn(x)) + list(g.inverse_fn(x)), None, g.name + "-sym", True))
        elif isinstance(g, MetricRadius):
            steps.append(g)

    @lru_cache(maxsize=None)
    def links_upto(i):
        if successor or not connect:
            return ()
        return tuple(_connecting_pairs(ground, None, finite_pairs, i))

    def probe(i):
        parts = list(steps) + [Diagonal(ground)]
        links = links_upto(i)
        if links:
            parts.append(FiniteRelation(frozenset(links) | {(b, a) for a, b in links}, ground))
        step = UnionEnt(tuple(parts))
        return StepEnt(step, i)

    dist = None
    if successor and not finite_pairs and all(_successor_like(g) for g in generators):
        rmax = max(g.r if isinstance(g, MetricRadius) else 1 for g in generators)
        dist = lambda x, y: -(-abs(x - y) // rmax)
    X = CoarsePresentation(ground, probe, "generated", connected=True if (successor or connect) else None, distance_fn=dist)
    X.meta["generators"] = tuple(generators)
    return X


# ====================================================================== axiom checking

@dataclass(frozen=True)
class AxiomReport:
    """Per-axiom pass/fail; failures carry a witness relation (or pair of relations)."""

    diagonal: tuple
    composition: tuple
    inversion: tuple
    downward: tuple
    nonempty: bool = True

    @property
    def ok(self):
        return self.nonempty and all(a[0] for a in (self.diagonal, self.composition, self.inversion, self.downward))

    def lines(self):
        out = []
        for name in ("diagonal", "composition", "inversion", "downward"):
            ok, wit = getattr(self, name)
            out.append(f"{name}: {'pass' if ok else 'FAIL'}" + ("" if ok else f" witness={wit}"))
        if not self.nonempty:
            out.append("nonempty: FAIL")
        return out


def _as_masks(family, n):
    out = []
    for R in family:
        if isinstance(R, (int, np.integer)):
            out.append(int(R))
        else:
            m = 0
            for a, b in R:
                m |= 1 << (a * n + b)
            out.append(m)
    return out


@lru_cache(maxsize=1 << 16)
def _rel(mask, n):
    return frozenset(mask_to_pairs(mask, n))


def check_axioms(family, n: int) -> AxiomReport:
    """Coarse-structure axioms for an explicit family of relations on n <= 6 points.

    Relations are given as iterables of pairs (diagonal not implied) or as
    bitmasks. An empty family fails: a coarse structure contains Δ.
    """
    if not 1 <= n <= kernels.MAX_POINTS:
        raise ValueError("checkAxioms handles grounds of at most 6 points")
    masks = sorted(set(_as_masks(family, n)))
    d = kernels.diag_mask(n)
    arr = np.array(masks, dtype=np.int64)
    diag_bad = [m for m in masks if m & d != d]
    diagonal = (not diag_bad, _rel(diag_bad[0], n) if diag_bad else None)
    if len(masks) <= kernels.SMALL_FAMILY:
        inv = [kernels.invert(m, n) for m in masks]
    else:
        inv = kernels.invert_arrays(arr, n)
    mset = set(masks)
    inv_bad = [m for m, i in zip(masks, inv) if int(i) not in mset]
    inversion = (not inv_bad, _rel(inv_bad[-1], n) if inv_bad else None)
    a, b = kernels.composition_violation(arr, n, unique=True) if masks else (-1, -1)
    composition = (a < 0, None if a < 0 else (_rel(a, n), _rel(b, n)))
    a, sub = kernels.down_violation(arr, n, unique=True) if masks else (-1, -1)
    downward = (a < 0, None if a < 0 else (_rel(a, n), _rel(sub, n)))
    return AxiomReport(diagonal, composition, inversion, downward, nonempty=bool(masks))


def brute_force_closure(generators, n: int) -> set:
    """Smallest coarse structure containing each generator ∪ Δ, by exhaustive search.

    Words of generators under ∘ and ⁻¹ are closed first; then every relation above
    Δ is tested for containment in some word.
    """
    d = kernels.diag_mask(n)
    gens = frozenset(int(g) | d for g in _as_masks(generators, n)) or frozenset([d])
    return set(_closure_of(gens, n))


@lru_cache(maxsize=4096)
def _closure_of(gens: frozenset, n: int) -> frozenset:
    words = np.asarray(kernels.word_closure(gens, n), dtype=np.int64)
    cand = kernels.downset(kernels.full_mask(n), n)
    keep = np.zeros(len(cand), dtype=bool)
    step = max(1, (1 << 22) // max(len(words), 1))
    for lo in range(0, len(cand), step):
        c = cand[lo:lo + step, None]
        keep[lo:lo + step] = ((c & words[None, :]) == c).any(axis=1)
    return frozenset(int(m) for m in cand[keep])


def structure_family(X: CoarsePresentation) -> set:
    """Every relation of a presentation on a finite ground (downset of the chain's top)."""
    n = X.ground.size
    if n is None:
        raise DomainError("explicit families exist only on finite grounds")
    top = X.meta.get("top_mask")
    if top is None:
        top = relation_mask(X.entourage(n * n + 1), n)
    return {int(m) for m in kernels.downset(top, n)}


def enumerate_coarse_structures(n: int, exhaustive_families: bool = False) -> list:
    """All coarse structures on n <= 4 points, as sorted lists of masks.

    With ``exhaustive_families`` every family of relations above Δ is tested
    (feasible for n <= 2). Otherwise the candidates are the principal downsets:
    on a finite set a structure contains the union of its members (E ∪ F ⊆ E ∘ F),
    so it is the downset of that union.
    """
    if not 1 <= n <= 4:
        raise ValueError("enumeration supports 1..4 points")
    d = kernels.diag_mask(n)
    rels = [int(m) for m in kernels.downset(kernels.full_mask(n), n)]
    found = []
    if exhaustive_families:
        if len(rels) > 16:
            raise ValueError("exhaustive family enumeration is limited to 2 points")
        for k in range(1, 1 << len(rels)):
            fam = [r for i, r in enumerate(rels) if (k >> i) & 1]
            if kernels.check_family(fam, n)[0] == kernels.OK:
                found.append(sorted(fam))
        return found
    for top in rels:
        fam = kernels.downset(top, n)
        if kernels.check_family(fam, n)[0] == kernels.OK:
            found.append([int(m) for m in fam])
    return found


# ====================================================================== horizon windows

class Window:
    """Finite sample of a presentation: carrier points of rank <= horizon."""

    def __init__(self, X: CoarsePresentation, horizon: int):
        self.X = X
        self.horizon = horizon
        self.elems = X.window_elements(horizon)
        self.ranks = np.array([X.ground.encode(x) for x in self.elems], dtype=np.int64)
        self.pos = {x: i for i, x in enumerate(self.elems)}
        self._csr = {}
        self._norms = None
        self._metric_nat = X.origin == "metric-nat" and X.carrier is None

    def __len__(self):
        return len(self.elems)

    def csr(self, i: int):
        if i in self._csr:
            return self._csr[i]
        N = len(self.elems)
        if self._metric_nat:
            lo = np.maximum(np.arange(N) - i, 0)
            hi = np.minimum(np.arange(N) + i, N - 1)
            counts = hi - lo + 1
            indptr = np.concatenate([[0], np.cumsum(counts)])
            indices = np.concatenate([np.arange(a, b + 1) for a, b in zip(lo, hi)]) if N else np.zeros(0, np.int64)
        elif self.X.ball_list(i, self.elems[0]) is None and self.X.distance_fn is not None:
            D = self.distance_matrix()
            rows = [np.flatnonzero(D[c] <= i) for c in range(N)]
            counts = np.array([len(r) for r in rows], dtype=np.int64)
            indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
            indices = np.concatenate(rows).astype(np.int64) if N else np.zeros(0, np.int64)
        else:
            rows = []
            for x in self.elems:
                lst = self.X.ball_list(i, x)
                if lst is None:
                    lst = self.X.ball(i, x).enumerate(self.horizon)
                rows.append([self.pos[y] for y in lst if y in self.pos])
            counts = np.array([len(r) for r in rows], dtype=np.int64)
            indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
            indices = np.array([k for r in rows for k in r], dtype=np.int64)
        self._csr[i] = (indptr.astype(np.int64), indices.astype(np.int64))
        return self._csr[i]

    def distance_matrix(self) -> np.ndarray:
        """Pairwise level distances inside the window (BIG when unrelated)."""
        if getattr(self, "_D", None) is None and "pairwise" in self.X.meta:
            self._D = self.X.meta["pairwise"](self.elems)
        if getattr(self, "_D", None) is None:
            N = len(self.elems)
            D = np.zeros((N, N), dtype=np.int64)
            dist = self.X.distance_fn
            for a in range(N):
                x = self.elems[a]
                for b in range(a + 1, N):
                    d = dist(x, self.elems[b])
                    D[a, b] = D[b, a] = BIG if d is None else d
            self._D = D
        return self._D

    def mask_of(self, S: SetExpr) -> np.ndarray:
        m = np.zeros(len(self.elems), dtype=bool)
        if S.ground != self.X.ground:
            raise GroundMismatch(f"{S.ground} vs {self.X.ground}")
        for x in S.enumerate(self.horizon):
            k = self.pos.get(x)
            if k is not None:
                m[k] = True
        return m

    def dilate(self, i: int, mask: np.ndarray) -> np.ndarray:
        if self._metric_nat:
            return kernels.distance_transform(mask) <= i
        indptr, indices = self.csr(i)
        return kernels.csr_dilate(indptr, indices, mask, len(self.elems))

    def norms(self) -> np.ndarray:
        if self._norms is None:
            if self._metric_nat:
                self._norms = np.asarray(self.elems, dtype=np.int64)
            else:
                L = self.X.meta.get("level")
                if self.X.distance_fn is None and L is not None:
                    # leaving every bounded set is what escape means; the level measures it directly
                    b = self.X.basepoint
                    vals = [L([b, x]) for x in self.elems]
                else:
                    cap = 4 * self.horizon + 64
                    vals = [self.X.norm(x, cap) for x in self.elems]
                self._norms = np.array([BIG if v is None else v for v in vals], dtype=np.int64)
        return self._norms


def window(X: CoarsePresentation, horizon: int) -> Window:
    """Shared window per (presentation, horizon); ball lists are cached inside."""
    if not _is_metric_nat(X) and X.ball_list(1, X.window_elements(0)[0]) is None:
        # pairwise distances only: quadratic, so keep the sample small
        horizon = min(horizon, SLOW_WINDOW_CAP)
    cache = X.meta.setdefault("_windows", {})
    if horizon not in cache:
        cache[horizon] = Window(X, horizon)
    return cache[horizon]


@dataclass(frozen=True)
class Escape:
    """How a window-computed set behaves as the window grows."""

    status: str  # "stable", "escaping" or "unclear"
    bound: int
    witnesses: tuple = ()


def escape_profile(win: Window, mask: np.ndarray) -> Escape:
    """Stable when the outer half of the window adds no larger norm; escaping when
    both the second quarter and the outer half do."""
    if not mask.any():
        return Escape("stable", -1)
    H = win.horizon
    norms = win.norms()[mask]
    ranks = win.ranks[mask]
    m_all = int(norms.max())
    inner = ranks <= H // 2
    quarter = ranks <= H // 4
    m_half = int(norms[inner].max()) if inner.any() else -1
    m_q = int(norms[quarter].max()) if quarter.any() else -1
    if m_all == m_half and m_half >= 0:
        return Escape("stable", m_all)
    if m_all > m_half > m_q >= 0:
        pts = np.asarray(win.elems, dtype=object)[mask]
        order = np.argsort(norms)
        wit = tuple(pts[order[-3:]].tolist())
        return Escape("escaping", m_all, wit)
    return Escape("unclear", m_all)


# ====================================================================== predicates

def is_connected(X: CoarsePresentation, horizon: int = DEFAULT_HORIZON, limit: int = 64) -> Verdict:
    """Every pair related by some probe (finite grounds: exact; else sampled)."""
    if X.ground.size is not None:
        n = X.ground.size
        top = X.meta.get("top_mask")
        if top is None:
            top = relation_mask(X.entourage(n * n + 1), n)
        for x in range(n):
            for y in range(n):
                if not (top >> (x * n + y)) & 1:
                    return Verdict.false((x, y))
        return Verdict.true()
    if X.origin in ("metric-nat", "down", "up") or X.connected is True:
        return Verdict.true(note=f"{X.origin}: every pair lies in a bounded set")
    pts = X.window_elements(min(horizon, 256))
    for x in pts:
        if X.norm(x, limit) is None:
            return Verdict.unknown(horizon, note=f"{x!r} not reached by probes <= {limit}")
    return Verdict.true(note="all sampled points reach the basepoint")


def restrict_to(X: CoarsePresentation, Y: SetExpr) -> CoarsePresentation:
    """The subballean on Y: probes intersected with Y × Y."""
    if Y.ground != X.ground:
        raise GroundMismatch(f"{Y.ground} vs {X.ground}")
    from .groundsets import Intersection

    carrier = Y if X.carrier is None else Intersection((X.carrier, Y))
    born = None
    if X.bornology is not None:
        from .bornology import restrict_bornology

        born = restrict_bornology(X.bornology, carrier)
    base = X.basepoint if carrier.contains(X.basepoint) else None
    if base is None:
        first = carrier.enumerate(DEFAULT_HORIZON)
        base = first[0] if first else X.basepoint
    dist = X.distance_fn
    return CoarsePresentation(
        X.ground, lambda i: Restricted(X.entourage(i), carrier), X.origin if X.carrier is None and False else "sub",
        cofinal=X.cofinal, carrier=carrier, basepoint=base, bornology=born, distance_fn=dist,
        connected=X.connected, expr=None, meta={"parent": X},
    )


def _is_metric_nat(X):
    return X.origin == "metric-nat" and X.carrier is None


def is_large(X: CoarsePresentation, Y: SetExpr, horizon: int = DEFAULT_HORIZON,
             radii=DEFAULT_RADII) -> Verdict:
    """Is X = E[Y] for some entourage E?"""
    if _is_full_of(X, Y):
        return Verdict.true({"index": 0})
    if _is_metric_nat(X):
        ex = exact_form(Y)
        if ex is not None:
            ex = normalize(ex)
            if isinstance(ex, Finite):
                top = max(ex.elements, default=-1)
                return Verdict.false([(r, top + r + 1) for r in radii], note="finite set, every radius leaves points uncovered")
            span = ex.threshold + 3 * ex.period
            d = kernels.distance_transform(ex.mask(span))
            r = int(d[: ex.threshold + 2 * ex.period].max())
            return Verdict.true({"index": r}, note="covering radius of an eventually periodic set")
        gaps = _sparse_gaps(Y, horizon)
        if gaps is not None:
            vals, growing = gaps
            if growing:
                wit = []
                for r in radii:
                    for a, b in zip(vals, vals[1:]):
                        if b - a > 2 * r + 1:
                            wit.append((r, (a + b) // 2))
                            break
                if len(wit) == len(radii):
                    return Verdict.false(wit, note="midpoints of growing gaps escape every radius")
        return Verdict.unknown(horizon)
    if X.ground.size is not None:
        top = max(radii)
        cov = apply(X.entourage(top), Y)
        return Verdict.true({"index": top}) if len(cov.enumerate(X.ground.size)) == X.ground.size else Verdict.unknown(horizon)
    win = window(X, horizon)
    ym = win.mask_of(Y)
    wits = []
    for r in radii:
        unc = ~win.dilate(r, ym)
        prof = escape_profile(win, unc)
        if prof.status != "escaping":
            return Verdict.unknown(horizon, note="coverage without a stability certificate")
        wits.append((r, prof.witnesses[-1]))
    return Verdict.false(wits)


def _is_full_of(X, Y):
    if X.carrier is None:
        if Y.ground.size is None:
            return _is_full(Y) or (isinstance(Y, EventuallyPeriodic) and normalize(Y) == full(NAT))
        return len(Y.enumerate(Y.ground.size)) == Y.ground.size
    return Y == X.carrier


def _sparse_gaps(Y, horizon):
    """Gaps of an infinite set that never stops growing at the horizon, if any."""
    vals = Y.enumerate(horizon)
    if len(vals) < 4 or finiteness(Y, horizon).is_true:
        return None
    gaps = np.diff(vals)
    tail = gaps[len(gaps) // 2:]
    growing = bool(np.all(np.diff(tail) >= 0) and tail[-1] > tail[0])
    return vals, growing


def is_coarse_map(f: Callable, X: CoarsePresentation, X2: CoarsePresentation,
                  horizon: int = DEFAULT_HORIZON, radii=DEFAULT_RADII, limit: int = 1 << 30) -> Verdict:
    """Does every probe of X map into some probe of X2 (checked on the window)?"""
    win = window(X, horizon)
    needed = {}
    for i in radii:
        if _is_metric_nat(X) and X2.distance_fn is not None and isinstance(X2.ground, Naturals):
            xs = np.arange(horizon + i + 1)
            fx = np.array([f(int(x)) for x in xs], dtype=np.int64)
            worst = np.zeros(horizon + 1, dtype=np.int64)
            for k in range(-i, i + 1):
                lo, hi = max(0, -k), horizon + 1
                idx = np.arange(lo, hi)
                worst[idx] = np.maximum(worst[idx], np.abs(fx[idx + k] - fx[idx]))
            req = worst
        else:
            indptr, indices = win.csr(i)
            req = np.zeros(len(win), dtype=np.int64)
            for c, x in enumerate(win.elems):
                fx = f(x)
                best = 0
                for k in indices[indptr[c]:indptr[c + 1]]:
                    d = X2.distance(fx, f(win.elems[k]), limit)
                    best = BIG if d is None else max(best, d)
                req[c] = best
        prof = escape_profile_values(win, req)
        if prof.status == "escaping":
            x = int(np.argmax(req)) if _is_metric_nat(X) else win.elems[int(np.argmax(req))]
            return Verdict.false({"index": i, "x": x, "needed": int(req.max())}, note="images of balls grow without bound")
        if prof.status != "stable":
            return Verdict.unknown(horizon)
        needed[i] = int(req.max())
    return Verdict.true(needed)


def escape_profile_values(win: Window, values: np.ndarray) -> Escape:
    """Stability of the running maximum of a per-point quantity."""
    H = win.horizon
    ranks = win.ranks if len(values) == len(win.ranks) else np.arange(len(values))
    m_all = int(values.max()) if len(values) else 0
    inner = ranks <= H // 2
    quarter = ranks <= H // 4
    m_half = int(values[inner].max()) if inner.any() else 0
    m_q = int(values[quarter].max()) if quarter.any() else 0
    if m_all == m_half:
        return Escape("stable", m_all)
    if m_all > m_half > m_q:
        return Escape("escaping", m_all)
    return Escape("unclear", m_all)


def is_bounded(X: CoarsePresentation, S: SetExpr, horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Is S contained in a single ball?"""
    if S.ground != X.ground:
        raise GroundMismatch(f"{S.ground} vs {X.ground}")
    if _is_metric_nat(X):
        return finiteness(S, horizon)
    if X.bornology is not None:
        v = X.bornology.member(S, horizon)
        if not v.is_unknown:
            return v
    return bounded_by_probes(X, S, horizon)


def bounded_by_probes(X: CoarsePresentation, S: SetExpr, horizon: int = DEFAULT_HORIZON,
                      limit: Optional[int] = None) -> Verdict:
    """Executable boundedness: search the least probe i with S ⊆ E_i[s0], s0 ∈ S.

    Chains are monotone, so the search is a bisection. False is returned only
    when S is infinite and every probe ball around s0 is finite.
    """
    pts = S.enumerate(horizon)
    if not pts:
        fin = finiteness(S, horizon)
        if fin.is_true:
            return Verdict.true(note="empty")
        return Verdict.unknown(horizon)
    s0 = pts[0]
    limit = horizon if limit is None else limit
    fin = finiteness(S, horizon)
    if fin.is_true and isinstance(S, Finite):
        # a finite set may sit beyond the horizon; widen the search to reach it
        top = max(X.ground.encode(x) for x in S.elements)
        limit = max(limit, 2 * top + 2)
        horizon = max(horizon, top)

        def covered(i):
            ball = X.ball(i, s0)
            return all(ball.contains(x) for x in S.elements)
    else:
        def covered(i):
            return is_subset(S, X.ball(i, s0), horizon).is_true

    if covered(limit):
        lo, hi = 0, limit
        while lo < hi:
            mid = (lo + hi) // 2
            if covered(mid):
                hi = mid
            else:
                lo = mid + 1
        return Verdict.true({"index": lo, "center": s0})
    if fin.is_false and finiteness(X.ball(limit, s0), horizon).is_true:
        return Verdict.false(fin.witness, note="infinite set, probe balls are finite")
    return Verdict.unknown(horizon)


def bounded_sets(X: CoarsePresentation):
    """The bornology of bounded sets (oracle-backed when the provenance gives none)."""
    from .bornology import OracleBacked

    if X.bornology is not None:
        return X.bornology
    return OracleBacked(X.ground, lambda S, h=DEFAULT_HORIZON: bounded_by_probes(X, S, h), f"bounded({X.origin})")
