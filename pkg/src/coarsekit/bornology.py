"""Bornology presentations, symbolic cardinals and the invariants add <= cov <= cof."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .groundsets import (
    DEFAULT_HORIZON,
    NAT,
    Complement,
    Finite,
    GroundSet,
    Intersection,
    Naturals,
    Predicate,
    Rectangle,
    SetExpr,
    TupleSpace,
    Union,
    Verdict,
    combine,
    finiteness,
    full,
    is_subset,
)


class DomainError(ValueError):
    """Raised when an invariant is requested outside its domain (e.g. a bounded bornology)."""


class InvalidDeclaration(ValueError):
    """An abstract declaration violating add <= cov <= cof."""


# ====================================================================== symbolic cardinals

_LEVEL = {"fin": 0, "aleph0": 1, "ge_aleph1": 2}


@dataclass(frozen=True)
class SymCard:
    """Fin(n) < Aleph0 < AtLeastAleph1; Declared(name) is known only to be >= ``lower``."""

    kind: str
    n: int = 0
    name: str = ""
    lower: str = "ge_aleph1"

    def __post_init__(self):
        if self.kind not in ("fin", "aleph0", "ge_aleph1", "declared"):
            raise ValueError(f"unknown cardinal kind {self.kind!r}")
        if self.kind == "declared" and self.lower not in ("aleph0", "ge_aleph1"):
            raise ValueError("declared cardinals are infinite")

    @property
    def level(self):
        return _LEVEL[self.lower] if self.kind == "declared" else _LEVEL[self.kind]

    @property
    def exact(self):
        return self.kind in ("fin", "aleph0")

    def __str__(self):
        if self.kind == "fin":
            return str(self.n)
        if self.kind == "aleph0":
            return "ℵ0"
        if self.kind == "ge_aleph1":
            return "≥ℵ1"
        return self.name


def Fin(n: int) -> SymCard:
    return SymCard("fin", n)


ALEPH0 = SymCard("aleph0")
AT_LEAST_ALEPH1 = SymCard("ge_aleph1")


def Declared(name: str, lower: str = "ge_aleph1") -> SymCard:
    return SymCard("declared", name=name, lower=lower)


def compare(a: SymCard, b: SymCard) -> Optional[str]:
    """'<', '=' or '>' when forced by what is known, else None."""
    if a == b and a.kind != "ge_aleph1":
        return "="
    if a.kind == "fin" and b.kind == "fin":
        return "<" if a.n < b.n else ">" if a.n > b.n else "="
    if a.exact and b.exact:
        return "<" if a.level < b.level else ">" if a.level > b.level else "="
    # one side only has a lower bound
    if a.exact and a.level < b.level:
        return "<"
    if b.exact and b.level < a.level:
        return ">"
    return None


def definitely_less(a, b) -> bool:
    return compare(a, b) == "<"


def definitely_different(a, b) -> bool:
    return compare(a, b) in ("<", ">")


def may_exceed(a, b) -> bool:
    """False only when a <= b is forced."""
    return compare(a, b) not in ("<", "=")


def sym_min(a, b):
    c = compare(a, b)
    if c in ("<", "="):
        return a
    if c == ">":
        return b
    return Declared(f"min({a},{b})", "ge_aleph1" if min(a.level, b.level) >= 2 else "aleph0")


def sym_max(a, b):
    c = compare(a, b)
    if c in ("<", "="):
        return b
    if c == ">":
        return a
    return Declared(f"max({a},{b})", "ge_aleph1" if max(a.level, b.level) >= 2 else "aleph0")


def parse_card(text: str) -> SymCard:
    t = text.strip().lower()
    if t in ("aleph0", "ℵ0", "omega", "w"):
        return ALEPH0
    if t in ("aleph1+", ">=aleph1", "≥ℵ1", "ge-aleph1", "at-least-aleph1"):
        return AT_LEAST_ALEPH1
    if t.isdigit():
        return Fin(int(t))
    return Declared(text.strip())


# ====================================================================== presentations

class BornologyPresentation:
    ground: GroundSet

    def member(self, S: SetExpr, horizon: int = DEFAULT_HORIZON) -> Verdict:
        raise NotImplementedError

    def sample_base(self, k: int) -> list:
        """A few base members for horizon checks."""
        return []

    def points(self, horizon: int) -> list:
        carrier = getattr(self, "carrier", None)
        if carrier is not None:
            return carrier.enumerate(horizon)
        return self.ground.elements(horizon)

    @property
    def space(self) -> SetExpr:
        carrier = getattr(self, "carrier", None)
        return carrier if carrier is not None else full(self.ground)


def _inside(S, carrier, horizon):
    if carrier is None:
        return Verdict.true()
    return is_subset(S, carrier, horizon)


@dataclass(frozen=True)
class FiniteSubsets(BornologyPresentation):
    """[X]^{<ω}, optionally on a subset ``carrier`` of the ground."""

    ground: GroundSet = NAT
    carrier: Optional[SetExpr] = None

    def member(self, S, horizon=DEFAULT_HORIZON):
        inside = _inside(S, self.carrier, horizon)
        if not inside.is_true:
            return inside
        return finiteness(S, horizon)

    def sample_base(self, k):
        pts = self.points(max(4 * k, 16))
        return [Finite(tuple(pts[: i + 1]), self.ground) for i in range(min(k, len(pts)))]

    def __str__(self):
        return "[X]^<ω" if self.carrier is None else f"[{self.carrier}]^<ω"


@dataclass(frozen=True)
class ChainBase(BornologyPresentation):
    """Base B_n = tail ∪ {first n+1 points of the carrier}.

    With the default empty tail this is the chain of initial segments [0, n].
    """

    ground: GroundSet = NAT
    tail: Optional[SetExpr] = None
    carrier: Optional[SetExpr] = None

    def base_member(self, n: int) -> SetExpr:
        seg = Finite(tuple(self.points_n(n + 1)), self.ground)
        return seg if self.tail is None else combine(self.tail, seg, "union")

    def points_n(self, count):
        if self.carrier is None:
            size = self.ground.size
            top = count if size is None else min(count, size)
            return [self.ground.decode(k) for k in range(top)]
        h = max(16, count)
        while True:
            pts = self.carrier.enumerate(h)
            if len(pts) >= count or finiteness(self.carrier).is_true and h > _max_rank(self.carrier):
                return pts[:count]
            h *= 4

    def member(self, S, horizon=DEFAULT_HORIZON):
        inside = _inside(S, self.carrier, horizon)
        if not inside.is_true:
            return inside
        rest = S if self.tail is None else combine(S, self.tail, "difference")
        v = finiteness(rest, horizon)
        if v.is_false:
            return Verdict.false(v.witness, note="infinitely many points outside every chain member")
        return v

    def level(self, S, horizon=DEFAULT_HORIZON) -> Optional[int]:
        """Least n with S ⊆ B_n (S finite outside the tail), else None."""
        rest = S if self.tail is None else combine(S, self.tail, "difference")
        if not finiteness(rest, horizon).is_true:
            return None
        pts = rest.enumerate(horizon)
        if not pts:
            return 0
        if self.carrier is None:
            return max(self.ground.encode(x) for x in pts)
        return max(self.carrier.index_of(x) for x in pts)

    def sample_base(self, k):
        return [self.base_member(n) for n in range(k)]

    def __str__(self):
        return "chain[0,n]" if self.tail is None else f"chain({self.tail} ∪ [0,n])"


def _max_rank(S):
    pts = S.enumerate(1 << 20)
    return max((S.ground.encode(x) for x in pts), default=0)


@dataclass(frozen=True)
class ExplicitBase(BornologyPresentation):
    """A literal finite base; members are the subsets of some listed set."""

    ground: GroundSet = NAT
    members: tuple = ()

    def member(self, S, horizon=DEFAULT_HORIZON):
        unknown = False
        for m in self.members:
            v = is_subset(S, m, horizon)
            if v.is_true:
                return Verdict.true({"base": str(m)})
            unknown |= v.is_unknown
        if unknown:
            return Verdict.unknown(horizon)
        return Verdict.false(note="not inside any base member")

    def sample_base(self, k):
        return list(self.members[:k])

    def __str__(self):
        return "base{" + ", ".join(map(str, self.members)) + "}"


@dataclass(frozen=True)
class Powerset(BornologyPresentation):
    """Every subset is bounded."""

    ground: GroundSet = NAT

    def member(self, S, horizon=DEFAULT_HORIZON):
        return Verdict.true()

    def sample_base(self, k):
        return [full(self.ground)]

    def __str__(self):
        return "P(X)"


@dataclass(frozen=True, eq=False)
class OracleBacked(BornologyPresentation):
    ground: GroundSet = NAT
    fn: Callable[..., Verdict] = None
    name: str = "oracle"
    carrier: Optional[SetExpr] = None

    def member(self, S, horizon=DEFAULT_HORIZON):
        inside = _inside(S, self.carrier, horizon)
        if not inside.is_true:
            return inside
        return self.fn(S, horizon)

    def sample_base(self, k):
        pts = self.points(max(4 * k, 16))
        return [Finite(tuple(pts[: i + 1]), self.ground) for i in range(min(k, len(pts)))]

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Abstract(BornologyPresentation):
    """A declared unbounded bornology known only through (add, cov, cof)."""

    add: SymCard = ALEPH0
    cov: SymCard = ALEPH0
    cof: SymCard = ALEPH0
    name: str = "abstract"
    unbounded: bool = True
    ground: Any = None

    def __post_init__(self):
        for a, b, what in ((self.add, self.cov, "add > cov"), (self.cov, self.cof, "cov > cof")):
            if compare(a, b) == ">":
                raise InvalidDeclaration(f"{what}: {a} > {b}")
        if self.add.kind == "fin" or self.cov.kind == "fin":
            raise InvalidDeclaration("finite unions of bounded sets are bounded, so add and cov are infinite")

    def member(self, S, horizon=DEFAULT_HORIZON):
        return Verdict.unknown(horizon, note="abstract bornology has no membership procedure")

    def __str__(self):
        return f"abstract(add={self.add}, cov={self.cov}, cof={self.cof})"


def _project(S: SetExpr, i: int, ground: GroundSet) -> SetExpr:
    """Coordinate projection of a subset of a product ground."""
    if isinstance(S, Rectangle):
        return S.components[i]
    if isinstance(S, Finite):
        return Finite(tuple(x[i] for x in S.elements), ground)
    if isinstance(S, Union):
        return Union(tuple(_project(p, i, ground) for p in S.parts))
    fin = finiteness(S)

    def lister(h):
        return sorted({x[i] for x in S.enumerate(h)}, key=ground.encode)

    def member(y):
        return y in lister(DEFAULT_HORIZON)

    if fin.is_true:
        return Finite(tuple(lister(DEFAULT_HORIZON)), ground)
    return Predicate(ground, member, f"π{i}({S})", None)


@dataclass(frozen=True)
class ProductOf(BornologyPresentation):
    """S is bounded iff S ⊆ B_X × B_Y for base members B_X, B_Y."""

    left: BornologyPresentation = None
    right: BornologyPresentation = None

    @property
    def ground(self):
        if self.left.ground is None or self.right.ground is None:
            return None
        return TupleSpace((self.left.ground, self.right.ground))

    def member(self, S, horizon=DEFAULT_HORIZON):
        if self.ground is None:
            return Verdict.unknown(horizon, note="abstract factor")
        out = []
        for i, B in enumerate((self.left, self.right)):
            proj = _project(S, i, B.ground)
            if isinstance(proj, Predicate) and proj.lister is None:
                return Verdict.unknown(horizon, note="projection not computable")
            v = B.member(proj, horizon)
            if v.is_false:
                return Verdict.false({"side": i, "projection": str(proj)}, note=v.note)
            out.append(v)
        if all(v.is_true for v in out):
            return Verdict.true()
        return Verdict.unknown(horizon)

    def sample_base(self, k):
        L, R = self.left.sample_base(k), self.right.sample_base(k)
        return [Rectangle((a, b)) for a, b in zip(L, R)]

    def __str__(self):
        return f"({self.left} × {self.right})"


def product_bornology(BX: BornologyPresentation, BY: BornologyPresentation) -> ProductOf:
    return ProductOf(BX, BY)


@dataclass(frozen=True, eq=False)
class RestrictedBornology(BornologyPresentation):
    """{B ∈ inner : B ⊆ carrier}."""

    inner: BornologyPresentation = None
    carrier: SetExpr = None

    @property
    def ground(self):
        return self.inner.ground

    def member(self, S, horizon=DEFAULT_HORIZON):
        inside = is_subset(S, self.carrier, horizon)
        if not inside.is_true:
            return inside
        return self.inner.member(S, horizon)

    def sample_base(self, k):
        pts = self.carrier.enumerate(max(4 * k, 16))
        return [Finite(tuple(pts[: i + 1]), self.ground) for i in range(min(k, len(pts)))]

    def __str__(self):
        return f"{self.inner}|{self.carrier}"


def restrict_bornology(B: BornologyPresentation, carrier: SetExpr) -> BornologyPresentation:
    """The bornology induced on a subset (bounded sets of B lying inside ``carrier``)."""
    if isinstance(B, FiniteSubsets):
        c = carrier if B.carrier is None else Intersection((B.carrier, carrier))
        return FiniteSubsets(B.ground, c)
    if isinstance(B, ChainBase) and B.carrier is None:
        tail = None if B.tail is None else Intersection((B.tail, carrier))
        return ChainBase(B.ground, tail, carrier)
    if isinstance(B, Powerset):
        return ChainBase(B.ground, carrier, carrier)
    return RestrictedBornology(B, carrier)


# ====================================================================== checks

@dataclass
class BornologyReport:
    singletons: tuple = (True, None)
    unions: tuple = (True, None)
    subsets: tuple = (True, None)
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return self.singletons[0] and self.unions[0] and self.subsets[0]

    def lines(self):
        out = []
        for name in ("singletons", "unions", "subsets"):
            ok, wit = getattr(self, name)
            out.append(f"{name}: {'pass' if ok else 'FAIL'}" + ("" if ok else f" witness={wit}"))
        return out


def check_bornology(B: BornologyPresentation, horizon: int = 64, samples: int = 6) -> BornologyReport:
    """Singletons, pairwise unions and sampled subsets of base members, at a horizon."""
    rep = BornologyReport()
    if isinstance(B, Abstract):
        rep.notes.append("abstract declaration: axioms assumed, ordering validated at construction")
        return rep
    for x in B.points(horizon):
        v = B.member(Finite((x,), B.ground), horizon)
        if v.is_false:
            rep.singletons = (False, x)
            break
        if v.is_unknown:
            rep.notes.append(f"singleton {x!r} undecided")
    base = B.sample_base(samples)
    for i, a in enumerate(base):
        for b in base[i:]:
            v = B.member(combine(a, b, "union"), horizon)
            if v.is_false:
                rep.unions = (False, (str(a), str(b)))
                break
        if not rep.unions[0]:
            break
    if B.ground is not None and isinstance(B.ground, Naturals):
        from .groundsets import ap

        probes = [ap(2, 0), ap(3, 1), Finite((0, 1, 2), NAT)]
        for a in base:
            for p in probes:
                v = B.member(combine(a, p, "intersection"), horizon)
                if v.is_false:
                    rep.subsets = (False, (str(a), str(p)))
                    return rep
    return rep


def is_unbounded(B: BornologyPresentation, horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Is the whole carrier outside B?"""
    if isinstance(B, Abstract):
        return Verdict.true() if B.unbounded else Verdict.false(note="declared bounded")
    if isinstance(B, Powerset):
        return Verdict.false(str(B.space), note="the whole set is a member")
    if isinstance(B, ProductOf):
        l, r = is_unbounded(B.left, horizon), is_unbounded(B.right, horizon)
        if l.is_true or r.is_true:
            return Verdict.true(note="an unbounded factor")
        if l.is_false and r.is_false:
            return Verdict.false(note="both factors bounded")
        return Verdict.unknown(horizon)
    if isinstance(B, ExplicitBase):
        for m in B.members:
            if is_subset(B.space, m, horizon).is_true:
                return Verdict.false(str(m))
    v = B.member(B.space, horizon)
    if v.is_false:
        return Verdict.true(note="the whole set is not a member")
    return v.negate()


@dataclass(frozen=True)
class Invariants:
    add: SymCard
    cov: SymCard
    cof: SymCard
    trace: tuple = ()

    def ordered(self) -> bool:
        """No forced violation of add <= cov <= cof."""
        return compare(self.add, self.cov) != ">" and compare(self.cov, self.cof) != ">" and \
            compare(self.add, self.cof) != ">"

    def __iter__(self):
        return iter((self.add, self.cov, self.cof))

    def __str__(self):
        return f"add={self.add}, cov={self.cov}, cof={self.cof}"


def cardinal_invariants(B: BornologyPresentation, horizon: int = DEFAULT_HORIZON) -> Invariants:
    """(add, cov, cof) with a justification trace; bounded bornologies raise DomainError."""
    if isinstance(B, Abstract):
        if not B.unbounded:
            raise DomainError("invariants are defined for unbounded bornologies only")
        return Invariants(B.add, B.cov, B.cof, ("declared",))
    if isinstance(B, ProductOf):
        ul, ur = is_unbounded(B.left, horizon), is_unbounded(B.right, horizon)
        if ul.is_false and ur.is_false:
            raise DomainError("product of bounded bornologies is bounded")
        if ur.is_false:
            inv = cardinal_invariants(B.left, horizon)
            return Invariants(inv.add, inv.cov, inv.cof, inv.trace + ("bounded right factor does not change the invariants",))
        if ul.is_false:
            inv = cardinal_invariants(B.right, horizon)
            return Invariants(inv.add, inv.cov, inv.cof, inv.trace + ("bounded left factor does not change the invariants",))
        L, R = cardinal_invariants(B.left, horizon), cardinal_invariants(B.right, horizon)
        return Invariants(
            sym_min(L.add, R.add), sym_max(L.cov, R.cov), sym_max(L.cof, R.cof),
            (
                "add: a family is bounded iff both projections are, so add = min of the factors",
                "cov: projections of a cover cover each factor; products of covers cover the product",
                "cof: rectangles of cofinal families are cofinal and each side needs a cofinal family",
            ),
        )
    u = is_unbounded(B, horizon)
    if u.is_false:
        raise DomainError(f"{B} is bounded; invariants are defined for unbounded bornologies only")
    if u.is_unknown:
        raise DomainError(f"cannot certify that {B} is unbounded")
    if isinstance(B, (FiniteSubsets, ChainBase)) or (isinstance(B, RestrictedBornology) and isinstance(B.inner, (FiniteSubsets, ChainBase))):
        return Invariants(
            ALEPH0, ALEPH0, ALEPH0,
            (
                "finite unions of members are members, so add >= ℵ0",
                "an increasing chain B_0 ⊆ B_1 ⊆ ... is cofinal and covers; its union is not a member, so add <= ℵ0",
                "no finite subfamily covers an unbounded set, so cov >= ℵ0",
            ),
        )
    raise DomainError(f"no invariant rules for {type(B).__name__}")


def has_countable_base(B: BornologyPresentation, horizon: int = DEFAULT_HORIZON) -> Verdict:
    if isinstance(B, (FiniteSubsets, ChainBase, ExplicitBase, Powerset)):
        return Verdict.true(note="countable ground or explicit countable base")
    if isinstance(B, RestrictedBornology):
        return has_countable_base(B.inner, horizon)
    if isinstance(B, ProductOf):
        l, r = has_countable_base(B.left, horizon), has_countable_base(B.right, horizon)
        if l.is_true and r.is_true:
            return Verdict.true(note="diagonal chain of rectangles")
        for side, v in (("left", l), ("right", r)):
            if v.is_false:
                u = is_unbounded(B.right if side == "left" else B.left, horizon)
                if u.is_true or u.is_false:
                    return Verdict.false(note=f"{side} factor needs an uncountable cofinal family")
        return Verdict.unknown(horizon)
    if isinstance(B, Abstract):
        c = compare(B.cof, ALEPH0)
        if c in ("<", "="):
            return Verdict.true(note="cof <= ℵ0")
        if c == ">":
            return Verdict.false(str(B.cof), note="cofinality exceeds ℵ0")
        return Verdict.unknown(horizon)
    return Verdict.unknown(horizon, note="oracle-backed presentation")


def is_finite_subsets(B: BornologyPresentation, horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Does B coincide with the bornology of finite subsets of its carrier?"""
    if isinstance(B, FiniteSubsets):
        return Verdict.true()
    if isinstance(B, ChainBase):
        if B.tail is None:
            return Verdict.true(note="initial segments")
        fin = finiteness(B.tail, horizon)
        if fin.is_false:
            return Verdict.false({"infinite member": str(B.tail)})
        return Verdict.true() if fin.is_true else Verdict.unknown(horizon)
    if isinstance(B, Powerset):
        v = finiteness(B.space, horizon)
        return v
    if isinstance(B, Abstract):
        if compare(B.cof, ALEPH0) == ">":
            return Verdict.false(str(B.cof), note="cof([ω]^<ω) = ℵ0")
        return Verdict.unknown(horizon)
    if isinstance(B, ExplicitBase):
        for m in B.members:
            if finiteness(m, horizon).is_false:
                return Verdict.false({"infinite member": str(m)})
        return Verdict.unknown(horizon)
    return Verdict.unknown(horizon)


# ====================================================================== chain levels

def has_chain(B: BornologyPresentation) -> bool:
    """Does B come with an increasing base B_0 ⊆ B_1 ⊆ ... we can index by n?"""
    if isinstance(B, (FiniteSubsets, ChainBase, Powerset)):
        return True
    return isinstance(B, ExplicitBase) and len(B.members) == 1


def chain_member(B: BornologyPresentation, n: int) -> SetExpr:
    """B_n of the canonical chain (FiniteSubsets: the first n+1 points)."""
    if isinstance(B, ChainBase):
        return B.base_member(n)
    if isinstance(B, FiniteSubsets):
        return ChainBase(B.ground, None, B.carrier).base_member(n)
    if isinstance(B, Powerset):
        return full(B.ground)
    if isinstance(B, ExplicitBase) and len(B.members) == 1:
        return B.members[0]
    raise DomainError(f"{B} has no canonical chain")


def chain_level(B: BornologyPresentation, S, horizon: int = DEFAULT_HORIZON) -> Optional[int]:
    """Least n with S ⊆ B_n; ``S`` may be a SetExpr or an iterable of points."""
    if not isinstance(S, SetExpr):
        S = Finite(tuple(S), B.ground)
    if isinstance(B, Powerset):
        return 0
    if isinstance(B, ExplicitBase) and len(B.members) == 1:
        return 0 if is_subset(S, B.members[0], horizon).is_true else None
    if isinstance(B, FiniteSubsets):
        B = ChainBase(B.ground, None, B.carrier)
    if isinstance(B, ChainBase):
        if B.carrier is not None and not is_subset(S, B.carrier, horizon).is_true:
            return None
        return B.level(S, horizon)
    raise DomainError(f"{B} has no canonical chain")


def index_set(B: BornologyPresentation) -> SetExpr:
    """The set A carrying the bornology."""
    if B.ground is None:
        raise DomainError("abstract bornologies have no concrete index set")
    return B.space
