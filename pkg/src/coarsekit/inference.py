"""Symbolic property inference over construction trees, and its executable cross-check.

Each node gets verdicts for a fixed list of properties. A verdict carries the
chain of rules that produced it in ``note`` (rule names are listed in RULES),
and False verdicts carry the cardinals or structural facts that fired.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .analysis import (
    PreconditionError,
    asymptotically_disjoint,
    is_discrete,
    synthesize_separator,
    ultranormal_search,
)
from .bornology import (
    ALEPH0,
    Abstract,
    BornologyPresentation,
    DomainError,
    FiniteSubsets,
    ProductOf,
    cardinal_invariants,
    compare,
    definitely_different,
    definitely_less,
    has_countable_base,
    index_set,
    is_finite_subsets,
    is_unbounded,
)
from .constructions import (
    AbstractBallean,
    Antidiscrete,
    BalleanExpr,
    BProduct,
    Bouquet,
    Comb,
    Discrete,
    FiniteMetric,
    Macrocube,
    MetricNat,
    Product,
    Subballean,
    build,
    diagonal_witness,
)
from .core import UnsupportedPresentation, bounded_sets, is_bounded, is_connected
from .groundsets import DEFAULT_HORIZON, Verdict, combine, finiteness, is_empty

PROPERTIES = ("bounded", "connected", "metrizable", "normal", "discrete", "antidiscrete", "ultranormal")

RULES = {
    "metric": "a metric presentation has the countable base of its radius balls",
    "countable-base": "metrizable exactly when the coarse structure has a countable base",
    "metrizable-normal": "every metrizable ballean is normal",
    "product-cardinals": "a normal product X × Y has add = cof on both factors and equal across them",
    "product-metrizable": "a product of metrizable balleans is metrizable iff normal iff all but finitely many factors are bounded",
    "subspace": "a subballean of a metrizable ballean is metrizable",
    "bproduct-unbounded": "a B-product of unbounded metrizable pieces is metrizable iff normal iff A is countable and B = [A]^<ω",
    "bproduct-bounded": "a B-product of bounded non-singleton pieces is metrizable iff B has a countable base",
    "bouquet-unbounded": "a B-bouquet of unbounded metrizable pieces is metrizable iff A is countable and B = [A]^<ω",
    "bouquet-bounded": "a B-bouquet of bounded non-singleton pieces is metrizable iff B has a countable base",
    "bouquet-normal": "a bornological bouquet of pointed normal balleans is normal",
    "comb-metrizable": "a comb of metrizable pieces is metrizable when A meets every bounded set of the handle finitely",
    "comb-normal": "a comb of normal pieces is normal",
    "largest-product": "↑ of a product bornology with cov(B_Y) < add(B_X) is not normal",
    "smallest-discrete": "↓B is discrete by definition",
    "largest-antidiscrete": "↑B is antidiscrete by definition",
    "bounded-bornology": "bounded sets of a countably generated structure form a countably generated bornology",
    "finite-sets-bounded": "every pair lies in a bounded set, so the ballean is connected",
    "finitely-many-pieces": "finitely many metrizable pieces glue to a metrizable ballean",
}


class InconsistencyError(RuntimeError):
    """A witness-backed False collided with a rule-derived True."""


@dataclass
class PropertyReport:
    """Verdict per property; ``children`` keeps the sub-reports of the tree."""

    expr: BalleanExpr
    verdicts: dict = field(default_factory=dict)
    children: tuple = ()
    bornology: Optional[BornologyPresentation] = None

    def __getitem__(self, prop) -> Verdict:
        return self.verdicts.get(prop, Verdict.unknown(None, note="no rule applies"))

    def lines(self) -> list:
        out = []
        for p in PROPERTIES:
            v = self[p]
            why = f" [{v.note}]" if v.note else ""
            out.append(f"{p}: {v.label()}{why}")
        return out


def _rule(value: Optional[bool], *rules, witness=None, extra=""):
    for r in rules:
        if r not in RULES:
            raise KeyError(r)
    note = " <- ".join(rules) + (f"; {extra}" if extra else "")
    if value is None:
        return Verdict(None, None, None, note)
    return Verdict(value, witness, None, note)


def _first_rule(v: Verdict) -> str:
    return v.note.split(";")[0].split(" <- ")[0]


# ====================================================================== bornology facts

def _is_bounded_bornology(B) -> Optional[bool]:
    if isinstance(B, Abstract):
        return not B.unbounded
    v = is_unbounded(B)
    return None if v.is_unknown else not v.value


def _invariants(B):
    try:
        return cardinal_invariants(B)
    except DomainError:
        return None


def _index_countable_fin(B) -> Optional[bool]:
    """A countable and B = [A]^<ω (A infinite), as a three-valued fact."""
    if isinstance(B, Abstract):
        if compare(B.cof, ALEPH0) in (">",) or definitely_less(ALEPH0, B.cof):
            return False
        return None
    v = is_finite_subsets(B)
    return None if v.is_unknown else v.value


def _index_infinite(B) -> Optional[bool]:
    if isinstance(B, Abstract):
        return True
    try:
        A = index_set(B)
    except (TypeError, ValueError):
        return None
    v = finiteness(A)
    return None if v.is_unknown else not v.value


def _countable_base(B) -> Optional[bool]:
    v = has_countable_base(B)
    return None if v.is_unknown else v.value


# ====================================================================== node rules

def _bounded_sets_of(expr, rep):
    """Bornology of bounded sets when it is available symbolically."""
    if isinstance(expr, (Discrete, Antidiscrete)):
        return expr.bornology
    if isinstance(expr, AbstractBallean):
        return expr.bornology
    if isinstance(expr, MetricNat):
        from .groundsets import NAT

        return FiniteSubsets(NAT)
    if isinstance(expr, Product) and all(c.bornology is not None for c in rep.children):
        B = rep.children[0].bornology
        for c in rep.children[1:]:
            B = ProductOf(B, c.bornology)
        return B
    return None


def _family_kind(family, reports):
    """'unbounded-metrizable', 'bounded-nonsingleton' or None, from the piece reports."""
    bounded = [r["bounded"] for r in reports]
    metr = [r["metrizable"] for r in reports]
    if all(b.is_false for b in bounded) and all(m.is_true for m in metr):
        return "unbounded-metrizable"
    pieces = [family.uniform] if family.uniform is not None else list(family.members)
    if all(isinstance(p, FiniteMetric) and p.n >= 2 for p in pieces):
        return "bounded-nonsingleton"
    return None


def infer_properties(expr: BalleanExpr) -> PropertyReport:
    """Bottom-up pass assigning each node the strongest rule-derived verdicts."""
    if isinstance(expr, (MetricNat, FiniteMetric)):
        finite = isinstance(expr, FiniteMetric)
        v = {
            "bounded": _rule(finite, "metric", extra="finite" if finite else "unbounded metric"),
            "connected": _rule(True, "finite-sets-bounded"),
            "metrizable": _rule(True, "metric"),
            "normal": _rule(True, "metrizable-normal", "metric"),
        }
        rep = PropertyReport(expr, v)
        rep.bornology = _bounded_sets_of(expr, rep)
        return rep

    if isinstance(expr, Product):
        kids = tuple(infer_properties(f) for f in expr.factors)
        rep = PropertyReport(expr, {}, kids)
        rep.bornology = _bounded_sets_of(expr, rep)
        v = rep.verdicts
        bs = [k["bounded"] for k in kids]
        if all(b.is_true for b in bs):
            v["bounded"] = _rule(True, "finite-sets-bounded", extra="all factors bounded")
        elif any(b.is_false for b in bs):
            v["bounded"] = _rule(False, "finite-sets-bounded", extra="an unbounded factor projects onto an unbounded set")
        if all(k["connected"].is_true for k in kids):
            v["connected"] = _rule(True, "finite-sets-bounded")
        ms = [k["metrizable"] for k in kids]
        if all(m.is_true for m in ms):
            v["metrizable"] = _rule(True, "product-metrizable", extra="finitely many factors")
            v["normal"] = _rule(True, "metrizable-normal", "product-metrizable")
        elif any(m.is_false for m in ms):
            v["metrizable"] = _rule(False, "subspace", extra="a factor is a subballean and is not metrizable")
        clash = _product_cardinal_clash(kids)
        if clash is not None:
            if v.get("normal") is not None and v["normal"].is_true:
                raise InconsistencyError(f"{expr}: normal by rule but {clash}")
            v["normal"] = _rule(False, "product-cardinals", witness=clash, extra=clash)
        return rep

    if isinstance(expr, (BProduct, Macrocube, Bouquet)):
        B = expr.bornology
        if isinstance(expr, Macrocube):
            family_reports = [infer_properties(FiniteMetric(2))]
            kind = "bounded-nonsingleton"
        else:
            fam = expr.family
            pieces = [fam.uniform] if fam.uniform is not None else list(fam.members)
            family_reports = [infer_properties(p) for p in pieces]
            kind = _family_kind(fam, family_reports)
        rep = PropertyReport(expr, {}, tuple(family_reports))
        v = rep.verdicts
        v["connected"] = _rule(True, "finite-sets-bounded")
        infinite = _index_infinite(B)
        bouquet = isinstance(expr, Bouquet)
        if kind == "unbounded-metrizable":
            v["bounded"] = _rule(False, "finite-sets-bounded", extra="contains an unbounded piece")
            rule = "bouquet-unbounded" if bouquet else "bproduct-unbounded"
            if infinite is False:
                v["metrizable"] = _rule(True, "finitely-many-pieces", "countable-base")
            elif infinite is True:
                fin = _index_countable_fin(B)
                if fin is not None:
                    v["metrizable"] = _rule(fin, rule, extra=f"B {'=' if fin else '≠'} [A]^<ω")
                    if not bouquet:
                        v["normal"] = _rule(fin, rule, extra=f"B {'=' if fin else '≠'} [A]^<ω")
        elif kind == "bounded-nonsingleton":
            rule = "bouquet-bounded" if bouquet else "bproduct-bounded"
            cb = _countable_base(B)
            if cb is not None:
                v["metrizable"] = _rule(cb, rule, extra=f"B {'has' if cb else 'lacks'} a countable base")
            bb = _is_bounded_bornology(B)
            if bb is not None and not bouquet:
                v["bounded"] = _rule(bb, "finite-sets-bounded",
                                     extra="supports range over B, so the space is bounded iff A ∈ B")
        if bouquet and all(r["normal"].is_true for r in family_reports):
            v["normal"] = _rule(True, "bouquet-normal", extra="every piece is normal")
        if v.get("metrizable") is not None and v["metrizable"].is_true and "normal" not in v:
            v["normal"] = _rule(True, "metrizable-normal", _first_rule(v["metrizable"]))
        return rep

    if isinstance(expr, Comb):
        H = infer_properties(expr.handle)
        fam = expr.family
        pieces = [fam.uniform] if fam.uniform is not None else list(fam.members)
        kids = [infer_properties(p) for p in pieces]
        rep = PropertyReport(expr, {}, (H,) + tuple(kids))
        v = rep.verdicts
        v["connected"] = _rule(True, "finite-sets-bounded")
        if H["bounded"].is_false:
            v["bounded"] = _rule(False, "finite-sets-bounded", extra="the handle is unbounded")
        if H["metrizable"].is_true and all(k["metrizable"].is_true for k in kids):
            meets = _meets_bounded_finitely(expr.handle, H, expr.spine_index)
            if meets:
                v["metrizable"] = _rule(True, "comb-metrizable",
                                        extra="bounded sets of the handle are finite, so A meets each finitely")
        if H["normal"].is_true and all(k["normal"].is_true for k in kids):
            v["normal"] = _rule(True, "comb-normal", extra="handle and teeth are normal")
        elif v.get("metrizable") is not None and v["metrizable"].is_true:
            v["normal"] = _rule(True, "metrizable-normal", "comb-metrizable")
        return rep

    if isinstance(expr, Discrete):
        B = expr.bornology
        rep = PropertyReport(expr, {}, (), B)
        v = rep.verdicts
        bb = _is_bounded_bornology(B)
        if bb is not None:
            v["bounded"] = _rule(bb, "finite-sets-bounded", extra="the bounded sets are exactly B")
        v["connected"] = _rule(True, "finite-sets-bounded")
        if bb is False:
            v["discrete"] = _rule(True, "smallest-discrete")
        cb = _countable_base(B)
        if cb is not None:
            v["metrizable"] = _rule(cb, "countable-base", "bounded-bornology",
                                    extra=f"B {'has' if cb else 'lacks'} a countable base")
            if cb:
                v["normal"] = _rule(True, "metrizable-normal", "countable-base")
        return rep

    if isinstance(expr, (Antidiscrete, AbstractBallean)):
        B = expr.bornology
        rep = PropertyReport(expr, {}, (), B)
        v = rep.verdicts
        bb = _is_bounded_bornology(B)
        if bb is not None:
            v["bounded"] = _rule(bb, "finite-sets-bounded", extra="the bounded sets are exactly B")
        v["connected"] = _rule(True, "finite-sets-bounded")
        if isinstance(expr, Antidiscrete) and bb is False:
            v["antidiscrete"] = _rule(True, "largest-antidiscrete")
        cb = _countable_base(B)
        if cb is False:
            v["metrizable"] = _rule(False, "countable-base", "bounded-bornology", extra="B lacks a countable base")
        if isinstance(expr, Antidiscrete) and isinstance(B, ProductOf):
            why = _largest_product_clash(B)
            if why is not None:
                v["normal"] = _rule(False, "largest-product", witness=why, extra=why)
        return rep

    if isinstance(expr, Subballean):
        P = infer_properties(expr.parent)
        rep = PropertyReport(expr, {}, (P,))
        if P["metrizable"].is_true:
            rep.verdicts["metrizable"] = _rule(True, "subspace")
            rep.verdicts["normal"] = _rule(True, "metrizable-normal", "subspace")
        if P["bounded"].is_true:
            rep.verdicts["bounded"] = _rule(True, "finite-sets-bounded", extra="inside a bounded ballean")
        return rep

    raise TypeError(f"not a construction: {expr!r}")


def _meets_bounded_finitely(handle_expr, H, A) -> bool:
    if isinstance(handle_expr, MetricNat):
        return True
    B = H.bornology
    if B is None:
        return False
    return is_finite_subsets(B).is_true


def _product_cardinal_clash(kids) -> Optional[str]:
    """Reason the invariants of two unbounded factors cannot all agree, if derivable."""
    invs = []
    for k in kids:
        if k.bornology is None or not k["bounded"].is_false:
            continue
        inv = _invariants(k.bornology)
        if inv is not None:
            invs.append(inv)
    for i, a in enumerate(invs):
        if definitely_different(a.add, a.cof):
            return f"factor {i}: add={a.add} ≠ cof={a.cof}"
        for b in invs[i + 1:]:
            for name in ("add", "cof"):
                x, y = getattr(a, name), getattr(b, name)
                if definitely_different(x, y):
                    return f"{name}={x} on one factor ≠ {name}={y} on another"
            if definitely_different(a.add, b.cof):
                return f"add={a.add} ≠ cof={b.cof}"
    return None


def _largest_product_clash(B: ProductOf) -> Optional[str]:
    for X, Y in ((B.left, B.right), (B.right, B.left)):
        if _is_bounded_bornology(X) is not False or _is_bounded_bornology(Y) is not False:
            continue
        ix, iy = _invariants(X), _invariants(Y)
        if ix is None or iy is None:
            continue
        if definitely_less(iy.cov, ix.add):
            return f"cov={iy.cov} < add={ix.add}"
    return None


# ====================================================================== executable cross-check

def countable_base_check(X) -> Verdict:
    """Executable countable-base detection: structural chain, or a diagonal witness."""
    if X.cofinal:
        return Verdict.true(note="probe chain is a base by construction")
    wit = diagonal_witness(X)
    if wit is not None:
        ok = all(X.distance(*w["pair"], limit=1 << 62) > w["n"] for w in wit)
        if ok:
            return Verdict.false(wit[:3], note="diagonal entourage escapes every probe")
    return Verdict.unknown(None)


@dataclass
class CheckRecord:
    prop: str
    rule: Verdict
    check: Verdict
    detail: str = ""

    @property
    def inconsistent(self) -> bool:
        return (self.rule.is_true and self.check.is_false) or (self.rule.is_false and self.check.is_true)

    @property
    def verified(self) -> bool:
        return not self.rule.is_unknown and self.rule.value == self.check.value


@dataclass
class CrossReport:
    name: str
    records: list = field(default_factory=list)
    skipped: str = ""

    @property
    def inconsistencies(self) -> list:
        return [r for r in self.records if r.inconsistent]

    def lines(self) -> list:
        if self.skipped:
            return [f"{self.name}\t-\tSKIPPED ({self.skipped})"]
        out = []
        for r in self.records:
            tag = "INCONSISTENT" if r.inconsistent else ("agree" if r.verified else "unverified")
            out.append(f"{self.name}\t{r.prop}\trule={r.rule.label()} check={r.check.label()}\t{tag}"
                       + (f"\t{r.detail}" if r.detail else ""))
        return out


def cross_validate(name: str, expr: BalleanExpr, catalog=(), horizon: int = DEFAULT_HORIZON) -> CrossReport:
    """Compare rule-derived verdicts with executable checks on the built presentation."""
    report = CrossReport(name)
    rep = infer_properties(expr)
    try:
        X = build(expr)
    except UnsupportedPresentation as exc:
        report.skipped = str(exc)
        # still record the rule-only verdicts against an Unknown check
        for p in PROPERTIES:
            if not rep[p].is_unknown:
                report.records.append(CheckRecord(p, rep[p], Verdict.unknown(horizon), "symbolic only"))
        return report
    rec = report.records.append
    rec(CheckRecord("bounded", rep["bounded"], is_bounded(X, X.full_set, horizon)))
    rec(CheckRecord("connected", rep["connected"], is_connected(X, horizon)))
    rec(CheckRecord("metrizable", rep["metrizable"], countable_base_check(X)))
    if rep["bounded"].is_false:
        rec(CheckRecord("discrete", rep["discrete"], is_discrete(X, min(horizon, 2048))))
    pairs = [(a, b) for i, (_, a) in enumerate(catalog) for (_, b) in catalog[i + 1:]]
    if rep["normal"].is_true:
        for (na, a), (nb, b) in [(p, q) for i, p in enumerate(catalog) for q in catalog[i + 1:]]:
            if is_empty(combine(a, b, "intersection"), horizon).is_false:
                continue
            d = asymptotically_disjoint(X, a, b, horizon)
            if not d.is_true:
                continue
            try:
                f = synthesize_separator(X, a, b, horizon)
            except PreconditionError as exc:
                rec(CheckRecord("normal", rep["normal"], Verdict.unknown(horizon, note=str(exc)), f"{na}|{nb}"))
                continue
            checks = f.meta["verification"]
            slow = [v for k, v in checks.items() if k.startswith("slow")]
            if not (checks["Y->0"] and checks["Z->1"]) or any(v.is_false for v in slow):
                cv = Verdict.false(f.name, note="separator failed verification")
            elif all(v.is_true for v in slow):
                cv = Verdict.true(f.name, note="separator verified")
            else:
                cv = Verdict.unknown(horizon)
            rec(CheckRecord("normal", rep["normal"], cv, f"{na}|{nb}"))
    if catalog and pairs:
        rec(CheckRecord("ultranormal", rep["ultranormal"], ultranormal_search(X, catalog, horizon)))
    return report
