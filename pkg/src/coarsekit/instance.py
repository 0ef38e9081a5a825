"""Instance documents: named declarations plus directives, in tree syntax.

Every object the CLI can name has a textual form here; the ``*_term``
functions invert the compilers on the objects they accept:

    sets        (finite 1 2 3) (ap period 2 residue 0) (gen pow4) (union A B)
                (inter A B) (diff A B) (complement A) (tagged TAG A) (rect A B)
    bornologies (finite-subsets omega) (chain omega tail S) (powerset (points 2))
                (abstract add aleph0 cov aleph0 cof ge-aleph1) (product-of B C)
    balleans    (metric-nat) (down B) (up B (doubling)) (b-product B (rays))
                (bouquet B F) (comb X A F) (macrocube B) (product X Y) (sub X S)
    functions   (constant 1/2) (parity) (log-wave) (ratio Y Z) (indicator Z)

A document is a sequence of ``(def NAME TERM)`` declarations and directives such
as ``(check asymptotically-disjoint Y Z :space X)``. Names must be declared
before use.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .analysis import SlowFunction, constant, indicator_separator, log_wave, metric_separator, parity
from .bornology import (
    ALEPH0,
    AT_LEAST_ALEPH1,
    Abstract,
    ChainBase,
    ExplicitBase,
    FiniteSubsets,
    Powerset,
    ProductOf,
    SymCard,
    parse_card,
)
from .constructions import (
    AbstractBallean,
    Antidiscrete,
    BalleanExpr,
    BProduct,
    Bouquet,
    Comb,
    Discrete,
    Family,
    FiniteMetric,
    Macrocube,
    MetricNat,
    Product,
    Subballean,
    doubling_relation,
    shift_relation,
)
from .core import BallMap, FiniteRelation
from .groundsets import (
    NAT,
    Complement,
    EventuallyPeriodic,
    Finite,
    FinitePoints,
    GroundSet,
    Intersection,
    Naturals,
    Rectangle,
    SparseGenerator,
    Tagged,
    TupleSpace,
    Union,
    ap,
    combine,
    full,
    part_ground,
)
from .sexpr import Node, ParseError, Symbol, parse, render, render_all, sym

SET_HEADS = {"finite", "interval", "ap", "ep", "gen", "union", "inter", "diff", "complement", "full", "empty",
             "tagged", "rect"}
BORNOLOGY_HEADS = {"finite-subsets", "chain", "powerset", "base", "abstract", "product-of"}
BALLEAN_HEADS = {"metric-nat", "finite-metric", "down", "up", "abstract-ballean", "product", "b-product",
                 "macrocube", "bouquet", "comb", "sub"}
FAMILY_HEADS = {"rays", "family", "members"}
FUNCTION_HEADS = {"constant", "parity", "log-wave", "ratio", "indicator"}
RELATION_HEADS = {"doubling", "shift", "pairs"}
COMMANDS = ("check", "infer", "separate", "invariants", "enumerate-finite", "cross-validate")

KINDS = {}
for _k, _heads in (("set", SET_HEADS), ("bornology", BORNOLOGY_HEADS), ("ballean", BALLEAN_HEADS),
                   ("family", FAMILY_HEADS), ("function", FUNCTION_HEADS), ("relation", RELATION_HEADS)):
    for _h in _heads:
        KINDS[_h] = _k


class InstanceError(ParseError):
    """A well-formed tree that does not denote a valid object (unknown label, arity, unresolved name)."""


def _err(msg, term=None, parent=None, i=None):
    if isinstance(term, Node):
        line, col = term.where()
    elif isinstance(parent, Node):
        line, col = parent.where(i)
    else:
        line = col = None
    return InstanceError(msg, line, col)


def kind_of(term, env=None) -> Optional[str]:
    """The declaration kind a term denotes, from its head label or a declared name."""
    if isinstance(term, Node) and term.head is not None:
        return KINDS.get(str(term.head))
    if isinstance(term, Symbol) and env is not None and str(term) in env:
        return env[str(term)].kind
    return None


# ====================================================================== argument helpers

def _split_args(n: Node, keys=()):
    """Positional children and ``key value`` pairs (keys are bare symbols from ``keys``)."""
    pos, kw, i = [], {}, 1
    while i < len(n):
        t = n[i]
        if isinstance(t, Symbol) and str(t) in keys:
            if i + 1 >= len(n):
                raise _err(f"'{t}' needs a value", parent=n, i=i)
            kw[str(t)] = (n[i + 1], i + 1)
            i += 2
        else:
            pos.append((t, i))
            i += 1
    return pos, kw


def _arity(n: Node, pos, lo, hi=None):
    hi = lo if hi is None else hi
    if not lo <= len(pos) <= (hi if hi >= 0 else len(pos)):
        want = f"{lo}" if lo == hi else f"{lo}..{hi if hi >= 0 else ''}"
        raise _err(f"({n.head} ...) takes {want} arguments, got {len(pos)}", n)


def _int(t, parent=None, i=None):
    if isinstance(t, bool) or not isinstance(t, int):
        raise _err(f"expected an integer, got {render(t)}", t, parent, i)
    return t


def _nat(t, parent=None, i=None):
    v = _int(t, parent, i)
    if v < 0:
        raise _err(f"expected a natural number, got {v}", t, parent, i)
    return v


def _atom_value(t):
    """Point literals: integers, symbols (tags, the glued point) and nested tuples."""
    if isinstance(t, tuple):
        return tuple(_atom_value(x) for x in t)
    if isinstance(t, Symbol):
        return str(t)
    return t


def _value_term(x):
    if isinstance(x, tuple):
        return Node(tuple(_value_term(v) for v in x))
    if isinstance(x, str):
        return sym(x)
    if isinstance(x, bool) or not isinstance(x, int):
        raise TypeError(f"no textual form for point {x!r}")
    return int(x)


# ====================================================================== grounds

def compile_ground(t, parent=None, i=None) -> GroundSet:
    if isinstance(t, Symbol) and str(t) in ("omega", "nat"):
        return NAT
    if isinstance(t, Node) and t.head == "points":
        if len(t) != 2:
            raise _err("(points n) takes one argument", t)
        return FinitePoints(_int(t[1], t, 1))
    raise _err(f"expected a ground set (omega or (points n)), got {render(t)}", t, parent, i)


def ground_term(g: GroundSet):
    if isinstance(g, Naturals):
        return sym("omega")
    if isinstance(g, FinitePoints):
        return Node((sym("points"), g.n))
    raise TypeError(f"ground {g} has no textual form")


def _is_ground(t):
    return (isinstance(t, Symbol) and str(t) in ("omega", "nat")) or (isinstance(t, Node) and t.head == "points")


# ====================================================================== environment

@dataclass
class Declaration:
    name: str
    kind: str
    term: Any
    value: Any = None  # compiled object (sets stay terms until a ground is known)
    pos: tuple = (None, None)


class Env(dict):
    """name -> Declaration, filled in document order."""

    def lookup(self, t, kind, parent=None, i=None):
        d = self.get(str(t))
        if d is None:
            raise _err(f"unresolved name {t!s}", t, parent, i)
        if d.kind != kind:
            raise _err(f"{t!s} is a {d.kind}, expected a {kind}", t, parent, i)
        return d


# ====================================================================== sets

def compile_set(t, ground: GroundSet = NAT, env: Optional[Env] = None, parent=None, i=None):
    env = env if env is not None else Env()
    if isinstance(t, Symbol):
        d = env.lookup(t, "set", parent, i)
        return compile_set(d.term, ground, env)
    if not isinstance(t, Node) or t.head is None:
        raise _err(f"expected a set, got {render(t)}", t, parent, i)
    h = str(t.head)
    if h not in SET_HEADS:
        raise _err(f"unknown set label '{h}'", t)
    try:
        return _compile_set(t, h, ground, env)
    except (ParseError, KeyError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise _err(str(exc).strip("'\""), t) from None
    except (ValueError, TypeError) as exc:
        raise _err(str(exc), t) from None


def _compile_set(t, h, ground, env):
    if h == "finite":
        return Finite(tuple(_atom_value(x) for x in t[1:]), ground)
    if h == "interval":
        pos, _ = _split_args(t)
        _arity(t, pos, 2)
        lo, hi = _nat(pos[0][0], t, 1), _nat(pos[1][0], t, 2)
        return Finite(tuple(range(lo, hi + 1)), ground)
    if h in ("ap", "ep", "gen"):
        if not isinstance(ground, Naturals):
            raise _err(f"({h} ...) lives on omega, not on {ground}", t)
    if h == "ap":
        pos, kw = _split_args(t, ("period", "residue"))
        vals = [v for v, _ in pos]
        if "period" in kw:
            vals.insert(0, kw["period"][0])
        if "residue" in kw:
            vals.append(kw["residue"][0])
        if len(vals) != 2:
            raise _err("(ap period p residue r) needs a period and a residue", t)
        p, r = _int(vals[0], t), _int(vals[1], t)
        if p < 1:
            raise _err("period must be positive", t)
        return ap(p, r)
    if h == "ep":
        _, kw = _split_args(t, ("prelude", "period", "residues", "threshold"))
        pre = kw.get("prelude", (Node(()), 0))[0]
        res = kw.get("residues", (Node(()), 0))[0]
        if not isinstance(pre, tuple) or not isinstance(res, tuple):
            raise _err("prelude and residues are lists", t)
        return EventuallyPeriodic(frozenset(_nat(x, t) for x in pre), _int(kw.get("period", (1, 0))[0], t),
                                  frozenset(_int(x, t) for x in res), _nat(kw.get("threshold", (0, 0))[0], t))
    if h == "gen":
        if len(t) != 2 or not isinstance(t[1], (Symbol, str)):
            raise _err("(gen NAME) takes one generator name", t)
        return SparseGenerator(str(t[1]))
    if h in ("union", "inter"):
        if len(t) < 2:
            raise _err(f"({h} ...) needs at least one part", t)
        parts = tuple(compile_set(x, ground, env, t, k) for k, x in enumerate(t[1:], 1))
        if len(parts) == 1:
            return parts[0]
        return Union(parts) if h == "union" else Intersection(parts)
    if h == "diff":
        if len(t) != 3:
            raise _err("(diff A B) takes two sets", t)
        return combine(compile_set(t[1], ground, env, t, 1), compile_set(t[2], ground, env, t, 2), "difference")
    if h == "complement":
        if len(t) != 2:
            raise _err("(complement A) takes one set", t)
        return Complement(compile_set(t[1], ground, env, t, 1))
    if h == "full":
        return full(ground)
    if h == "empty":
        return Finite((), ground)
    if h == "tagged":
        if len(t) != 3:
            raise _err("(tagged TAG A) takes a tag and a set", t)
        tag = _atom_value(t[1])
        return Tagged(tag, compile_set(t[2], part_ground(ground, tag), env, t, 2), ground)
    if h == "rect":
        if not isinstance(ground, TupleSpace) or len(ground.components) != len(t) - 1:
            raise _err("(rect ...) needs a product ground with one set per factor", t)
        return Rectangle(tuple(compile_set(x, g, env, t, k)
                               for k, (x, g) in enumerate(zip(t[1:], ground.components), 1)))
    raise _err(f"unknown set label '{h}'", t)


def set_term(S) -> Node:
    """Textual form of a set (its ground is supplied by the context)."""
    if isinstance(S, Finite):
        return Node((sym("finite"),) + tuple(_value_term(x) for x in S.elements))
    if isinstance(S, EventuallyPeriodic):
        if not S.prelude and S.threshold == 0 and len(S.residues) == 1:
            r = next(iter(S.residues))
            if ap(S.period, r) == S:
                return Node((sym("ap"), sym("period"), S.period, sym("residue"), r))
        return Node((sym("ep"), sym("prelude"), Node(tuple(sorted(S.prelude))), sym("period"), S.period,
                     sym("residues"), Node(tuple(sorted(S.residues))), sym("threshold"), S.threshold))
    if isinstance(S, SparseGenerator):
        return Node((sym("gen"), sym(S.name)))
    if isinstance(S, Union):
        return Node((sym("union"),) + tuple(set_term(p) for p in S.parts))
    if isinstance(S, Intersection):
        return Node((sym("inter"),) + tuple(set_term(p) for p in S.parts))
    if isinstance(S, Complement):
        return Node((sym("complement"), set_term(S.inner)))
    if isinstance(S, Tagged):
        return Node((sym("tagged"), _value_term(S.tag), set_term(S.inner)))
    if isinstance(S, Rectangle):
        return Node((sym("rect"),) + tuple(set_term(c) for c in S.components))
    raise TypeError(f"{S} has no textual form")


# ====================================================================== bornologies and cardinals

def compile_card(t, parent=None, i=None) -> SymCard:
    if isinstance(t, bool):
        raise _err("expected a cardinal", t, parent, i)
    if isinstance(t, int):
        return parse_card(str(t))
    if isinstance(t, (Symbol, str)):
        return parse_card(str(t))
    if isinstance(t, Node) and t.head == "declared" and len(t) in (2, 3):
        from .bornology import Declared

        return Declared(str(t[1]), str(t[2]).replace("-", "_") if len(t) == 3 else "ge_aleph1")
    raise _err(f"expected a cardinal, got {render(t)}", t, parent, i)


def card_term(c: SymCard):
    if c.kind == "fin":
        return c.n
    if c == ALEPH0:
        return sym("aleph0")
    if c == AT_LEAST_ALEPH1:
        return sym("ge-aleph1")
    if c.lower == "ge_aleph1" and parse_card(c.name) == c:
        return sym(c.name)
    return Node((sym("declared"), c.name, sym(c.lower.replace("_", "-"))))


def compile_bornology(t, env: Optional[Env] = None, parent=None, i=None):
    env = env if env is not None else Env()
    if isinstance(t, Symbol):
        return env.lookup(t, "bornology", parent, i).value
    if not isinstance(t, Node) or t.head is None:
        raise _err(f"expected a bornology, got {render(t)}", t, parent, i)
    h = str(t.head)
    if h not in BORNOLOGY_HEADS:
        raise _err(f"unknown bornology label '{h}'", t)
    try:
        return _compile_bornology(t, h, env)
    except ParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise _err(f"{type(exc).__name__}: {exc}", t) from None


def _ground_and_rest(t, keys):
    pos, kw = _split_args(t, keys)
    g = NAT
    if pos and _is_ground(pos[0][0]):
        g = compile_ground(pos[0][0], t, pos[0][1])
        pos = pos[1:]
    return g, pos, kw


def _compile_bornology(t, h, env):
    if h == "finite-subsets":
        g, pos, kw = _ground_and_rest(t, ("carrier",))
        _arity(t, pos, 0)
        carrier = compile_set(kw["carrier"][0], g, env, t, kw["carrier"][1]) if "carrier" in kw else None
        return FiniteSubsets(g, carrier)
    if h == "chain":
        g, pos, kw = _ground_and_rest(t, ("tail", "carrier"))
        _arity(t, pos, 0)
        tail = compile_set(kw["tail"][0], g, env, t, kw["tail"][1]) if "tail" in kw else None
        carrier = compile_set(kw["carrier"][0], g, env, t, kw["carrier"][1]) if "carrier" in kw else None
        return ChainBase(g, tail, carrier)
    if h == "powerset":
        g, pos, _ = _ground_and_rest(t, ())
        _arity(t, pos, 0)
        return Powerset(g)
    if h == "base":
        g, pos, _ = _ground_and_rest(t, ())
        _arity(t, pos, 1, -1)
        return ExplicitBase(g, tuple(compile_set(x, g, env, t, k) for x, k in pos))
    if h == "abstract":
        pos, kw = _split_args(t, ("add", "cov", "cof", "name"))
        flags = {str(x) for x, _ in pos if isinstance(x, Symbol)}
        if len(pos) != len(flags) or not flags <= {"bounded"}:
            raise _err("(abstract add C cov C cof C [name N] [bounded])", t)
        cards = {}
        for k in ("add", "cov", "cof"):
            if k not in kw:
                raise _err(f"(abstract ...) needs '{k}'", t)
            cards[k] = compile_card(kw[k][0], t, kw[k][1])
        name = str(kw["name"][0]) if "name" in kw else "abstract"
        return Abstract(cards["add"], cards["cov"], cards["cof"], name, "bounded" not in flags)
    if h == "product-of":
        pos, _ = _split_args(t)
        _arity(t, pos, 2)
        return ProductOf(compile_bornology(pos[0][0], env, t, 1), compile_bornology(pos[1][0], env, t, 2))
    raise _err(f"unknown bornology label '{h}'", t)


def bornology_term(B) -> Node:
    if isinstance(B, FiniteSubsets):
        out = [sym("finite-subsets"), ground_term(B.ground)]
        if B.carrier is not None:
            out += [sym("carrier"), set_term(B.carrier)]
        return Node(tuple(out))
    if isinstance(B, ChainBase):
        out = [sym("chain"), ground_term(B.ground)]
        if B.tail is not None:
            out += [sym("tail"), set_term(B.tail)]
        if B.carrier is not None:
            out += [sym("carrier"), set_term(B.carrier)]
        return Node(tuple(out))
    if isinstance(B, Powerset):
        return Node((sym("powerset"), ground_term(B.ground)))
    if isinstance(B, ExplicitBase):
        return Node((sym("base"), ground_term(B.ground)) + tuple(set_term(m) for m in B.members))
    if isinstance(B, Abstract):
        out = [sym("abstract"), sym("add"), card_term(B.add), sym("cov"), card_term(B.cov),
               sym("cof"), card_term(B.cof)]
        if B.name != "abstract":
            out += [sym("name"), sym(B.name) if re.fullmatch(r"[A-Za-z][\w-]*", B.name) else B.name]
        if not B.unbounded:
            out.append(sym("bounded"))
        return Node(tuple(out))
    if isinstance(B, ProductOf):
        return Node((sym("product-of"), bornology_term(B.left), bornology_term(B.right)))
    raise TypeError(f"{B} has no textual form")


# ====================================================================== relations, families, balleans

_SHIFT = re.compile(r"n->n\+(\d+)\Z")


def compile_relation(t, env: Optional[Env] = None, parent=None, i=None):
    env = env if env is not None else Env()
    if isinstance(t, Symbol):
        return env.lookup(t, "relation", parent, i).value
    if not isinstance(t, Node) or str(t.head) not in RELATION_HEADS:
        raise _err(f"expected a relation ((doubling), (shift k) or (pairs ...)), got {render(t)}", t, parent, i)
    h = str(t.head)
    if h == "doubling":
        if len(t) != 1:
            raise _err("(doubling) takes no arguments", t)
        return doubling_relation()
    if h == "shift":
        if len(t) != 2:
            raise _err("(shift k) takes one argument", t)
        k = _int(t[1], t, 1)
        if k < 1:
            raise _err("shift must be positive", t)
        return shift_relation(k)
    pairs = []
    for k, p in enumerate(t[1:], 1):
        if not isinstance(p, tuple) or len(p) != 2:
            raise _err("(pairs (a b) ...) lists pairs", p, t, k)
        pairs.append((_nat(p[0], p), _nat(p[1], p)))
    return FiniteRelation(frozenset(pairs), NAT)


def relation_term(E) -> Node:
    if isinstance(E, BallMap):
        if E.name == "n->2n":
            return Node((sym("doubling"),))
        m = _SHIFT.match(E.name)
        if m:
            return Node((sym("shift"), int(m.group(1))))
    if isinstance(E, FiniteRelation) and isinstance(E.ground, Naturals):
        return Node((sym("pairs"),) + tuple(Node(p) for p in sorted(E.pairs)))
    raise TypeError(f"{E!r} has no textual form")


def compile_family(t, env: Optional[Env] = None, parent=None, i=None) -> Family:
    env = env if env is not None else Env()
    if isinstance(t, Symbol):
        return env.lookup(t, "family", parent, i).value
    if not isinstance(t, Node) or str(t.head) not in FAMILY_HEADS:
        raise _err(f"expected a family ((rays), (family X) or (members X ...)), got {render(t)}", t, parent, i)
    h = str(t.head)
    if h == "rays":
        if len(t) != 1:
            raise _err("(rays) takes no arguments", t)
        return Family(MetricNat())
    if h == "family":
        if len(t) != 2:
            raise _err("(family X) takes one ballean", t)
        return Family(compile_ballean(t[1], env, t, 1))
    if len(t) < 2:
        raise _err("(members X ...) needs at least one ballean", t)
    return Family(None, tuple(compile_ballean(x, env, t, k) for k, x in enumerate(t[1:], 1)))


def family_term(F: Family) -> Node:
    if F.uniform is not None:
        if F.uniform == MetricNat():
            return Node((sym("rays"),))
        return Node((sym("family"), ballean_term(F.uniform)))
    return Node((sym("members"),) + tuple(ballean_term(m) for m in F.members))


def compile_ballean(t, env: Optional[Env] = None, parent=None, i=None) -> BalleanExpr:
    env = env if env is not None else Env()
    if isinstance(t, Symbol):
        return env.lookup(t, "ballean", parent, i).value
    if not isinstance(t, Node) or t.head is None:
        raise _err(f"expected a ballean, got {render(t)}", t, parent, i)
    h = str(t.head)
    if h not in BALLEAN_HEADS:
        raise _err(f"unknown ballean label '{h}'", t)
    try:
        return _compile_ballean(t, h, env)
    except ParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise _err(f"{type(exc).__name__}: {exc}", t) from None


def _compile_ballean(t, h, env):
    pos, kw = _split_args(t, ("name",))
    if h == "metric-nat":
        _arity(t, pos, 0)
        return MetricNat()
    if h == "finite-metric":
        _arity(t, pos, 1)
        return FiniteMetric(_int(pos[0][0], t, 1))
    if h == "down":
        _arity(t, pos, 1)
        return Discrete(compile_bornology(pos[0][0], env, t, 1))
    if h == "up":
        _arity(t, pos, 1, -1)
        B = compile_bornology(pos[0][0], env, t, 1)
        return Antidiscrete(B, tuple(compile_relation(x, env, t, k) for x, k in pos[1:]))
    if h == "abstract-ballean":
        _arity(t, pos, 1)
        B = compile_bornology(pos[0][0], env, t, 1)
        if not isinstance(B, Abstract):
            raise _err("(abstract-ballean B) needs an abstract bornology", t)
        return AbstractBallean(B, str(kw["name"][0]) if "name" in kw else "X")
    if h == "product":
        _arity(t, pos, 1, -1)
        return Product(tuple(compile_ballean(x, env, t, k) for x, k in pos))
    if h in ("b-product", "bouquet"):
        _arity(t, pos, 2)
        B = compile_bornology(pos[0][0], env, t, 1)
        F = compile_family(pos[1][0], env, t, 2)
        return BProduct(B, F) if h == "b-product" else Bouquet(B, F)
    if h == "macrocube":
        _arity(t, pos, 1)
        return Macrocube(compile_bornology(pos[0][0], env, t, 1))
    if h == "comb":
        _arity(t, pos, 3)
        X = compile_ballean(pos[0][0], env, t, 1)
        if not isinstance(X, (MetricNat, Discrete, Antidiscrete)):
            raise _err("the comb handle must live on omega", t)
        return Comb(X, compile_set(pos[1][0], NAT, env, t, 2), compile_family(pos[2][0], env, t, 3))
    if h == "sub":
        _arity(t, pos, 2)
        X = compile_ballean(pos[0][0], env, t, 1)
        return Subballean(X, _SetTerm(pos[1][0], env))
    raise _err(f"unknown ballean label '{h}'", t)


class _SetTerm:
    """Placeholder resolved once the parent's ground is known (see ``resolve_subsets``)."""

    def __init__(self, term, env):
        self.term, self.env = term, env


def resolve_subsets(expr):
    """Compile deferred subset terms of Subballean nodes against their parent grounds."""
    from .constructions import build

    if isinstance(expr, Subballean) and isinstance(expr.subset, _SetTerm):
        parent = resolve_subsets(expr.parent)
        S = compile_set(expr.subset.term, build(parent).ground, expr.subset.env)
        return Subballean(parent, S)
    return expr


def ballean_term(X: BalleanExpr) -> Node:
    if isinstance(X, MetricNat):
        return Node((sym("metric-nat"),))
    if isinstance(X, FiniteMetric):
        return Node((sym("finite-metric"), X.n))
    if isinstance(X, Discrete):
        return Node((sym("down"), bornology_term(X.bornology)))
    if isinstance(X, Antidiscrete):
        return Node((sym("up"), bornology_term(X.bornology)) + tuple(relation_term(w) for w in X.witnesses))
    if isinstance(X, AbstractBallean):
        out = (sym("abstract-ballean"), bornology_term(X.bornology))
        return Node(out + ((sym("name"), sym(X.name)) if X.name != "X" else ()))
    if isinstance(X, Product):
        return Node((sym("product"),) + tuple(ballean_term(f) for f in X.factors))
    if isinstance(X, BProduct):
        return Node((sym("b-product"), bornology_term(X.bornology), family_term(X.family)))
    if isinstance(X, Bouquet):
        return Node((sym("bouquet"), bornology_term(X.bornology), family_term(X.family)))
    if isinstance(X, Macrocube):
        return Node((sym("macrocube"), bornology_term(X.bornology)))
    if isinstance(X, Comb):
        return Node((sym("comb"), ballean_term(X.handle), set_term(X.spine_index), family_term(X.family)))
    if isinstance(X, Subballean):
        return Node((sym("sub"), ballean_term(X.parent), set_term(X.subset)))
    raise TypeError(f"{X} has no textual form")


# ====================================================================== functions

@dataclass
class FunctionSpec:
    """A user function: compiled lazily because set arguments need the space's ground."""

    term: Any
    env: Any = None

    def compile(self, ground: GroundSet = NAT) -> SlowFunction:
        return compile_function(self.term, ground, self.env)


def compile_function(t, ground: GroundSet = NAT, env: Optional[Env] = None, parent=None, i=None) -> SlowFunction:
    env = env if env is not None else Env()
    if isinstance(t, Symbol):
        return env.lookup(t, "function", parent, i).value.compile(ground)
    if not isinstance(t, Node) or str(t.head) not in FUNCTION_HEADS:
        raise _err(f"expected a function, got {render(t)}", t, parent, i)
    h = str(t.head)
    if h == "constant":
        if len(t) != 2 or not isinstance(t[1], (int, Fraction)) or not 0 <= t[1] <= 1:
            raise _err("(constant c) takes a value in [0, 1]", t)
        return constant(t[1])
    if h in ("parity", "log-wave"):
        if len(t) != 1:
            raise _err(f"({h}) takes no arguments", t)
        if not isinstance(ground, Naturals):
            raise _err(f"({h}) is defined on omega", t)
        return parity() if h == "parity" else log_wave()
    if h == "ratio":
        if len(t) != 3 or not isinstance(ground, Naturals):
            raise _err("(ratio Y Z) takes two sets of omega", t)
        return metric_separator(compile_set(t[1], ground, env, t, 1), compile_set(t[2], ground, env, t, 2))
    if len(t) != 2:
        raise _err("(indicator Z) takes one set", t)
    Z = compile_set(t[1], ground, env, t, 1)
    return indicator_separator(Z, Finite((), ground))


# ====================================================================== documents

@dataclass
class InstanceDocument:
    declarations: dict = field(default_factory=dict)  # name -> Declaration, in order
    directives: list = field(default_factory=list)

    @property
    def env(self) -> Env:
        return self.declarations

    def terms(self) -> list:
        out = [Node((sym("def"), sym(d.name), d.term)) for d in self.declarations.values()]
        return out + list(self.directives)

    def names(self, kind=None) -> list:
        return [n for n, d in self.declarations.items() if kind is None or d.kind == kind]

    def ballean(self, ref) -> BalleanExpr:
        return resolve_subsets(compile_ballean(_as_term(ref), self.env))

    def bornology(self, ref):
        return compile_bornology(_as_term(ref), self.env)

    def set(self, ref, ground: GroundSet = NAT):
        return compile_set(_as_term(ref), ground, self.env)

    def function(self, ref, ground: GroundSet = NAT) -> SlowFunction:
        return compile_function(_as_term(ref), ground, self.env)

    def kind(self, ref) -> Optional[str]:
        return kind_of(_as_term(ref), self.env)

    def __eq__(self, other):
        return isinstance(other, InstanceDocument) and self.terms() == other.terms()


def _as_term(ref):
    """A declared name, a term, or source text for one term."""
    if isinstance(ref, (Node, Symbol)):
        return ref
    if isinstance(ref, str):
        from .sexpr import parse_one

        return parse_one(ref)
    return ref


def _declare(env: Env, t: Node):
    if len(t) != 3 or not isinstance(t[1], Symbol):
        raise _err("(def NAME TERM) takes a name and a term", t)
    name, body = str(t[1]), t[2]
    if name in env:
        raise _err(f"{name} is already declared", t, t, 1)
    if name in KINDS or name in COMMANDS or name in ("def", "omega", "nat"):
        raise _err(f"{name} is a reserved label", t, t, 1)
    kind = kind_of(body, env)
    if kind is None:
        if isinstance(body, Symbol):
            raise _err(f"unresolved name {body}", body, t, 2)
        label = body.head if isinstance(body, Node) else render(body)
        raise _err(f"unknown node label '{label}'", body, t, 2)
    d = Declaration(name, kind, body, None, t.where())
    if isinstance(body, Symbol):  # alias
        d.term, d.value = env[str(body)].term, env[str(body)].value
    elif kind == "set":
        if not _needs_context(body):
            compile_set(body, NAT, env, t, 2)  # type-check on omega now
    elif kind == "bornology":
        d.value = compile_bornology(body, env, t, 2)
    elif kind == "ballean":
        d.value = compile_ballean(body, env, t, 2)
    elif kind == "family":
        d.value = compile_family(body, env, t, 2)
    elif kind == "relation":
        d.value = compile_relation(body, env, t, 2)
    elif kind == "function":
        d.value = FunctionSpec(body, env)
        if not _needs_context(body):
            d.value.compile(NAT)
    env[name] = d


def _needs_context(t) -> bool:
    """Terms whose ground is only fixed by the space they are used in."""
    if isinstance(t, Node):
        if t.head in ("tagged", "rect", "full", "empty", "finite", "complement", "indicator", "constant"):
            return True
        return any(_needs_context(x) for x in t[1:])
    return False


def parse_document(text: str) -> InstanceDocument:
    doc = InstanceDocument(Env())
    for t in parse(text):
        if not isinstance(t, Node) or t.head is None:
            line, col = t.where() if isinstance(t, Node) else (None, None)
            raise InstanceError(f"top-level items are (def ...) or directives, got {render(t)}", line, col)
        if t.head == "def":
            _declare(doc.env, t)
        elif t.head in COMMANDS:
            _check_directive(doc.env, t)
            doc.directives.append(t)
        else:
            raise _err(f"unknown node label '{t.head}'", t)
    return doc


def _check_directive(env, t):
    """Names used by a directive must already be declared."""
    for k, x in enumerate(t[1:], 1):
        if isinstance(x, Symbol) and not str(x).startswith(":") and k > (1 if t.head == "check" else 0):
            if str(x) not in env:
                raise _err(f"unresolved name {x}", x, t, k)


def render_document(doc: InstanceDocument) -> str:
    return render_all(doc.terms())


def directive(command: str, *args, **options) -> Node:
    """Build a directive term; options become ``:key value`` pairs."""
    items = [sym(command)] + [_as_term(a) if isinstance(a, str) else a for a in args]
    for k, v in options.items():
        items += [sym(":" + k.replace("_", "-")), v]
    return Node(tuple(items))
