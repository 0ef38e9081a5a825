from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.bornology import ALEPH0, AT_LEAST_ALEPH1, Abstract, FiniteSubsets
from coarsekit.constructions import Comb, Discrete
from coarsekit.corpus import bornology_corpus, corpus
from coarsekit.groundsets import NAT, EventuallyPeriodic, ap, generator
from coarsekit.instance import (
    InstanceError,
    ballean_term,
    bornology_term,
    compile_ballean,
    compile_bornology,
    compile_set,
    directive,
    parse_document,
    render_document,
    set_term,
)
from coarsekit.sexpr import Node, ParseError, Symbol, parse, parse_one, render, sym

atoms = st.one_of(
    st.integers(-10 ** 6, 10 ** 6),
    st.fractions(max_denominator=50).filter(lambda f: f.denominator != 1),
    st.from_regex(r"[a-z][a-z0-9\-]{0,8}", fullmatch=True).map(Symbol),
    st.text(max_size=8),
)
terms = st.recursive(atoms, lambda kids: st.lists(kids, max_size=5).map(lambda xs: Node(tuple(xs))), max_leaves=25)


@settings(max_examples=200, deadline=None)
@given(terms)
def test_render_then_parse_is_the_identity(t):
    back = parse_one(render(t))
    assert back == t
    assert type(back) is type(t) or isinstance(t, tuple)


def test_strings_and_symbols_stay_apart():
    assert parse_one('"abc"') == "abc" and not isinstance(parse_one('"abc"'), Symbol)
    assert isinstance(parse_one("abc"), Symbol)
    assert render(Symbol("12")) == '"12"'
    assert parse_one("3/6") == Fraction(1, 2)


@pytest.mark.parametrize("text,where", [("(a (b c)", (1, 1)), ("((a)\n (b", (2, 2)), ("a)", (1, 2)), ("(x 1/0)", (1, 4))])
def test_syntax_errors_carry_positions(text, where):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert (exc.value.line, exc.value.col) == where


def test_comments_and_lines():
    got = parse("; header\n(a 1)\n  (b ; inner\n 2)")
    assert got == [Node((sym("a"), 1)), Node((sym("b"), 2))]
    assert got[1].where() == (3, 3)


# ---------------------------------------------------------------- object round trips

@st.composite
def exact_sets(draw):
    period = draw(st.integers(1, 9))
    residues = draw(st.frozensets(st.integers(0, period - 1), max_size=period))
    threshold = draw(st.integers(0, 12))
    prelude = draw(st.frozensets(st.integers(0, max(threshold - 1, 0)), max_size=4))
    return EventuallyPeriodic(prelude, period, residues, threshold)


@settings(max_examples=100, deadline=None)
@given(exact_sets())
def test_sets_round_trip(S):
    T = compile_set(parse_one(render(set_term(S))))
    assert all(S.contains(x) == T.contains(x) for x in range(200))


@pytest.mark.parametrize("S", [generator("pow4"), generator("two-pow4"), ap(3, 1)], ids=str)
def test_named_sets_round_trip(S):
    assert compile_set(set_term(S)) == S


@pytest.mark.parametrize("B", bornology_corpus(), ids=str)
def test_bornologies_round_trip(B):
    assert compile_bornology(parse_one(render(bornology_term(B)))) == B


@pytest.mark.parametrize("inst", corpus(), ids=lambda i: i.name)
def test_corpus_balleans_round_trip(inst):
    t = ballean_term(inst.expr)
    again = compile_ballean(parse_one(render(t)))
    assert render(ballean_term(again)) == render(t)


# ---------------------------------------------------------------- documents

SPEC_DOC = """
(def Y (gen pow4)) (def Z (gen two-pow4))
(def B (finite-subsets))
(def X (down B))
(def C (comb (metric-nat) (gen pow2) (rays)))
(check asymptotically-disjoint Y Z :space (metric-nat))
"""


def test_documents_parse_to_typed_declarations():
    doc = parse_document(SPEC_DOC)
    assert doc.names("set") == ["Y", "Z"]
    assert doc.names("ballean") == ["X", "C"]
    assert doc.set("Y") == generator("pow4")
    assert doc.ballean("X") == Discrete(FiniteSubsets(NAT))
    assert isinstance(doc.ballean("C"), Comb)
    assert len(doc.directives) == 1


def test_documents_round_trip():
    doc = parse_document(SPEC_DOC)
    assert parse_document(render_document(doc)) == doc


@pytest.mark.parametrize("text,fragment", [
    ("(def X (down Q))", "unresolved name Q"),
    ("(def X (dwn (finite-subsets)))", "unknown node label 'dwn'"),
    ("(def Y (gen pow4)) (def Y (gen pow2))", "already declared"),
    ("(def down (metric-nat))", "reserved"),
    ("(def X (ap period 2))", "ap"),
    ("(check bounded W)", "unresolved name W"),
])
def test_document_errors(text, fragment):
    with pytest.raises(InstanceError) as exc:
        parse_document(text)
    assert fragment in str(exc.value)
    assert exc.value.line is not None


def test_forward_references_are_rejected():
    with pytest.raises(InstanceError) as exc:
        parse_document("(def X (down B)) (def B (finite-subsets))")
    assert str(exc.value).startswith("1:")


def test_directive_builder_renders_options():
    d = directive("check", sym("bounded"), sym("Y"), horizon=128)
    assert render(d) == "(check bounded Y :horizon 128)"


def test_abstract_declarations_are_validated():
    with pytest.raises(Exception):
        parse_document("(def B (abstract add ge-aleph1 cov aleph0 cof aleph0))")
    doc = parse_document("(def B (abstract add aleph0 cov aleph0 cof ge-aleph1))")
    assert doc.bornology("B") == Abstract(ALEPH0, ALEPH0, AT_LEAST_ALEPH1)
