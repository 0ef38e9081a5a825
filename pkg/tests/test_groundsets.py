import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.groundsets import (
    NAT,
    Complement,
    EncodingError,
    EventuallyPeriodic,
    Finite,
    FinitePoints,
    GroundMismatch,
    IndexedUnion,
    Intersection,
    SparseGenerator,
    Tagged,
    TaggedUnion,
    TupleSpace,
    Union,
    Verdict,
    ap,
    combine,
    contains,
    enumerate_set,
    exact_form,
    finite,
    finiteness,
    generator,
    is_empty,
    is_subset,
    normalize,
)

from oracles import ep_pred, members

OPS = {"union": lambda a, b: a or b, "intersection": lambda a, b: a and b, "difference": lambda a, b: a and not b}


@st.composite
def exact_sets(draw):
    if draw(st.booleans()):
        return Finite(tuple(draw(st.lists(st.integers(0, 60), max_size=8))))
    period = draw(st.integers(1, 12))
    residues = draw(st.frozensets(st.integers(0, period - 1), max_size=period))
    threshold = draw(st.integers(0, 30))
    prelude = draw(st.frozensets(st.integers(0, max(threshold - 1, 0)), max_size=6))
    return EventuallyPeriodic(prelude, period, residues, threshold)


def pred_of(S):
    if isinstance(S, Finite):
        return lambda x: x in set(S.elements)
    return ep_pred(S.prelude, S.period, S.residues, S.threshold)


# ---------------------------------------------------------------- examples

def test_contains_examples():
    assert contains(ap(2, 0), 4)
    assert contains(generator("pow2"), 8)
    assert contains(Intersection((ap(3, 1), ap(2, 0))), 4)
    # the intersection oracle: enumerate both sets to 100
    both = set(members(lambda x: x % 3 == 1, 100)) & set(members(lambda x: x % 2 == 0, 100))
    assert 4 in both


def test_contains_rejects_malformed_elements():
    with pytest.raises(EncodingError):
        contains(ap(2, 0), -1)
    with pytest.raises(EncodingError):
        contains(Finite((0, 1), FinitePoints(2)), 2)


def test_combine_examples():
    assert combine(ap(2, 0), ap(2, 1), "union") == normalize(EventuallyPeriodic(frozenset(), 1, frozenset({0}), 0))
    assert combine(ap(2, 0), ap(2, 1), "intersection") == Finite(())
    assert combine(finite([1, 2, 3]), finite([2]), "difference") == finite([1, 3])


def test_combine_ground_mismatch():
    with pytest.raises(GroundMismatch):
        combine(ap(2, 0), Finite((0,), FinitePoints(3)), "union")
    with pytest.raises(ValueError):
        combine(ap(2, 0), ap(2, 1), "xor")


def test_finiteness_examples():
    v = finiteness(ap(2, 0))
    assert v.is_false and v.witness["period"] == 2
    assert finiteness(finite([1, 2, 3])).is_true
    assert finiteness(Intersection((ap(2, 0), ap(2, 1)))).is_true
    assert finiteness(generator("pow4")).is_false


def test_finiteness_of_sparse_intersections_is_a_semi_decision():
    v = finiteness(Intersection((generator("pow4"), generator("squares"))))
    assert v.is_unknown and v.horizon is not None


def test_enumerate_examples():
    assert enumerate_set(ap(2, 0), 7) == [0, 2, 4, 6]
    assert enumerate_set(generator("pow2"), 10) == [1, 2, 4, 8]
    assert enumerate_set(Complement(ap(2, 0)), 5) == [1, 3, 5]
    with pytest.raises(ValueError):
        enumerate_set(ap(2, 0), -1)


def test_verdict_is_not_a_bool():
    with pytest.raises(TypeError):
        bool(Verdict.true())
    assert Verdict.unknown(10).negate().is_unknown
    assert Verdict.false(3).negate().is_true
    assert "horizon 10" in str(Verdict.unknown(10))


def test_sparse_generator_is_strictly_increasing():
    with pytest.raises(ValueError):
        SparseGenerator("bad", lambda n: 5).nth(3)
    with pytest.raises(KeyError):
        SparseGenerator("no-such-generator")
    g = generator("two-pow4")
    assert [g.nth(i) for i in range(4)] == [2, 8, 32, 128]
    assert g.index_of(32) == 2


def test_subset_and_empty():
    assert is_subset(ap(4, 0), ap(2, 0)).is_true
    v = is_subset(ap(2, 0), ap(4, 0))
    assert v.is_false and v.witness == 2
    assert is_empty(combine(ap(4, 1), ap(2, 0), "intersection")).is_true
    assert is_empty(generator("pow2")).is_false


# ---------------------------------------------------------------- structured grounds

def test_finite_points_encoding():
    g = FinitePoints(5)
    assert g.elements(100) == [0, 1, 2, 3, 4]
    assert [g.decode(g.encode(x)) for x in range(5)] == list(range(5))


@pytest.mark.parametrize("ground", [
    TupleSpace((NAT, NAT)),
    TupleSpace((FinitePoints(3), NAT)),
    TupleSpace((FinitePoints(2), FinitePoints(3))),
    TaggedUnion((("a", NAT), ("b", FinitePoints(3)))),
    TaggedUnion((("a", NAT), ("b", NAT)), basepoints=(0, 0)),
    IndexedUnion(ap(2, 0), NAT, basepoint=0, wedge=True),
])
def test_structured_encodings_round_trip(ground):
    seen = set()
    for k in range(200 if ground.size is None else ground.size):
        x = ground.decode(k)
        assert ground.encode(x) == k
        seen.add(x)
    assert len(seen) == (200 if ground.size is None else ground.size)


def test_tagged_sets_in_a_wedge_contain_the_glued_point_with_the_basepoint():
    g = TaggedUnion((("a", NAT), ("b", NAT)), basepoints=(0, 0))
    s = Tagged("a", ap(2, 0), g)
    assert s.contains("e")
    assert s.contains(("a", 4)) and not s.contains(("b", 4))
    assert not Tagged("b", ap(2, 1), g).contains("e")


# ---------------------------------------------------------------- properties

@settings(max_examples=150, deadline=None)
@given(exact_sets(), exact_sets(), st.sampled_from(sorted(OPS)))
def test_combine_is_pointwise_and_stays_exact(S, T, op):
    R = combine(S, T, op)
    assert exact_form(R) is not None
    ps, pt = pred_of(S), pred_of(T)
    for x in range(0, 1001):
        assert R.contains(x) == OPS[op](ps(x), pt(x)), x


@settings(max_examples=150, deadline=None)
@given(exact_sets())
def test_finiteness_decides_the_exact_tier(S):
    v = finiteness(S)
    assert not v.is_unknown
    infinite = isinstance(S, EventuallyPeriodic) and bool(S.residues)
    assert v.is_false == infinite


@settings(max_examples=100, deadline=None)
@given(exact_sets(), st.integers(0, 200))
def test_enumerate_agrees_with_contains(S, h):
    got = S.enumerate(h)
    assert got == [x for x in range(h + 1) if S.contains(x)]


@settings(max_examples=100, deadline=None)
@given(exact_sets())
def test_normalize_is_idempotent_and_preserves_membership(S):
    once = normalize(S)
    assert normalize(once) == once
    for x in range(300):
        assert once.contains(x) == S.contains(x)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["pow2", "pow3", "pow4", "two-pow4", "squares", "cubes", "triangular"]),
       st.integers(0, 3000))
def test_generators_enumerate_consistently(name, h):
    g = generator(name)
    vals = g.enumerate(h)
    assert vals == sorted(set(vals))
    assert all(g.contains(v) for v in vals)
    assert sum(1 for x in range(h + 1) if g.contains(x)) == len(vals)


@settings(max_examples=60, deadline=None)
@given(exact_sets(), exact_sets())
def test_mixed_boolean_nodes_evaluate_pointwise(S, T):
    U = Union((S, generator("pow2")))
    I = Intersection((T, Complement(generator("squares"))))
    for x in range(200):
        assert U.contains(x) == (S.contains(x) or x in {1, 2, 4, 8, 16, 32, 64, 128})
        assert I.contains(x) == (T.contains(x) and int(x ** 0.5) ** 2 != x)
