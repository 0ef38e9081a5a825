import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.bornology import (
    Abstract,
    ChainBase,
    FiniteSubsets,
    Powerset,
    ProductOf,
    check_bornology,
)
from coarsekit.constructions import (
    BProduct,
    Comb,
    Family,
    FiniteMetric,
    MetricNat,
    Product,
    b_product,
    bouquet,
    build,
    diagonal_witness,
    doubling_relation,
    largest_membership,
    largest_presentation,
    macrocube,
    product,
    rays,
    shift_relation,
    smallest_compatible,
)
from coarsekit.core import (
    BallMap,
    FiniteRelation,
    MetricRadius,
    UnsupportedPresentation,
    bounded_sets,
    is_bounded,
    metric_nat,
)
from coarsekit.groundsets import NAT, FinitePoints, Rectangle, ap, finite, generator, interval


def test_product_balls_are_rectangles():
    X = build(Product((MetricNat(), MetricNat())))
    ball = X.ball(2, (5, 5))
    assert isinstance(ball, Rectangle)
    assert [c.enumerate(20) for c in ball.components] == [[3, 4, 5, 6, 7]] * 2


def test_unary_product_keeps_balls():
    M = metric_nat()
    P = product([M])
    for x in range(30):
        for r in (0, 1, 3):
            assert [p[0] for p in P.ball(r, (x,)).enumerate(100)] == M.ball(r, x).enumerate(100)


def test_product_bounded_sets_are_the_product_bornology():
    P = product([metric_nat(), metric_nat()])
    assert isinstance(bounded_sets(P), ProductOf)
    for S, want in [
        (Rectangle((finite([1, 2]), interval(0, 9))), True),
        (Rectangle((ap(2, 0), interval(0, 5))), False),
        (Rectangle((interval(3, 4), ap(3, 1))), False),
    ]:
        assert is_bounded(P, S).is_true == want
        assert bounded_sets(P).member(S).is_true == want


def test_b_product_over_the_powerset_is_the_product():
    bp = b_product(Powerset(FinitePoints(2)), rays())
    P = product([metric_nat(), metric_nat()])

    def as_tuple(p):
        d = dict(p)
        return (d.get(0, 0), d.get(1, 0))

    pts = bp.ground.elements(60)
    for x, y in itertools.combinations(pts, 2):
        assert bp.distance(x, y, limit=1 << 20) == P.distance(as_tuple(x), as_tuple(y), limit=1 << 20)


def test_b_product_points_have_finite_support():
    bp = b_product(FiniteSubsets(NAT), rays())
    for p in bp.ground.elements(300):
        assert all(s != 0 for _, s in p)
        assert len(p) < 30


def test_b_product_does_not_relate_points_differing_outside_the_level():
    bp = b_product(ChainBase(NAT), rays())
    # coordinates differing at index 7 need level >= 7
    assert bp.distance((), ((7, 1),), limit=100) >= 7
    assert bp.distance((), ((2, 1),), limit=100) == 2


def test_macrocube_over_finite_subsets_is_the_cantor_macrocube():
    m = macrocube(FiniteSubsets(NAT))
    pts = m.ground.elements(200)
    assert len(set(pts)) == len(pts) and all(isinstance(p, frozenset) for p in pts)
    assert frozenset({0, 1}) in pts and frozenset() in pts
    assert m.distance(frozenset({0, 1}), frozenset({0, 2})) is not None


def test_macrocube_over_the_powerset_is_bounded():
    m = macrocube(Powerset(FinitePoints(3)))
    pts = m.ground.elements(100)
    assert len(pts) == 8
    top = max(m.distance(a, b) for a in pts for b in pts)
    for a in pts:
        assert set(m.ball(top, a).enumerate(100)) == set(pts)


def test_bouquet_of_two_rays():
    bq = bouquet(FiniteSubsets(FinitePoints(2)), rays())
    assert bq.basepoint == "e"
    assert sorted(map(str, bq.ball_list(2, "e"))) == sorted(map(str, ["e", (0, 1), (0, 2), (1, 1), (1, 2)]))
    # spines embed with unchanged balls away from e
    for s in range(3, 40):
        assert sorted(y for y in bq.ball_list(1, (0, s))) == [(0, s - 1), (0, s), (0, s + 1)]
    # far points on distinct spines are unrelated at small radii
    for r in range(1, 6):
        for s in range(r + 1, 20):
            assert (1, s) not in bq.ball_list(r, (0, s))


def test_bouquet_carrier_is_the_support_le_one_part_of_the_b_product():
    B = FiniteSubsets(FinitePoints(3))
    bq = bouquet(B, rays())
    bp = b_product(B, rays())
    wedge = {()} | {((a, s),) for (a, s) in (p for p in bq.ground.elements(300) if p != "e")}
    supp1 = [p for p in bp.ground.elements(20000) if len(p) <= 1]
    limit = max(s for p in supp1 for _, s in p)
    assert {p for p in wedge if all(s < limit for _, s in p)} <= set(supp1)
    for x in supp1[:200]:
        for y in supp1[:60]:
            ex = "e" if x == () else x[0]
            ey = "e" if y == () else y[0]
            assert bq.distance(ex, ey, limit=1 << 20) == bp.distance(x, y, limit=1 << 20)


def test_comb_over_powers_of_two():
    c = build(Comb(MetricNat(), generator("pow2"), rays()))
    for x in range(40):
        for y in range(40):
            assert c.distance(("handle", x), ("handle", y)) == abs(x - y)
    # tooth (α, s) and handle point β are related at radius r only if
    # |α - β| <= r and s is within r of the basepoint
    for a in (1, 2, 4, 8):
        for s in range(1, 6):
            for b in range(12):
                d = c.distance(("tooth", (a, s)), ("handle", b))
                assert d >= max(abs(a - b), s)
                assert ("tooth", (a, s)) in c.ball_list(d, ("handle", b))


def test_comb_spines_outside_the_index_set_are_rejected():
    c = build(Comb(MetricNat(), generator("pow2"), rays()))
    with pytest.raises(Exception):
        c.ground.encode(("tooth", (3, 1)))


def test_smallest_compatible_is_block_structure():
    D = smallest_compatible(ChainBase(NAT))
    assert D.ball_list(5, 3) == [0, 1, 2, 3, 4, 5]
    assert D.ball_list(5, 9) == [9]
    assert bounded_sets(D) == ChainBase(NAT)
    with pytest.raises(UnsupportedPresentation):
        smallest_compatible(Abstract())


def test_largest_membership_examples():
    B = FiniteSubsets(NAT)
    assert largest_membership(B, MetricRadius(1)).is_true
    zero_evens = BallMap(NAT, lambda x: ap(2, 0) if x == 0 else ([0] if x % 2 == 0 else []), None, "zero-evens", True)
    v = largest_membership(B, zero_evens)
    assert v.is_false and v.witness["base"] == "{0}"
    v = largest_membership(B, FiniteRelation(frozenset({(0, 1)})))
    assert v.is_false and v.witness["missing"] == (1, 0)
    assert largest_membership(B, doubling_relation()).is_true
    assert largest_membership(B, shift_relation(3)).is_true


@pytest.mark.parametrize("B", [FiniteSubsets(NAT), ChainBase(NAT), ChainBase(NAT, ap(2, 0))], ids=str)
def test_down_entourages_lie_in_up(B):
    D = smallest_compatible(B)
    for n in range(0, 12):
        assert largest_membership(B, D.entourage(n)).is_true


def test_up_presentation_rejects_foreign_witnesses():
    with pytest.raises(ValueError):
        largest_presentation(FiniteSubsets(NAT), [FiniteRelation(frozenset({(0, 1)}))])
    U = largest_presentation(FiniteSubsets(NAT), [doubling_relation()])
    assert 8 in U.ball_list(2, 2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 300), max_size=6), st.integers(0, 2))
def test_down_and_up_are_compatible_with_their_bornology(pts, which):
    B = [FiniteSubsets(NAT), ChainBase(NAT), ChainBase(NAT, ap(2, 0))][which]
    for X in (smallest_compatible(B), largest_presentation(B)):
        for S in (finite(pts), combine_with_tail(B, pts)):
            assert is_bounded(X, S).is_true == B.member(S).is_true


def combine_with_tail(B, pts):
    from coarsekit.groundsets import combine

    return combine(ap(2, 0), finite(pts), "union") if getattr(B, "tail", None) is not None else ap(5, 1)


def test_diagonal_witness_for_an_infinite_member():
    bp = b_product(ChainBase(NAT, ap(2, 0)), rays())
    w = diagonal_witness(bp)
    assert w is not None and len(w) == 16
    assert all(item["probe_distance"] > item["n"] for item in w)
    assert diagonal_witness(b_product(FiniteSubsets(NAT), rays())) is None


def test_restricted_comb_bornology_is_a_bornology():
    c = build(Comb(MetricNat(), generator("pow2"), rays()))
    assert check_bornology(c.meta["index_bornology"]).ok


@pytest.mark.parametrize("make", [
    lambda: b_product(FiniteSubsets(NAT), rays()),
    lambda: b_product(ChainBase(NAT, ap(2, 0)), rays()),
    lambda: build(BProduct(FiniteSubsets(NAT), Family(FiniteMetric(2)))),
    lambda: macrocube(FiniteSubsets(NAT)),
    lambda: macrocube(ChainBase(NAT, ap(2, 0))),
], ids=["bp-finite", "bp-tail", "bp-bounded", "cube-finite", "cube-tail"])
def test_vectorised_window_distances_match_pairwise_ones(make):
    from coarsekit.core import BIG

    X = make()
    pts = X.ground.elements(150)
    D = X.meta["pairwise"](pts)
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            d = X.distance_fn(x, y)
            assert D[i, j] == (BIG if d is None else d)
