import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit import kernels
from coarsekit.core import (
    Diagonal,
    FiniteRelation,
    MetricRadius,
    apply,
    brute_force_closure,
    check_axioms,
    compose,
    enumerate_coarse_structures,
    finite_metric,
    generate,
    invert,
    is_bounded,
    is_coarse_map,
    is_connected,
    is_large,
    mask_to_pairs,
    metric_nat,
    pairs_to_mask,
    relation_mask,
    restrict_to,
    structure_family,
    successor_relation,
)
from coarsekit.groundsets import NAT, FinitePoints, GroundMismatch, ap, finite, full, generator

from oracles import bell, closure, diagonal, is_structure, mask_of, pairs_of, rcompose, rinvert


def relations(n):
    return st.integers(0, (1 << (n * n)) - 1)


# ---------------------------------------------------------------- relation algebra

def test_metric_radii_compose_additively():
    E = compose(MetricRadius(2), MetricRadius(3))
    for x in range(50):
        assert sorted(E.ball_list(x)) == list(range(max(0, x - 5), x + 6))
    # brute-force pair composition on {0..50}
    r2 = {(a, b) for a in range(51) for b in range(51) if abs(a - b) <= 2}
    r3 = {(a, b) for a in range(51) for b in range(51) if abs(a - b) <= 3}
    both = rcompose(r2, r3)
    for x in range(46):
        assert sorted(y for (a, y) in both if a == x) == sorted(E.ball_list(x))


def test_composing_with_the_diagonal_is_the_identity():
    E = MetricRadius(4)
    F = compose(E, Diagonal(NAT))
    for x in range(100):
        assert sorted(F.ball_list(x)) == sorted(E.ball_list(x))


def test_finite_relation_composes_like_the_relational_join():
    g = FinitePoints(3)
    R = FiniteRelation(frozenset({(0, 1), (1, 0)}), g)
    m = relation_mask(compose(R, R), 3)
    want = {(0, 0), (0, 1), (1, 0), (1, 1)} | diagonal(3)
    assert pairs_of(m, 3) == want


def test_compose_rejects_mixed_grounds():
    with pytest.raises(GroundMismatch):
        compose(MetricRadius(1), FiniteRelation(frozenset(), FinitePoints(2)))


def test_invert_examples():
    assert invert(MetricRadius(3)) == MetricRadius(3)
    inv = invert(FiniteRelation(frozenset({(0, 1)}), FinitePoints(3)))
    assert pairs_of(relation_mask(inv, 3), 3) - diagonal(3) == {(1, 0)}


def test_successor_composes_to_metric_balls():
    s = successor_relation()
    gen = generate([s], NAT)
    for n in (1, 2, 5):
        E = gen.entourage(n)
        for x in range(50):
            assert set(range(max(0, x - n), x + n + 1)) <= set(E.ball_list(x))


def test_apply_examples():
    assert sorted(apply(MetricRadius(3), finite([5])).enumerate(100)) == list(range(2, 9))
    evens_hood = apply(MetricRadius(1), ap(2, 0))
    assert evens_hood.enumerate(4096) == list(range(4097))
    assert apply(MetricRadius(7), full()).enumerate(30) == list(range(31))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), relations(n), relations(n), relations(n))))
def test_bitmask_algebra_matches_pair_sets(args):
    n, a, b, c = args
    A, B, C = pairs_of(a, n), pairs_of(b, n), pairs_of(c, n)
    assert pairs_of(kernels.compose(a, b, n), n) == rcompose(A, B)
    assert pairs_of(kernels.invert(a, n), n) == rinvert(A)
    ab_c = kernels.compose(kernels.compose(a, b, n), c, n)
    a_bc = kernels.compose(a, kernels.compose(b, c, n), n)
    assert ab_c == a_bc
    assert kernels.invert(kernels.invert(a, n), n) == a
    assert kernels.invert(kernels.compose(a, b, n), n) == kernels.compose(kernels.invert(b, n), kernels.invert(a, n), n)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))))))
def test_pairs_and_masks_round_trip(args):
    n, pairs = args
    # the diagonal is implied
    m = pairs_to_mask(pairs, n)
    assert m == mask_of(pairs | diagonal(n), n)
    assert set(mask_to_pairs(m, n)) == pairs | diagonal(n)


# ---------------------------------------------------------------- axioms and closure

def test_check_axioms_examples():
    g3 = [pairs_of(m, 3) for m in range(1 << 9) if pairs_of(m, 3) >= diagonal(3)]
    assert check_axioms(g3, 3).ok
    d = diagonal(2)
    rep = check_axioms([d, d | {(0, 1)}], 2)
    assert not rep.ok and not rep.inversion[0]
    assert rep.inversion[1] == d | {(0, 1)}
    assert not check_axioms([], 2).ok
    with pytest.raises(ValueError):
        check_axioms([diagonal(7)], 7)


def test_exhaustive_count_on_two_points():
    found = enumerate_coarse_structures(2, exhaustive_families=True)
    assert len(found) == 2
    d = kernels.diag_mask(2)
    assert [d] in found
    assert sorted(kernels.downset(kernels.full_mask(2), 2).tolist()) in found


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_structures_on_finite_sets_are_partitions(n):
    # downward-closed and composition-closed families on a finite set are the
    # downsets of equivalence relations
    assert len(enumerate_coarse_structures(n)) == bell(n)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), st.sets(relations(n), min_size=1, max_size=6))))
def test_check_axioms_agrees_with_the_definition(args):
    n, masks = args
    fam = [pairs_of(m, n) for m in masks]
    assert check_axioms(fam, n).ok == is_structure(fam, n)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.lists(relations(n), max_size=3))))
def test_closure_matches_the_oracle(args):
    n, gens = args
    got = brute_force_closure(gens, n)
    want = {mask_of(R, n) for R in closure([pairs_of(g, n) for g in gens], n)}
    assert got == want
    assert check_axioms(sorted(got), n).ok


def test_generate_on_finite_points():
    X = generate([], FinitePoints(2))
    fam = structure_family(X)
    assert pairs_to_mask({(0, 0), (1, 1), (0, 1), (1, 0)}, 2) in fam
    g = FinitePoints(3)
    one = FiniteRelation(frozenset({(0, 2)}), g)
    Y = generate([one], g, connect=False)
    want = {mask_of(R, 3) for R in closure([{(0, 2)}], 3)}
    assert structure_family(Y) == want


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.lists(relations(n), max_size=3))))
def test_unconnected_generation_equals_closure(args):
    n, gens = args
    g = FinitePoints(n)
    rels = [FiniteRelation(frozenset(pairs_of(m, n)), g) for m in gens]
    X = generate(rels, g, connect=False)
    assert structure_family(X) == {mask_of(R, n) for R in closure([pairs_of(m, n) for m in gens], n)}


# ---------------------------------------------------------------- balleans

def test_connectedness():
    assert is_connected(metric_nat()).is_true
    X = generate([], FinitePoints(2), connect=False)
    v = is_connected(X)
    assert v.is_false and set(v.witness) == {0, 1}


def test_restriction_intersects_balls():
    Y = restrict_to(metric_nat(), ap(2, 0))
    assert sorted(Y.ball_list(3, 6)) == [4, 6, 8]
    Z = restrict_to(metric_nat(), finite([1, 40]))
    assert is_bounded(Z, finite([1, 40])).is_true


def test_largeness():
    X = metric_nat()
    assert is_large(X, ap(2, 0)).is_true
    assert is_large(X, full()).is_true
    v = is_large(X, generator("pow2"))
    assert v.is_false


def test_coarse_maps():
    X = metric_nat()
    assert is_coarse_map(lambda n: 2 * n, X, X).is_true
    assert is_coarse_map(lambda n: n, X, X).is_true
    assert is_coarse_map(lambda n: n * n, X, X).is_false


def test_boundedness_in_metric_nat():
    X = metric_nat()
    assert is_bounded(X, finite([1, 5, 9])).is_true
    assert is_bounded(X, ap(2, 0)).is_false
    assert is_bounded(X, generator("pow2")).is_false


def test_finite_metric_is_a_single_block():
    X = finite_metric(4)
    assert is_connected(X).is_true
    assert structure_family(X) == set(kernels.downset(kernels.full_mask(4), 4).tolist())


def test_random_triples_on_six_points():
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randint(1, 6)
        a, b, c = (rng.getrandbits(n * n) for _ in range(3))
        A, B, C = (pairs_of(m, n) for m in (a, b, c))
        assert pairs_of(kernels.compose(kernels.compose(a, b, n), c, n), n) == rcompose(rcompose(A, B), C)
