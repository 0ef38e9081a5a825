"""Both kernel backends against each other and against the pair-set oracle."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit import kernels as K

from oracles import pairs_of, rcompose, rinvert

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not available")


def masks(n, size):
    return st.lists(st.integers(0, (1 << (n * n)) - 1), min_size=1, max_size=size)


@needs_numba
@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), masks(n, 30), masks(n, 30))))
def test_compose_and_invert_backends_agree(args):
    n, a, b = args
    m = min(len(a), len(b))
    A, B = np.array(a[:m], dtype=np.int64), np.array(b[:m], dtype=np.int64)
    assert np.array_equal(K._nb_compose_arrays(A, B, n), K._np_compose_arrays(A, B, n))
    assert np.array_equal(K._nb_invert_arrays(A, n), K._np_invert_arrays(A, n))
    for x, y, c, i in zip(a, b, K._np_compose_arrays(A, B, n), K._np_invert_arrays(A, n)):
        assert pairs_of(int(c), n) == rcompose(pairs_of(x, n), pairs_of(y, n))
        assert pairs_of(int(i), n) == rinvert(pairs_of(x, n))


@needs_numba
@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << (n * n)) - 1))))
def test_downset_backends_agree(args):
    n, m = args
    d = K.diag_mask(n)
    top = m | d
    nb = K._nb_downset(np.int64(top), np.int64(d))
    np_ = K._np_downset(top, d)
    assert sorted(nb.tolist()) == sorted(np_.tolist())
    assert all((int(x) | top) == top and (int(x) & d) == d for x in np_)


@needs_numba
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), masks(n, 3))))
def test_word_closure_backends_agree(args):
    n, gens = args
    g = np.asarray(sorted(set(gens)), dtype=np.int64)
    assert sorted(K._nb_word_closure(g, n).tolist()) == sorted(K._np_word_closure(g, n).tolist())


@needs_numba
@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), masks(n, 8))))
def test_family_checks_agree(args):
    n, fam = args
    arr = np.unique(np.asarray(fam, dtype=np.int64))
    d = K.diag_mask(n)
    nb = K._nb_check_family(arr, n, np.int64(d))
    np_ = K._np_check_family(arr, n, d)
    assert int(nb[0]) == int(np_[0])
    assert (int(K._nb_composition_violation(arr, n)[0]) < 0) == (K._np_composition_violation(arr, n)[0] < 0)
    assert (int(K._nb_down_violation(arr, np.int64(d))[0]) < 0) == (K._np_down_violation(arr, d)[0] < 0)


@needs_numba
@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 511), min_size=1, max_size=4), st.lists(st.integers(0, 511), max_size=6))
def test_small_and_vector_paths_give_the_same_witnesses(tops, extra):
    # unions of downsets on 3 points straddle the small-family threshold
    n, d = 3, K.diag_mask(3)
    fam = set(extra)
    for t in tops:
        fam |= {int(m) for m in K._np_downset(t | d, d)}
    arr = np.unique(np.asarray(sorted(fam), dtype=np.int64))
    nb_c = tuple(int(x) for x in K._nb_composition_violation(arr, n))
    nb_d = tuple(int(x) for x in K._nb_down_violation(arr, np.int64(d)))
    assert K._np_composition_violation(arr, n) == nb_c
    assert K._np_down_violation(arr, d) == nb_d
    saved = K.SMALL_FAMILY
    try:
        K.SMALL_FAMILY = 10 ** 6 if len(arr) > saved else -1
        assert K._np_composition_violation(arr, n) == nb_c
        assert K._np_down_violation(arr, d) == nb_d
    finally:
        K.SMALL_FAMILY = saved


@needs_numba
@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=80), st.integers(0, 10))
def test_sliding_diam_backends_agree(vals, r):
    v = np.asarray(vals)
    got = K._nb_sliding_diam(v, r)
    assert np.allclose(got, K._np_sliding_diam(v, r))
    brute = [max(vals[max(0, i - r): i + r + 1]) - min(vals[max(0, i - r): i + r + 1]) for i in range(len(vals))]
    assert np.allclose(got, brute)


@needs_numba
@settings(max_examples=60, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=100))
def test_distance_transform_backends_agree(bits):
    m = np.asarray(bits, dtype=np.bool_)
    a, b = K._nb_distance_transform(m), K._np_distance_transform(m)
    assert np.array_equal(a, b)
    ones = [i for i, x in enumerate(bits) if x]
    if ones:
        assert a.tolist() == [min(abs(i - j) for j in ones) for i in range(len(bits))]


@needs_numba
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30).flatmap(lambda n: st.tuples(
    st.lists(st.lists(st.integers(0, n - 1), max_size=5), min_size=n, max_size=n),
    st.lists(st.floats(-3, 3, allow_nan=False), min_size=n, max_size=n),
    st.lists(st.booleans(), min_size=n, max_size=n))))
def test_csr_backends_agree(args):
    rows, vals, src = args
    indptr = np.cumsum([0] + [len(r) for r in rows]).astype(np.int64)
    indices = np.asarray([c for r in rows for c in r], dtype=np.int64)
    v = np.asarray(vals)
    s = np.asarray(src, dtype=np.bool_)
    assert np.allclose(K._nb_csr_diam(indptr, indices, v), K._np_csr_diam(indptr, indices, v))
    assert np.array_equal(K._nb_csr_dilate(indptr, indices, s, len(s)), K._np_csr_dilate(indptr, indices, s, len(s)))


def test_limits():
    with pytest.raises(ValueError):
        K.compose_arrays(np.zeros(1, np.int64), np.zeros(1, np.int64), 7)
    with pytest.raises(ValueError):
        K.word_closure([1], 5)


def test_equivalence_closure_is_an_equivalence():
    m = K.equivalence_closure(0b000000010, 3)  # (0, 1)
    assert pairs_of(m, 3) == {(0, 0), (1, 1), (2, 2), (0, 1), (1, 0)}
