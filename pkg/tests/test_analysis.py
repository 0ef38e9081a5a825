from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.analysis import (
    EPS_GRID,
    PreconditionError,
    asymptotically_disjoint,
    asymptotically_separated,
    constant,
    is_antidiscrete,
    is_asymptotic_neighborhood,
    is_discrete,
    is_slowly_oscillating,
    log_wave,
    metric_separator,
    parity,
    synthesize_separator,
    ultranormal_search,
    verify_separator,
)
from coarsekit.bornology import DomainError, FiniteSubsets, Powerset
from coarsekit.constructions import (
    Antidiscrete,
    Bouquet,
    build,
    doubling_relation,
    largest_presentation,
    macrocube,
    rays,
    smallest_compatible,
)
from coarsekit.core import finite_metric, metric_nat
from coarsekit.corpus import two_ray_catalog
from coarsekit.groundsets import NAT, FinitePoints, ap, combine, finite, full, generator

from oracles import ball_diam, cross_gaps, last_violation, powers, ratio_value, thick_meet

POW4 = generator("pow4")
TWO_POW4 = generator("two-pow4")
EVENS, ODDS = ap(2, 0), ap(2, 1)


# ---------------------------------------------------------------- disjointness

def test_disjointness_examples():
    X = metric_nat()
    assert asymptotically_disjoint(X, POW4, TWO_POW4).is_true
    v = asymptotically_disjoint(X, EVENS, ODDS)
    assert v.is_false
    assert asymptotically_disjoint(X, EVENS, finite([3, 7])).is_true


def test_power_families_drift_apart_by_the_oracle():
    Y, Z = powers(4, 1, 1 << 40), powers(4, 2, 1 << 40)
    gaps = cross_gaps(Y, Z)
    tail = gaps[len(gaps) // 2:]
    assert tail == sorted(tail) and tail[-1] > 1 << 30
    for r in (1, 2, 4, 8, 16):
        meet = thick_meet(Y, Z, r, 1 << 14)
        assert max(meet, default=0) < 40 * r


def test_evens_and_odds_meet_cofinally_by_the_oracle():
    ev, od = list(range(0, 4097, 2)), list(range(1, 4097, 2))
    assert thick_meet(ev, od, 1, 4096)[-1] == 4096


CATALOG = [EVENS, ODDS, POW4, TWO_POW4, ap(4, 0), ap(8, 2), finite([0, 1, 2]), generator("pow2")]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CATALOG), st.sampled_from(CATALOG))
def test_disjointness_is_symmetric(Y, Z):
    X = metric_nat()
    a, b = asymptotically_disjoint(X, Y, Z), asymptotically_disjoint(X, Z, Y)
    assert (a.is_true, a.is_false) == (b.is_true, b.is_false)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CATALOG), st.sampled_from(CATALOG), st.sampled_from([ap(3, 0), ap(5, 1), finite([2, 8, 32])]))
def test_disjointness_survives_shrinking(Y, Z, cut):
    X = metric_nat()
    if asymptotically_disjoint(X, Y, Z).is_true:
        smaller = combine(Y, cut, "intersection")
        assert not asymptotically_disjoint(X, smaller, Z).is_false


# ---------------------------------------------------------------- neighbourhoods and separation

def test_neighborhood_examples():
    X = metric_nat()
    assert is_asymptotic_neighborhood(X, POW4, full()).is_true
    v = is_asymptotic_neighborhood(X, EVENS, EVENS)
    assert v.is_false and v.witness["tail"]["residue"] == 1
    D = smallest_compatible(FiniteSubsets(NAT))
    assert is_asymptotic_neighborhood(D, EVENS, EVENS).is_true


def test_separation_examples():
    X = metric_nat()
    v = asymptotically_separated(X, POW4, TWO_POW4)
    assert v.is_true and {"U", "V"} <= set(v.witness)
    assert asymptotically_separated(X, EVENS, ODDS).is_false
    D = smallest_compatible(FiniteSubsets(NAT))
    v = asymptotically_separated(D, EVENS, ODDS)
    assert v.is_true and v.witness == {"U": "AP(2,0)", "V": "AP(2,1)"}


# ---------------------------------------------------------------- slow oscillation

def test_oscillation_examples():
    X = metric_nat()
    for eps in EPS_GRID:
        assert is_slowly_oscillating(X, constant(Fraction(1, 3)), eps).is_true
    assert is_slowly_oscillating(X, parity(), Fraction(1, 2)).is_false
    v = is_slowly_oscillating(X, log_wave(), Fraction(1, 4))
    assert v.is_true


@pytest.mark.parametrize("r", [1, 2, 4])
def test_log_wave_violations_stop_early_by_the_oracle(r):
    f = log_wave()
    last = last_violation(lambda n: float(f(n)), r, 0.25, 3000)
    assert 0 <= last < 300


def test_ratio_separator_matches_the_oracle():
    f = metric_separator(POW4, TWO_POW4)
    Y, Z = powers(4, 1, 1 << 20), powers(4, 2, 1 << 20)
    for x in list(range(0, 2000)) + [4 ** 9 + 5, 3 * 4 ** 8]:
        assert f(x) == ratio_value(x, Y, Z)
    pts = list(range(0, 5000, 7))
    assert [float(v) for v in f.values(pts)] == [float(f(x)) for x in pts]


@pytest.mark.parametrize("eps", [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)])
def test_ratio_separator_settles_by_the_oracle(eps):
    f = metric_separator(POW4, TWO_POW4)
    g = lambda n: f(n)
    last = last_violation(g, 1, eps, 4096)
    # only small centres violate the bound
    assert last < 4096 // 4
    assert all(ball_diam(g, x, 1) < eps for x in range(last + 1, 4096))


def test_synthesis_on_metric_nat():
    X = metric_nat()
    f = synthesize_separator(X, POW4, TWO_POW4)
    assert f.verified and f.provenance == "metric-quotient"
    assert all(f(y) == 0 for y in POW4.enumerate(1 << 20))
    assert all(f(z) == 1 for z in TWO_POW4.enumerate(1 << 20))
    with pytest.raises(PreconditionError):
        synthesize_separator(X, EVENS, ODDS)
    with pytest.raises(PreconditionError):
        synthesize_separator(X, EVENS, ap(4, 0))


def test_synthesis_on_a_bouquet_of_two_rays_glues_at_one_half():
    X = build(Bouquet(Powerset(FinitePoints(2)), rays()))
    cat = dict(two_ray_catalog(X.ground))
    Y, Z = cat["pow4|two-pow4"], cat["two-pow4|pow4"]
    f = synthesize_separator(X, Y, Z)
    assert f.provenance == "glued" and f("e") == Fraction(1, 2)
    checks = verify_separator(X, f, Y, Z)
    assert all(v is True or v.is_true for v in checks.values())


def test_indicator_separator_on_down():
    D = smallest_compatible(FiniteSubsets(NAT))
    f = synthesize_separator(D, EVENS, ODDS)
    assert f(3) == 1 and f(4) == 0 and f.verified


# ---------------------------------------------------------------- discreteness and friends

def test_discreteness_examples():
    assert is_discrete(smallest_compatible(FiniteSubsets(NAT))).is_true
    assert is_discrete(metric_nat()).is_false
    U = largest_presentation(FiniteSubsets(NAT), [doubling_relation()])
    assert is_discrete(U).is_false
    with pytest.raises(DomainError):
        is_discrete(finite_metric(3))


def test_antidiscreteness_examples():
    assert is_antidiscrete(build(Antidiscrete(FiniteSubsets(NAT)))).is_true
    assert is_antidiscrete(metric_nat(), [doubling_relation()]).is_false
    assert is_antidiscrete(smallest_compatible(FiniteSubsets(NAT)), [doubling_relation()]).is_false
    assert is_antidiscrete(metric_nat()).is_unknown


def test_ultranormal_search_examples():
    v = ultranormal_search(metric_nat(), [EVENS, ODDS, POW4, TWO_POW4])
    assert v.is_false and set(v.witness) == {"gen:pow4", "gen:two-pow4"}
    v = ultranormal_search(smallest_compatible(FiniteSubsets(NAT)), [EVENS, ODDS])
    assert v.is_false and v.witness == ("AP(2,0)", "AP(2,1)")
    assert ultranormal_search(metric_nat(), [finite([1, 2])]).is_unknown


def test_discrete_and_bounded_exclude_each_other():
    m = macrocube(Powerset(FinitePoints(2)))
    with pytest.raises(DomainError):
        is_discrete(m)
