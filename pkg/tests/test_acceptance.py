"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion N: PASS/FAIL`` line; the terminal summary
repeats them (see conftest.py).
"""
import random
import time
from fractions import Fraction

import pytest

from coarsekit.analysis import (
    EPS_GRID,
    asymptotically_disjoint,
    constant,
    is_discrete,
    is_slowly_oscillating,
    log_wave,
    metric_separator,
    parity,
    synthesize_separator,
    verify_separator,
)
from coarsekit.bornology import (
    ALEPH0,
    AT_LEAST_ALEPH1,
    Abstract,
    ChainBase,
    FiniteSubsets,
    InvalidDeclaration,
    Powerset,
    cardinal_invariants,
)
from coarsekit.constructions import Bouquet, build, diagonal_witness, largest_membership, rays, smallest_compatible
from coarsekit.core import (
    FiniteRelation,
    apply,
    bounded_sets,
    brute_force_closure,
    check_axioms,
    compose,
    enumerate_coarse_structures,
    generate,
    invert,
    is_bounded,
    metric_nat,
    relation_mask,
    structure_family,
)
from coarsekit import kernels
from coarsekit.corpus import bornology_corpus, corpus, nat_catalog, two_ray_catalog
from coarsekit.groundsets import NAT, FinitePoints, ap, combine, finite, generator, interval
from coarsekit.inference import countable_base_check, cross_validate, infer_properties

from oracles import closure, is_structure, mask_of, pairs_of, rcompose, rinvert

POW4, TWO_POW4 = generator("pow4"), generator("two-pow4")
EVENS, ODDS = ap(2, 0), ap(2, 1)


def report(n, ok, t0, detail=""):
    took = time.perf_counter() - t0
    passed = ok and took < 10
    print(f"\ncriterion {n}: {'PASS' if passed else 'FAIL'} ({took:.2f}s){' ' + detail if detail else ''}")
    assert took < 10, f"criterion {n} took {took:.1f}s"
    assert ok, detail


def reflexive_relations(n):
    return [int(m) for m in kernels.downset(kernels.full_mask(n), n)]


# ---------------------------------------------------------------- 1

def candidate_families(rng):
    n = 3
    rels = reflexive_relations(n)
    downs = [[int(m) for m in kernels.downset(r, n)] for r in rels]
    fams = list(downs)
    fams += [sorted(set(a) | set(b)) for i, a in enumerate(downs) for b in downs[i + 1:]]
    fams += [rng.sample(rels, rng.randint(1, 12)) for _ in range(400)]
    # families that also contain relations missing part of the diagonal
    fams += [rng.sample(range(1 << (n * n)), rng.randint(1, 12)) for _ in range(100)]
    return fams


@pytest.mark.criterion(1)
def test_criterion_1_finite_enumeration_and_axioms():
    t0 = time.perf_counter()
    structures = enumerate_coarse_structures(2, exhaustive_families=True)
    bad = []
    for n in (1, 2):
        rels = list(range(1 << (n * n)))
        for k in range(1, 1 << len(rels)):
            fam = [r for i, r in enumerate(rels) if (k >> i) & 1]
            if check_axioms(fam, n).ok != (brute_force_closure(fam, n) == set(fam)):
                bad.append((n, fam))
    fams3 = candidate_families(random.Random(1))
    for fam in fams3:
        got = check_axioms(fam, 3).ok
        if got != (brute_force_closure(fam, 3) == set(fam)) or got != is_structure([pairs_of(m, 3) for m in fam], 3):
            bad.append((3, fam))
    report(1, len(structures) == 2 and not bad, t0,
           f"{len(structures)} structures on 2 points, 65550 families on <= 2 points, {len(fams3)} families on 3 points, {len(bad)} disagreements")


# ---------------------------------------------------------------- 2

@pytest.mark.criterion(2)
def test_criterion_2_relation_algebra():
    t0 = time.perf_counter()
    rng = random.Random(2)
    bad = 0
    for _ in range(1000):
        n = rng.randint(1, 6)
        g = FinitePoints(n)
        pts = [(a, b) for a in range(n) for b in range(n) if a != b]
        E, F, G = (FiniteRelation(frozenset(rng.sample(pts, rng.randint(0, len(pts)))), g) for _ in range(3))
        m = lambda R: relation_mask(R, n)
        assoc = m(compose(compose(E, F), G)) == m(compose(E, compose(F, G)))
        invol = m(invert(invert(E))) == m(E)
        anti = m(invert(compose(E, F))) == m(compose(invert(F), invert(E)))
        # independent route: plain pair sets
        pe, pf = pairs_of(m(E), n), pairs_of(m(F), n)
        oracle = m(compose(E, F)) == mask_of(rcompose(pe, pf), n) and m(invert(E)) == mask_of(rinvert(pe), n)
        bad += not (assoc and invol and anti and oracle)
    report(2, bad == 0, t0, f"{bad} failing triples of 1000")


# ---------------------------------------------------------------- 3

@pytest.mark.criterion(3)
def test_criterion_3_generation_matches_closure():
    t0 = time.perf_counter()
    rng = random.Random(3)
    bad = 0
    for _ in range(100):
        n = rng.randint(1, 4)
        g = FinitePoints(n)
        masks = [rng.randrange(1 << (n * n)) for _ in range(rng.randint(0, 3))]
        rels = [FiniteRelation(frozenset(pairs_of(mk, n)), g) for mk in masks]
        want = brute_force_closure(masks, n)
        oracle = {mask_of(R, n) for R in closure([pairs_of(mk, n) for mk in masks], n)}
        X = generate(rels, g, connect=False)
        ok = structure_family(X) == want == oracle
        # with connection the extra pairs are part of the generating set
        Y = generate(rels, g)
        links = [pairs_of(mk, n) for mk in masks] + [{p} for p in Y.meta["links"]]
        ok = ok and structure_family(Y) == {mask_of(R, n) for R in closure(links, n)}
        bad += not ok
    report(3, bad == 0, t0, f"{bad} mismatches of 100")


# ---------------------------------------------------------------- 4

def set_corpus():
    rng = random.Random(4)
    out = [finite(rng.sample(range(200), rng.randint(0, 8))) for _ in range(20)]
    out += [interval(0, k) for k in (0, 3, 17, 64)]
    out += [ap(p, r) for p, r in ((2, 0), (2, 1), (3, 1), (4, 0), (5, 2), (8, 6))]
    out += [POW4, TWO_POW4, generator("pow2")]
    out += [combine(EVENS, finite(rng.sample(range(100), 3)), "union") for _ in range(8)]
    out += [combine(ODDS, interval(0, k), "intersection") for k in (5, 40, 90)]
    out += [combine(ap(4, 1), finite([0, 2]), "union"), combine(EVENS, ap(3, 0), "intersection"),
            combine(ODDS, ap(4, 3), "difference"), finite([]),
            combine(POW4, interval(0, 300), "intersection"), combine(ap(6, 5), ap(9, 2), "union")]
    assert len(out) == 50
    return out


@pytest.mark.criterion(4)
@pytest.mark.parametrize("B", [FiniteSubsets(NAT), ChainBase(NAT)], ids=str)
def test_criterion_4_down_recovers_its_bornology(B):
    t0 = time.perf_counter()
    D = smallest_compatible(B)
    ok = bounded_sets(D) == B
    sets = set_corpus()
    problems = []
    for n in range(16):
        E = D.entourage(n)
        if not largest_membership(B, E).is_true:
            problems.append(("entourage", n))
        for S in sets:
            if B.member(S).is_true and not B.member(apply(E, S)).is_true:
                problems.append(("image", n, str(S)))
    for S in sets:
        if is_bounded(D, S).value != B.member(S).value:
            problems.append(("bounded", str(S)))
    report(4, ok and not problems, t0, f"{B}: {problems[:3]}")


# ---------------------------------------------------------------- 5

@pytest.mark.criterion(5)
def test_criterion_5_metric_separation():
    t0 = time.perf_counter()
    X = metric_nat()
    d1 = asymptotically_disjoint(X, POW4, TWO_POW4, 4096)
    d2 = asymptotically_disjoint(X, EVENS, ODDS, 4096)
    f = synthesize_separator(X, POW4, TWO_POW4, 4096)
    checks = verify_separator(X, f, POW4, TWO_POW4, 4096, EPS_GRID)
    ok = d1.is_true and d2.is_false and all(v is True or getattr(v, "is_true", False) for v in checks.values())
    ok = ok and len(checks) == 2 + len(EPS_GRID)
    report(5, ok, t0, f"pow4/two-pow4 {d1.label()}, evens/odds {d2.label()}, separator {sorted(checks)}")


# ---------------------------------------------------------------- 6

@pytest.mark.criterion(6)
def test_criterion_6_glued_separator_on_two_rays():
    t0 = time.perf_counter()
    X = build(Bouquet(Powerset(FinitePoints(2)), rays()))
    cat = dict(two_ray_catalog(X.ground))
    Y, Z = cat["pow4|two-pow4"], cat["two-pow4|pow4"]
    f = synthesize_separator(X, Y, Z)
    checks = verify_separator(X, f, Y, Z, grid=EPS_GRID)
    ok = f.provenance == "glued" and all(v is True or getattr(v, "is_true", False) for v in checks.values())
    report(6, ok, t0, f"{f.provenance}: {sorted(checks)}")


# ---------------------------------------------------------------- 7

INSTANCES = corpus()


def test_criterion_7_corpus_is_large_enough():
    assert len(INSTANCES) >= 12


@pytest.mark.criterion(7)
@pytest.mark.parametrize("inst", INSTANCES, ids=lambda i: i.name)
def test_criterion_7_cross_validation(inst):
    t0 = time.perf_counter()
    X = None if inst.catalog_fn is None else build(inst.expr)
    rep = cross_validate(inst.name, inst.expr, inst.catalog(X) if X is not None else [])
    ok = not rep.inconsistencies
    extra = ""
    if inst.name == "bproduct-finite":
        r = infer_properties(inst.expr)
        ok = ok and r["metrizable"].is_true and not countable_base_check(build(inst.expr)).is_false
        extra = "metrizable"
    if inst.name == "bproduct-tail":
        r = infer_properties(inst.expr)
        ok = ok and r["metrizable"].is_false and diagonal_witness(build(inst.expr)) is not None
        extra = "diagonal witness"
    report(7, ok, t0, f"{inst.name}: {len(rep.inconsistencies)} inconsistencies {extra}")


# ---------------------------------------------------------------- 8

@pytest.mark.criterion(8)
def test_criterion_8_cardinal_order():
    t0 = time.perf_counter()
    bad = [str(B) for B in bornology_corpus() if not cardinal_invariants(B).ordered()]
    raised = 0
    for args in [(AT_LEAST_ALEPH1, ALEPH0, ALEPH0), (ALEPH0, AT_LEAST_ALEPH1, ALEPH0), (ALEPH0, ALEPH0, ALEPH0)]:
        try:
            Abstract(*args)
        except InvalidDeclaration:
            raised += 1
    report(8, not bad and raised == 2, t0, f"{len(bornology_corpus())} bornologies, unordered {bad}, {raised} rejected")


# ---------------------------------------------------------------- 9

def horizon_verdicts(h):
    out = {}
    X, D = metric_nat(), smallest_compatible(FiniteSubsets(NAT))
    cat = nat_catalog()
    for sp, name in ((X, "metric"), (D, "down")):
        for i, (na, a) in enumerate(cat):
            for nb, b in cat[i + 1:]:
                out[(name, "disjoint", na, nb)] = asymptotically_disjoint(sp, a, b, h)
            out[(name, "bounded", na)] = is_bounded(sp, a, h)
        out[(name, "discrete")] = is_discrete(sp, h)
    for f in (constant(Fraction(1, 2)), parity(), log_wave(), metric_separator(POW4, TWO_POW4)):
        for eps in EPS_GRID:
            out[("slow", f.name, str(eps))] = is_slowly_oscillating(X, f, eps, h)
    bq = build(Bouquet(Powerset(FinitePoints(2)), rays()))
    c = two_ray_catalog(bq.ground)
    for i, (na, a) in enumerate(c):
        for nb, b in c[i + 1:]:
            out[("bouquet", "disjoint", na, nb)] = asymptotically_disjoint(bq, a, b, h)
    return out


@pytest.mark.criterion(9)
def test_criterion_9_horizons_never_flip():
    t0 = time.perf_counter()
    runs = [horizon_verdicts(h) for h in (1024, 4096, 16384)]
    flips = []
    for k in runs[0]:
        vals = {r[k].value for r in runs if not r[k].is_unknown}
        if len(vals) > 1:
            flips.append(k)
    report(9, not flips, t0, f"{len(runs[0])} verdicts, flips {flips[:3]}")
