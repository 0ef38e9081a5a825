import pytest

from coarsekit.bornology import ALEPH0, AT_LEAST_ALEPH1, Abstract, ChainBase, Declared, FiniteSubsets, ProductOf
from coarsekit.constructions import (
    AbstractBallean,
    Antidiscrete,
    BProduct,
    Bouquet,
    Comb,
    Discrete,
    MetricNat,
    Product,
    build,
    rays,
)
from coarsekit.corpus import corpus
from coarsekit.groundsets import NAT, ap, generator
from coarsekit.inference import PROPERTIES, RULES, countable_base_check, cross_validate, infer_properties

K = Declared("kappa")


def rule_of(v):
    return v.note.split(";")[0].split(" <- ")[0]


def test_b_product_over_finite_subsets_is_metrizable():
    r = infer_properties(BProduct(FiniteSubsets(NAT), rays()))
    assert r["metrizable"].is_true and rule_of(r["metrizable"]) == "bproduct-unbounded"
    assert r["normal"].is_true


def test_b_product_over_a_tailed_chain_is_not_metrizable():
    r = infer_properties(BProduct(ChainBase(NAT, ap(2, 0)), rays()))
    assert r["metrizable"].is_false and r["normal"].is_false


def test_product_with_mismatched_cardinals_is_not_normal():
    r = infer_properties(Product((MetricNat(), AbstractBallean(Abstract(ALEPH0, ALEPH0, AT_LEAST_ALEPH1), "K"))))
    assert r["normal"].is_false and rule_of(r["normal"]) == "product-cardinals"
    r = infer_properties(Product((MetricNat(), AbstractBallean(Abstract(K, K, K), "K"))))
    assert r["normal"].is_false


def test_comb_over_sparse_spines_is_metrizable_and_normal():
    r = infer_properties(Comb(MetricNat(), generator("pow4"), rays()))
    assert r["metrizable"].is_true and rule_of(r["metrizable"]) == "comb-metrizable"
    assert r["normal"].is_true


def test_largest_structure_on_a_product_bornology_is_not_normal():
    wide = Abstract(AT_LEAST_ALEPH1, AT_LEAST_ALEPH1, AT_LEAST_ALEPH1)
    r = infer_properties(Antidiscrete(ProductOf(wide, Abstract(ALEPH0, ALEPH0, ALEPH0))))
    assert r["normal"].is_false and rule_of(r["normal"]) == "largest-product"
    assert r["antidiscrete"].is_true


def test_metrizable_implies_normal():
    for e in (MetricNat(), Discrete(FiniteSubsets(NAT)), Bouquet(FiniteSubsets(NAT), rays())):
        r = infer_properties(e)
        assert r["metrizable"].is_true and r["normal"].is_true


def test_report_lines_name_a_rule_or_a_gap():
    r = infer_properties(MetricNat())
    lines = r.lines()
    assert [l.split(":")[0] for l in lines] == list(PROPERTIES)
    for p in PROPERTIES:
        v = r[p]
        if not v.is_unknown:
            assert rule_of(v) in RULES


@pytest.mark.parametrize("inst", [i for i in corpus() if not i.name.startswith(("bproduct", "macrocube"))], ids=lambda i: i.name)
def test_metrizable_verdicts_agree_with_the_chain_structure(inst):
    r = infer_properties(inst.expr)
    if not r["metrizable"].is_true:
        return
    X = build(inst.expr)
    assert X.cofinal
    assert not countable_base_check(X).is_false


@pytest.mark.parametrize("name", ["metric", "down-finite", "bouquet-two-rays", "up-tail"])
def test_cross_validation_finds_no_inconsistency(name):
    inst = next(i for i in corpus() if i.name == name)
    X = build(inst.expr)
    rep = cross_validate(name, inst.expr, inst.catalog(X))
    assert rep.records
    assert rep.inconsistencies == []


def test_symbolic_instances_are_skipped_but_keep_their_rule_verdicts():
    inst = next(i for i in corpus() if i.name == "macrocube-wide")
    rep = cross_validate(inst.name, inst.expr)
    assert rep.skipped
    assert rep.inconsistencies == []
