"""The named instance corpus used by cross-validation, the CLI and the acceptance suite."""
from __future__ import annotations

from dataclasses import dataclass, field

from .bornology import ALEPH0, AT_LEAST_ALEPH1, Abstract, ChainBase, FiniteSubsets, Powerset, ProductOf
from .constructions import (
    AbstractBallean,
    Antidiscrete,
    BProduct,
    Bouquet,
    Comb,
    Discrete,
    Family,
    FiniteMetric,
    Macrocube,
    MetricNat,
    Product,
    doubling_relation,
    rays,
    shift_relation,
)
from .groundsets import NAT, FinitePoints, IndexedUnion, Tagged, TaggedUnion, ap, finite, generator

EVENS = ap(2, 0)
ODDS = ap(2, 1)


def nat_catalog():
    return [("evens", EVENS), ("odds", ODDS), ("pow4", generator("pow4")), ("two-pow4", generator("two-pow4")),
            ("small", finite([0, 1, 2, 3]))]


def two_ray_catalog(ground):
    """Sets on a bouquet of two rays: each unbounded on both spines, disjoint."""
    y = Tagged(0, generator("pow4"), ground) | Tagged(1, generator("two-pow4"), ground)
    z = Tagged(0, generator("two-pow4"), ground) | Tagged(1, generator("pow4"), ground)
    return [("pow4|two-pow4", y), ("two-pow4|pow4", z), ("spine0-evens", Tagged(0, EVENS, ground)),
            ("spine0-odds", Tagged(0, ODDS, ground))]


def spine_catalog(ground):
    """Sets on spines 0 and 1 of a bouquet over an infinite index."""
    return [("s0-pow4", Tagged(0, generator("pow4"), ground)),
            ("s0-two-pow4|s1-evens", Tagged(0, generator("two-pow4"), ground) | Tagged(1, EVENS, ground))]


def comb_catalog(ground):
    return [("handle-pow4", Tagged("handle", generator("pow4"), ground)),
            ("handle-two-pow4", Tagged("handle", generator("two-pow4"), ground))]


@dataclass
class Instance:
    name: str
    expr: object
    catalog_fn: object = None
    notes: str = ""
    tags: tuple = field(default_factory=tuple)

    def catalog(self, X=None):
        if self.catalog_fn is None:
            return []
        if X is None:
            return self.catalog_fn(None)
        return self.catalog_fn(X.ground)


def corpus() -> list:
    """Twelve-plus instances over products, B-products, macrocubes, bouquets, combs, ↓ and ↑."""
    fin = FiniteSubsets(NAT)
    tail = ChainBase(NAT, EVENS)
    wide = Abstract(AT_LEAST_ALEPH1, AT_LEAST_ALEPH1, AT_LEAST_ALEPH1, "wide")
    return [
        Instance("product-metric", Product((MetricNat(), MetricNat()))),
        Instance("product-abstract", Product((MetricNat(), AbstractBallean(wide, "K")))),
        Instance("bproduct-finite", BProduct(fin, rays()), tags=("metrizable-direction",)),
        Instance("bproduct-tail", BProduct(tail, rays()), tags=("diagonal-direction",)),
        Instance("bproduct-bounded", BProduct(fin, Family(FiniteMetric(2)))),
        Instance("macrocube-finite", Macrocube(fin)),
        Instance("macrocube-wide", Macrocube(wide)),
        Instance("bouquet-two-rays", Bouquet(Powerset(FinitePoints(2)), rays()), lambda g: two_ray_catalog(g) if g else []),
        Instance("bouquet-omega", Bouquet(fin, rays())),
        Instance("bouquet-tail", Bouquet(tail, rays()), lambda g: spine_catalog(g) if g else [],
                 tags=("diagonal-direction",)),
        Instance("comb-pow4", Comb(MetricNat(), generator("pow4"), rays()), lambda g: comb_catalog(g) if g else []),
        Instance("down-finite", Discrete(fin), lambda g: nat_catalog()),
        Instance("down-tail", Discrete(tail), lambda g: nat_catalog()),
        Instance("up-finite", Antidiscrete(fin, (doubling_relation(),)), lambda g: nat_catalog()),
        Instance("up-tail", Antidiscrete(tail, (shift_relation(2),)), lambda g: nat_catalog()),
        Instance("up-product", Antidiscrete(ProductOf(wide, Abstract(ALEPH0, ALEPH0, ALEPH0, "countable")))),
        Instance("metric", MetricNat(), lambda g: nat_catalog()),
    ]


def bornology_corpus() -> list:
    """Bornology presentations for the cardinal ordering checks."""
    fin = FiniteSubsets(NAT)
    chain = ChainBase(NAT)
    tail = ChainBase(NAT, EVENS)
    abstract = [
        Abstract(ALEPH0, ALEPH0, ALEPH0, "countable"),
        Abstract(ALEPH0, ALEPH0, AT_LEAST_ALEPH1, "tall"),
        Abstract(ALEPH0, AT_LEAST_ALEPH1, AT_LEAST_ALEPH1, "broad"),
        Abstract(AT_LEAST_ALEPH1, AT_LEAST_ALEPH1, AT_LEAST_ALEPH1, "wide"),
    ]
    concrete = [fin, chain, tail]
    base = concrete + abstract
    products = [ProductOf(a, b) for a in base for b in base]
    return base + products
