"""Executable coarse geometry.

Balleans over finitely presented ground sets, their bornologies and the
product, B-product, macrocube, bouquet and comb constructions, with
three-valued (True / False with witness / Unknown at a horizon) predicates and
a rule-based inference pass that is cross-checked against those predicates.
"""
__version__ = "0.1.0"

from .groundsets import (  # noqa: E402
    NAT,
    Verdict,
    ap,
    combine,
    enumerate_set,
    finite,
    finiteness,
    generator,
    interval,
    is_empty,
    is_subset,
    normalize,
)
from .core import (  # noqa: E402
    check_axioms,
    compose,
    enumerate_coarse_structures,
    generate,
    invert,
    is_bounded,
    is_connected,
)
from .bornology import (  # noqa: E402
    Abstract,
    ChainBase,
    FiniteSubsets,
    ProductOf,
    cardinal_invariants,
    check_bornology,
)
from .constructions import (  # noqa: E402
    Antidiscrete,
    BProduct,
    Bouquet,
    Comb,
    Discrete,
    Macrocube,
    MetricNat,
    Product,
    build,
    rays,
)
from .analysis import (  # noqa: E402
    asymptotically_disjoint,
    asymptotically_separated,
    is_asymptotic_neighborhood,
    is_slowly_oscillating,
    synthesize_separator,
)
from .inference import cross_validate, infer_properties  # noqa: E402

__all__ = [
    "NAT", "Verdict", "ap", "combine", "enumerate_set", "finite", "finiteness", "generator", "interval",
    "is_empty", "is_subset", "normalize",
    "check_axioms", "compose", "enumerate_coarse_structures", "generate", "invert", "is_bounded", "is_connected",
    "Abstract", "ChainBase", "FiniteSubsets", "ProductOf", "cardinal_invariants", "check_bornology",
    "Antidiscrete", "BProduct", "Bouquet", "Comb", "Discrete", "Macrocube", "MetricNat", "Product", "build", "rays",
    "asymptotically_disjoint", "asymptotically_separated", "is_asymptotic_neighborhood", "is_slowly_oscillating",
    "synthesize_separator", "cross_validate", "infer_properties",
]
