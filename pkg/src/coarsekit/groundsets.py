"""Countable ground sets, finitely-presented subsets and three-valued verdicts.

Two tiers of subsets of the naturals:

* exact: :class:`Finite` and :class:`EventuallyPeriodic`; closed under Boolean
  operations and fully decidable.
* sparse: :class:`SparseGenerator` (strictly increasing stream); Boolean
  combinations with sparse leaves answer membership exactly but finiteness only
  up to a horizon.

Every ground set carries a bijective rank encoding onto an initial segment of
the naturals; "up to horizon h" always means "rank <= h".
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Callable, Optional

import numpy as np

DEFAULT_HORIZON = 4096
WEDGE_POINT = "e"


class EncodingError(ValueError):
    """An element is not a valid member of the ground set."""


class GroundMismatch(ValueError):
    pass


# ====================================================================== verdicts

@dataclass(frozen=True)
class Verdict:
    """True, False (with witness) or Unknown (with the horizon that was searched)."""

    value: Optional[bool]
    witness: Any = None
    horizon: Optional[int] = None
    note: str = ""

    @classmethod
    def true(cls, witness=None, note=""):
        return cls(True, witness, None, note)

    @classmethod
    def false(cls, witness=None, note=""):
        return cls(False, witness, None, note)

    @classmethod
    def unknown(cls, horizon, note=""):
        return cls(None, None, horizon, note)

    @property
    def is_true(self):
        return self.value is True

    @property
    def is_false(self):
        return self.value is False

    @property
    def is_unknown(self):
        return self.value is None

    def negate(self):
        if self.value is None:
            return self
        return Verdict(not self.value, self.witness, self.horizon, self.note)

    def label(self):
        return {True: "TRUE", False: "FALSE", None: "UNKNOWN"}[self.value]

    def __bool__(self):
        raise TypeError("Verdict is three-valued; use .is_true / .is_false / .is_unknown")

    def __str__(self):
        s = self.label()
        if self.value is None:
            s += f" (horizon {self.horizon})"
        if self.witness is not None:
            s += f" witness={_short(self.witness)}"
        if self.note:
            s += f" [{self.note}]"
        return s


def _short(obj, limit=160):
    s = repr(obj)
    return s if len(s) <= limit else s[: limit - 3] + "..."


# ====================================================================== integer helpers

def iroot(n: int, k: int) -> int:
    """Largest m with m**k <= n."""
    if n < 0:
        raise ValueError("negative")
    if n < 2 or k == 1:
        return n
    m = int(round(n ** (1.0 / k)))
    while m ** k > n:
        m -= 1
    while (m + 1) ** k <= n:
        m += 1
    return m


def shell_rank(xs) -> int:
    """Bijection N^k -> N ordering tuples by their maximum coordinate."""
    k = len(xs)
    if k == 0:
        return 0
    if k == 1:
        return xs[0]
    m = max(xs)
    head = shell_rank(xs[:-1])
    d = (m + 1) ** (k - 1) - m ** (k - 1)
    if xs[-1] < m:
        return m ** k + xs[-1] * d + head - m ** (k - 1)
    return m ** k + m * d + head


def shell_unrank(n: int, k: int) -> tuple:
    if k == 0:
        if n:
            raise EncodingError("empty tuple space has one element")
        return ()
    if k == 1:
        return (n,)
    m = iroot(n, k)
    off = n - m ** k
    d = (m + 1) ** (k - 1) - m ** (k - 1)
    if off < m * d:
        last = off // d
        head = shell_unrank(off % d + m ** (k - 1), k - 1)
    else:
        last = m
        head = shell_unrank(off - m * d, k - 1)
    return head + (last,)


def seq_code(u) -> int:
    """Bijection between all finite sequences of naturals and N."""
    c = 0
    for x in reversed(u):
        c = (2 * c + 1) << x
    return c


def seq_decode(c: int) -> list:
    out = []
    while c:
        x = (c & -c).bit_length() - 1
        out.append(x)
        c = ((c >> x) - 1) // 2
    return out


# ====================================================================== ground sets

class GroundSet:
    """A countable carrier with a rank bijection onto ``range(size)`` (or N)."""

    size: Optional[int] = None

    def encode(self, x) -> int:
        raise NotImplementedError

    def decode(self, k: int):
        raise NotImplementedError

    def is_element(self, x) -> bool:
        try:
            self.encode(x)
            return True
        except (EncodingError, TypeError, ValueError):
            return False

    @property
    def is_finite(self):
        return self.size is not None

    def elements(self, horizon: int) -> list:
        top = horizon + 1 if self.size is None else min(horizon + 1, self.size)
        return [self.decode(k) for k in range(max(top, 0))]


@dataclass(frozen=True)
class Naturals(GroundSet):
    def encode(self, x):
        if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)) or x < 0:
            raise EncodingError(f"{x!r} is not a natural number")
        return int(x)

    def decode(self, k):
        if k < 0:
            raise EncodingError("negative rank")
        return int(k)

    def __str__(self):
        return "N"


@dataclass(frozen=True)
class FinitePoints(GroundSet):
    n: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("FinitePoints needs at least one point")

    @property
    def size(self):
        return self.n

    def encode(self, x):
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)) or not 0 <= x < self.n:
            raise EncodingError(f"{x!r} is not a point of {self}")
        return int(x)

    def decode(self, k):
        if not 0 <= k < self.n:
            raise EncodingError(f"rank {k} out of range for {self}")
        return int(k)

    def __str__(self):
        return f"[{self.n}]"


NAT = Naturals()


def _mixed_split(grounds):
    """Indices of finite / infinite grounds plus the finite radix product."""
    fin = [i for i, g in enumerate(grounds) if g.size is not None]
    inf = [i for i, g in enumerate(grounds) if g.size is None]
    radix = 1
    for i in fin:
        radix *= grounds[i].size
    return fin, inf, radix


@dataclass(frozen=True)
class TupleSpace(GroundSet):
    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def size(self):
        if any(g.size is None for g in self.components):
            return None
        return math.prod(g.size for g in self.components)

    def encode(self, x):
        if not isinstance(x, tuple) or len(x) != len(self.components):
            raise EncodingError(f"{x!r} is not a {len(self.components)}-tuple")
        ranks = [g.encode(v) for g, v in zip(self.components, x)]
        fin, inf, radix = _mixed_split(self.components)
        code_f = 0
        for i in reversed(fin):
            code_f = code_f * self.components[i].size + ranks[i]
        code_i = shell_rank([ranks[i] for i in inf]) if inf else 0
        return code_i * radix + code_f

    def decode(self, k):
        if k < 0 or (self.size is not None and k >= self.size):
            raise EncodingError(f"rank {k} out of range")
        fin, inf, radix = _mixed_split(self.components)
        code_i, code_f = divmod(k, radix)
        ranks = [0] * len(self.components)
        for i in fin:
            code_f, ranks[i] = divmod(code_f, self.components[i].size)
        for i, r in zip(inf, shell_unrank(code_i, len(inf))):
            ranks[i] = r
        return tuple(g.decode(r) for g, r in zip(self.components, ranks))

    def __str__(self):
        return " x ".join(str(g) for g in self.components)


def _interleave_sizes(sizes):
    """Rank layout for disjoint unions: finite parts first, then round-robin."""
    fin = [i for i, s in enumerate(sizes) if s is not None]
    inf = [i for i, s in enumerate(sizes) if s is None]
    offsets = {}
    acc = 0
    for i in fin:
        offsets[i] = acc
        acc += sizes[i]
    return fin, inf, offsets, acc


def _union_encode(sizes, part, r):
    fin, inf, offsets, total_fin = _interleave_sizes(sizes)
    if part in offsets:
        return offsets[part] + r
    return total_fin + r * len(inf) + inf.index(part)


def _union_decode(sizes, k):
    fin, inf, offsets, total_fin = _interleave_sizes(sizes)
    if k < total_fin:
        for i in fin:
            if k < offsets[i] + sizes[i]:
                return i, k - offsets[i]
    if not inf:
        raise EncodingError(f"rank {k} out of range")
    q, j = divmod(k - total_fin, len(inf))
    return inf[j], q


@dataclass(frozen=True)
class TaggedUnion(GroundSet):
    """Disjoint union of tagged parts; with ``basepoints`` the basepoints are
    glued into the single element :data:`WEDGE_POINT`."""

    parts: tuple = ()
    basepoints: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple((t, g) for t, g in self.parts))
        if self.basepoints is not None:
            object.__setattr__(self, "basepoints", tuple(self.basepoints))
            if len(self.basepoints) != len(self.parts):
                raise ValueError("one basepoint per part")

    @property
    def wedge(self):
        return self.basepoints is not None

    def _part_sizes(self):
        out = []
        for _, g in self.parts:
            s = g.size
            out.append(None if s is None else s - (1 if self.wedge else 0))
        return out

    @property
    def size(self):
        sizes = self._part_sizes()
        if any(s is None for s in sizes):
            return None
        return sum(sizes) + (1 if self.wedge else 0)

    def tag_index(self, tag):
        for i, (t, _) in enumerate(self.parts):
            if t == tag:
                return i
        raise EncodingError(f"unknown tag {tag!r}")

    def part(self, tag):
        return self.parts[self.tag_index(tag)][1]

    def encode(self, x):
        if self.wedge and x == WEDGE_POINT:
            return 0
        if not isinstance(x, tuple) or len(x) != 2:
            raise EncodingError(f"{x!r} is not a tagged element")
        i = self.tag_index(x[0])
        g = self.parts[i][1]
        r = g.encode(x[1])
        if self.wedge:
            rb = g.encode(self.basepoints[i])
            if r == rb:
                raise EncodingError(f"basepoint of part {x[0]!r} is written {WEDGE_POINT!r}")
            r = r - 1 if r > rb else r
        return _union_encode(self._part_sizes(), i, r) + (1 if self.wedge else 0)

    def decode(self, k):
        if self.wedge:
            if k == 0:
                return WEDGE_POINT
            k -= 1
        i, r = _union_decode(self._part_sizes(), k)
        tag, g = self.parts[i]
        if self.wedge:
            rb = g.encode(self.basepoints[i])
            r = r + 1 if r >= rb else r
        return (tag, g.decode(r))

    def __str__(self):
        j = " v " if self.wedge else " + "
        return j.join(f"{t}:{g}" for t, g in self.parts)


def _rank_without(g, base_rank, r):
    return r - 1 if r > base_rank else r


def _rank_with(g, base_rank, r):
    return r + 1 if r >= base_rank else r


@dataclass(frozen=True)
class IndexedUnion(GroundSet):
    """Copies of one pointed ground indexed by a subset ``index`` of N.

    Elements are ``(alpha, s)`` with ``s`` off the basepoint; with ``wedge`` the
    common basepoint is the extra element :data:`WEDGE_POINT`.
    """

    index: "SetExpr" = None
    part: GroundSet = NAT
    basepoint: Any = 0
    wedge: bool = True

    def _sizes(self):
        k = self.index.count()
        p = self.part.size
        return k, (None if p is None else p - 1)

    @property
    def size(self):
        k, p = self._sizes()
        if k is None or p is None:
            return None
        return k * p + (1 if self.wedge else 0)

    def encode(self, x):
        if self.wedge and x == WEDGE_POINT:
            return 0
        if not isinstance(x, tuple) or len(x) != 2:
            raise EncodingError(f"{x!r} is not an (index, point) pair")
        a, s = x
        if not self.index.contains(a):
            raise EncodingError(f"{a!r} is not an index")
        rb = self.part.encode(self.basepoint)
        r = self.part.encode(s)
        if r == rb:
            raise EncodingError("basepoints are not tagged")
        r = _rank_without(self.part, rb, r)
        i = self.index.index_of(a)
        k, p = self._sizes()
        if k is not None and p is None:
            code = r * k + i
        elif p is not None:
            code = i * p + r
        else:
            code = shell_rank((i, r))
        return code + (1 if self.wedge else 0)

    def decode(self, c):
        if self.wedge:
            if c == 0:
                return WEDGE_POINT
            c -= 1
        k, p = self._sizes()
        if k is not None and p is None:
            r, i = divmod(c, k)
        elif p is not None:
            i, r = divmod(c, p)
            if k is not None and i >= k:
                raise EncodingError("rank out of range")
        else:
            i, r = shell_unrank(c, 2)
        rb = self.part.encode(self.basepoint)
        return (self.index.nth(i), self.part.decode(_rank_with(self.part, rb, r)))

    def __str__(self):
        return f"V[{self.index}]({self.part},{self.basepoint})" if self.wedge else f"U[{self.index}]({self.part})"


@dataclass(frozen=True)
class Supports(GroundSet):
    """Finite subsets of an index set (macrocube points), encoded as bitmasks."""

    index: "SetExpr" = None

    @property
    def size(self):
        k = self.index.count()
        return None if k is None else 2 ** k

    def encode(self, x):
        if not isinstance(x, frozenset):
            raise EncodingError(f"{x!r} is not a frozenset support")
        c = 0
        for a in x:
            if not self.index.contains(a):
                raise EncodingError(f"{a!r} is not an index")
            c |= 1 << self.index.index_of(a)
        return c

    def decode(self, c):
        if c < 0 or (self.size is not None and c >= self.size):
            raise EncodingError("rank out of range")
        out = []
        i = 0
        while c:
            if c & 1:
                out.append(self.index.nth(i))
            c >>= 1
            i += 1
        return frozenset(out)

    def __str__(self):
        return f"Fin({self.index})"


@dataclass(frozen=True)
class SupportSpace(GroundSet):
    """Finitely supported families (x_alpha) over ``index`` in one pointed ground.

    An element is the sorted tuple of its off-basepoint coordinates
    ``((alpha, x_alpha), ...)``.
    """

    index: "SetExpr" = None
    component: GroundSet = NAT
    basepoint: Any = 0

    @property
    def size(self):
        k = self.index.count()
        m = self.component.size
        if k is None or m is None:
            return None
        return m ** k

    def _value(self, x):
        rb = self.component.encode(self.basepoint)
        r = self.component.encode(x)
        if r == rb:
            return 0
        return _rank_without(self.component, rb, r) + 1

    def _unvalue(self, v):
        rb = self.component.encode(self.basepoint)
        if v == 0:
            return self.basepoint
        return self.component.decode(_rank_with(self.component, rb, v - 1))

    def encode(self, x):
        if not isinstance(x, tuple):
            raise EncodingError(f"{x!r} is not a sparse tuple")
        vals = {}
        prev = None
        for item in x:
            if not isinstance(item, tuple) or len(item) != 2:
                raise EncodingError(f"bad coordinate {item!r}")
            a, v = item
            if prev is not None and a <= prev:
                raise EncodingError("coordinates must be strictly sorted by index")
            prev = a
            if not self.index.contains(a):
                raise EncodingError(f"{a!r} is not an index")
            val = self._value(v)
            if val == 0:
                raise EncodingError("basepoint coordinates are omitted")
            vals[self.index.index_of(a)] = val
        k = self.index.count()
        m = self.component.size
        if k is not None:
            vec = tuple(vals.get(i, 0) for i in range(k))
            comps = tuple(FinitePoints(m) if m is not None else NAT for _ in range(k))
            return TupleSpace(comps).encode(vec)
        if m is not None:
            return sum(v * m ** i for i, v in vals.items())
        if not vals:
            return 0
        top = max(vals)
        seq = [vals.get(i, 0) for i in range(top + 1)]
        seq[-1] -= 1
        return seq_code(seq)

    def decode(self, c):
        k = self.index.count()
        m = self.component.size
        if k is not None:
            comps = tuple(FinitePoints(m) if m is not None else NAT for _ in range(k))
            seq = list(TupleSpace(comps).decode(c))
        elif m is not None:
            seq = []
            while c:
                c, d = divmod(c, m)
                seq.append(d)
        else:
            seq = seq_decode(c)
            if seq:
                seq[-1] += 1
        return tuple((self.index.nth(i), self._unvalue(v)) for i, v in enumerate(seq) if v)

    def __str__(self):
        return f"Sum[{self.index}]({self.component},{self.basepoint})"


# ====================================================================== set expressions

class SetExpr:
    """A finitely presented subset of a ground set with decidable membership."""

    ground: GroundSet

    def contains(self, x) -> bool:
        raise NotImplementedError

    def __contains__(self, x):
        return self.contains(x)

    @property
    def is_exact(self) -> bool:
        return False

    def enumerate(self, horizon: int) -> list:
        """Members with rank <= horizon, in rank order."""
        if isinstance(self.ground, Naturals):
            return [int(i) for i in np.flatnonzero(self.mask(horizon))]
        return [x for x in self.ground.elements(horizon) if self.contains(x)]

    def mask(self, horizon: int) -> np.ndarray:
        """Boolean indicator over ranks 0..horizon."""
        m = np.zeros(horizon + 1, dtype=bool)
        for x in self.ground.elements(horizon):
            if self.contains(x):
                m[self.ground.encode(x)] = True
        return m

    # indexing support for subsets of N (index sets of families)
    def count(self) -> Optional[int]:
        """Number of elements if finite and known, else None."""
        if self.ground.size is not None:
            return len(self.enumerate(self.ground.size - 1))
        v = finiteness(self)
        if v.is_true:
            return len(self.enumerate(_finite_bound(self)))
        return None

    def index_of(self, x) -> int:
        if not self.contains(x):
            raise EncodingError(f"{x!r} not in {self}")
        return len(self.enumerate(self.ground.encode(x))) - 1

    def nth(self, i: int):
        h = max(16, 2 * i + 2)
        while True:
            got = self.enumerate(h)
            if len(got) > i:
                return got[i]
            if self.ground.size is not None and h >= self.ground.size:
                raise EncodingError(f"{self} has fewer than {i + 1} elements")
            if h > 1 << 22:
                raise EncodingError(f"could not find element {i} of {self}")
            h *= 4

    def __or__(self, other):
        return combine(self, other, "union")

    def __and__(self, other):
        return combine(self, other, "intersection")

    def __sub__(self, other):
        return combine(self, other, "difference")


def _finite_bound(s):
    if isinstance(s, Finite):
        return max((s.ground.encode(x) for x in s.elements), default=0)
    n = normalize(s)
    if isinstance(n, Finite):
        return max(n.elements, default=0)
    raise ValueError("not a decided finite set")


@dataclass(frozen=True)
class Finite(SetExpr):
    elements: tuple = ()
    ground: GroundSet = NAT

    def __post_init__(self):
        g = self.ground
        elems = set(self.elements)
        for x in elems:
            g.encode(x)
        object.__setattr__(self, "elements", tuple(sorted(elems, key=g.encode)))
        object.__setattr__(self, "_set", frozenset(elems))

    def contains(self, x):
        return x in self._set

    @property
    def is_exact(self):
        return True

    def enumerate(self, horizon):
        g = self.ground
        return [x for x in self.elements if g.encode(x) <= horizon]

    def mask(self, horizon):
        m = np.zeros(horizon + 1, dtype=bool)
        for x in self.elements:
            r = self.ground.encode(x)
            if r <= horizon:
                m[r] = True
        return m

    def count(self):
        return len(self.elements)

    def index_of(self, x):
        if x not in self._set:
            raise EncodingError(f"{x!r} not in {self}")
        return self.elements.index(x)

    def nth(self, i):
        return self.elements[i]

    def __str__(self):
        return "{" + ", ".join(map(str, self.elements)) + "}"


@dataclass(frozen=True)
class EventuallyPeriodic(SetExpr):
    """x in S iff (x < threshold and x in prelude) or (x >= threshold and x % period in residues)."""

    prelude: frozenset = frozenset()
    period: int = 1
    residues: frozenset = frozenset()
    threshold: int = 0

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be positive")
        if self.threshold < 0:
            raise ValueError("threshold must be natural")
        object.__setattr__(self, "prelude", frozenset(int(p) for p in self.prelude if 0 <= p < self.threshold))
        object.__setattr__(self, "residues", frozenset(int(r) % self.period for r in self.residues))

    @property
    def ground(self):
        return NAT

    @property
    def is_exact(self):
        return True

    def contains(self, x):
        NAT.encode(x)
        if x < self.threshold:
            return x in self.prelude
        return x % self.period in self.residues

    def mask(self, horizon):
        idx = np.arange(horizon + 1)
        res = np.zeros(self.period, dtype=bool)
        res[list(self.residues)] = True
        m = res[idx % self.period]
        m[: min(self.threshold, horizon + 1)] = False
        for p in self.prelude:
            if p <= horizon:
                m[p] = True
        return m

    def count(self):
        return None if self.residues else len(self.prelude)

    def index_of(self, x):
        if not self.contains(x):
            raise EncodingError(f"{x!r} not in {self}")
        if x < self.threshold:
            return sum(1 for p in self.prelude if p < x)
        return len(self.prelude) + _periodic_count(self, self.threshold, x)

    def nth(self, i):
        pre = sorted(self.prelude)
        if i < len(pre):
            return pre[i]
        if not self.residues:
            raise EncodingError("index past the end of a finite set")
        i -= len(pre)
        t = self.threshold
        seq = sorted(t + ((r - t) % self.period) for r in self.residues)
        q, j = divmod(i, len(seq))
        return seq[j] + q * self.period

    def __str__(self):
        if self.threshold == 0 and not self.prelude and len(self.residues) == 1:
            return f"AP({self.period},{next(iter(self.residues))})"
        return f"EP(pre={sorted(self.prelude)}, p={self.period}, R={sorted(self.residues)}, t={self.threshold})"


def _periodic_count(s, lo, hi):
    """Members of the periodic part in [lo, hi)."""
    full, rem = divmod(hi - lo, s.period)
    n = full * len(s.residues)
    for x in range(lo + full * s.period, hi):
        if x % s.period in s.residues:
            n += 1
    return n


GENERATORS: dict[str, Callable[[int], int]] = {
    "pow2": lambda n: 2 ** n,
    "pow3": lambda n: 3 ** n,
    "pow4": lambda n: 4 ** n,
    "two-pow4": lambda n: 2 * 4 ** n,
    "squares": lambda n: n * n,
    "cubes": lambda n: n ** 3,
    "factorial": lambda n: math.factorial(n + 1),
    "triangular": lambda n: n * (n + 1) // 2,
}


@dataclass(frozen=True)
class SparseGenerator(SetExpr):
    """{g(0) < g(1) < ...} for a strictly increasing generator ``g``."""

    name: str = "pow2"
    fn: Optional[Callable[[int], int]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.fn is None:
            if self.name not in GENERATORS:
                raise KeyError(f"unknown generator {self.name!r}")
            object.__setattr__(self, "fn", GENERATORS[self.name])
        object.__setattr__(self, "_cache", [])

    @property
    def ground(self):
        return NAT

    def _extend_to(self, value=None, count=None):
        cache = self._cache
        while (value is not None and (not cache or cache[-1] < value)) or (
            count is not None and len(cache) < count
        ):
            v = int(self.fn(len(cache)))
            if cache and v <= cache[-1]:
                raise ValueError(f"generator {self.name} is not strictly increasing at n={len(cache)}")
            if v < 0:
                raise ValueError("generator produced a negative value")
            cache.append(v)
        return cache

    def contains(self, x):
        NAT.encode(x)
        cache = self._extend_to(value=x)
        k = bisect.bisect_left(cache, x)
        return k < len(cache) and cache[k] == x

    def values_upto(self, horizon):
        cache = self._extend_to(value=horizon + 1)
        return cache[: bisect.bisect_right(cache, horizon)]

    def mask(self, horizon):
        m = np.zeros(horizon + 1, dtype=bool)
        m[self.values_upto(horizon)] = True
        return m

    def enumerate(self, horizon):
        return list(self.values_upto(horizon))

    def count(self):
        return None

    def index_of(self, x):
        if not self.contains(x):
            raise EncodingError(f"{x!r} not in {self}")
        return bisect.bisect_left(self._cache, x)

    def nth(self, i):
        return self._extend_to(count=i + 1)[i]

    def __str__(self):
        return f"gen:{self.name}"


def _common_ground(parts):
    g = parts[0].ground
    for p in parts[1:]:
        if p.ground != g:
            raise GroundMismatch(f"{p.ground} vs {g}")
    return g


@dataclass(frozen=True)
class Union(SetExpr):
    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("Union needs at least one part")
        _common_ground(self.parts)

    @property
    def ground(self):
        return self.parts[0].ground

    def contains(self, x):
        return any(p.contains(x) for p in self.parts)

    def mask(self, horizon):
        return reduce(np.logical_or, (p.mask(horizon) for p in self.parts))

    def enumerate(self, horizon):
        if isinstance(self.ground, Naturals):
            return super().enumerate(horizon)
        seen = {}
        for p in self.parts:
            for x in p.enumerate(horizon):
                seen[x] = None
        return sorted(seen, key=self.ground.encode)

    def __str__(self):
        return "(" + " | ".join(map(str, self.parts)) + ")"


@dataclass(frozen=True)
class Intersection(SetExpr):
    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("Intersection needs at least one part")
        _common_ground(self.parts)

    @property
    def ground(self):
        return self.parts[0].ground

    def contains(self, x):
        return all(p.contains(x) for p in self.parts)

    def mask(self, horizon):
        return reduce(np.logical_and, (p.mask(horizon) for p in self.parts))

    def enumerate(self, horizon):
        if isinstance(self.ground, Naturals):
            return super().enumerate(horizon)
        first = min(self.parts, key=lambda p: 0 if isinstance(p, Finite) else 1)
        return [x for x in first.enumerate(horizon) if self.contains(x)]

    def __str__(self):
        return "(" + " & ".join(map(str, self.parts)) + ")"


@dataclass(frozen=True)
class Complement(SetExpr):
    inner: SetExpr = None

    @property
    def ground(self):
        return self.inner.ground

    def contains(self, x):
        self.ground.encode(x)
        return not self.inner.contains(x)

    def mask(self, horizon):
        m = ~self.inner.mask(horizon)
        if self.ground.size is not None:
            m[self.ground.size:] = False
        return m

    def __str__(self):
        return f"~{self.inner}"


@dataclass(frozen=True)
class Rectangle(SetExpr):
    """Product of component sets over a TupleSpace ground."""

    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def ground(self):
        return TupleSpace(tuple(c.ground for c in self.components))

    def contains(self, x):
        self.ground.encode(x)
        return all(c.contains(v) for c, v in zip(self.components, x))

    def enumerate(self, horizon):
        g = self.ground
        if all(isinstance(c, Finite) for c in self.components):
            pts = [p for p in itertools.product(*(c.elements for c in self.components)) if g.encode(p) <= horizon]
            return sorted(pts, key=g.encode)
        return super().enumerate(horizon)

    def __str__(self):
        return " x ".join(map(str, self.components))


def part_ground(ground: GroundSet, tag) -> GroundSet:
    """The ground of the part carrying ``tag`` in a tagged or indexed union."""
    if isinstance(ground, TaggedUnion):
        return ground.part(tag)
    if isinstance(ground, IndexedUnion):
        if not ground.index.contains(tag):
            raise EncodingError(f"{tag!r} is not an index")
        return ground.part
    raise GroundMismatch("tags need a TaggedUnion or IndexedUnion ground")


def part_basepoint(ground: GroundSet, tag):
    if isinstance(ground, TaggedUnion):
        return ground.basepoints[ground.tag_index(tag)] if ground.wedge else None
    return ground.basepoint if ground.wedge else None


@dataclass(frozen=True)
class Tagged(SetExpr):
    """{(tag, s) : s in inner} inside a tagged or indexed union.

    In a wedge the glued point belongs to the set when the part's basepoint does.
    """

    tag: Any = None
    inner: SetExpr = None
    ground: GroundSet = None

    def __post_init__(self):
        if part_ground(self.ground, self.tag) != self.inner.ground:
            raise GroundMismatch("tag part and inner set grounds differ")

    def contains(self, x):
        if getattr(self.ground, "wedge", False) and x == WEDGE_POINT:
            return self.inner.contains(part_basepoint(self.ground, self.tag))
        self.ground.encode(x)
        return x[0] == self.tag and self.inner.contains(x[1])

    def enumerate(self, horizon):
        g = self.ground
        base = part_basepoint(g, self.tag)
        out = []
        for s in self.inner.enumerate(horizon):
            x = WEDGE_POINT if base is not None and s == base else (self.tag, s)
            if g.encode(x) <= horizon:
                out.append(x)
        return out

    def __str__(self):
        return f"{self.tag}:{self.inner}"


@dataclass(frozen=True, eq=False)
class Predicate(SetExpr):
    """Membership given by a callable; used for lazily described sets such as
    images of entourages. ``lister(h)`` may supply a fast enumeration."""

    ground: GroundSet = NAT
    fn: Callable[[Any], bool] = field(default=None, compare=False)
    name: str = "pred"
    lister: Optional[Callable[[int], list]] = field(default=None, compare=False, repr=False)
    finite_hint: Optional[bool] = None

    def contains(self, x):
        self.ground.encode(x)
        return bool(self.fn(x))

    def enumerate(self, horizon):
        if self.lister is not None:
            return self.lister(horizon)
        return super().enumerate(horizon)

    def mask(self, horizon):
        if self.lister is not None and isinstance(self.ground, Naturals):
            m = np.zeros(horizon + 1, dtype=bool)
            m[[x for x in self.lister(horizon)]] = True
            return m
        return super().mask(horizon)

    def __str__(self):
        return self.name


# ====================================================================== constructors

def finite(elements, ground: GroundSet = NAT) -> Finite:
    return Finite(tuple(elements), ground)


def interval(lo: int, hi: int) -> Finite:
    return Finite(tuple(range(max(lo, 0), hi + 1)), NAT)


def ap(period: int, residue: int) -> SetExpr:
    """The arithmetic progression {x : x = residue mod period} in canonical form."""
    return normalize(EventuallyPeriodic(frozenset(), period, frozenset({residue % period}), 0))


def full(ground: GroundSet = NAT) -> SetExpr:
    if isinstance(ground, Naturals):
        return EventuallyPeriodic(frozenset(), 1, frozenset({0}), 0)
    if ground.size is not None:
        return Finite(tuple(ground.decode(k) for k in range(ground.size)), ground)
    return Complement(Finite((), ground))


def empty(ground: GroundSet = NAT) -> Finite:
    return Finite((), ground)


def generator(name: str) -> SparseGenerator:
    return SparseGenerator(name)


# ====================================================================== exact tier

def _exact_params(s):
    if isinstance(s, Finite):
        top = max(s.elements, default=-1)
        return frozenset(s.elements), 1, frozenset(), top + 1
    return s.prelude, s.period, s.residues, s.threshold


def exact_form(s: SetExpr) -> Optional[SetExpr]:
    """Exact-tier equivalent of ``s`` over N, or None when a sparse leaf blocks it."""
    if not isinstance(s.ground, Naturals):
        return None
    if isinstance(s, (Finite, EventuallyPeriodic)):
        return s
    if isinstance(s, Complement):
        inner = exact_form(s.inner)
        return None if inner is None else _exact_complement(inner)
    if isinstance(s, (Union, Intersection)):
        parts = [exact_form(p) for p in s.parts]
        if any(p is None for p in parts):
            if isinstance(s, Intersection):
                fins = [p for p in parts if isinstance(p, Finite)]
                if fins:
                    # filter the finite part pointwise; membership stays exact
                    return Finite(tuple(x for x in fins[0].elements if s.contains(x)), NAT)
            return None
        op = "union" if isinstance(s, Union) else "intersection"
        return reduce(lambda a, b: _exact_combine(a, b, op), parts)
    return None


def _exact_complement(s):
    P, p, R, t = _exact_params(s)
    return normalize(EventuallyPeriodic(frozenset(range(t)) - P, p, frozenset(range(p)) - R, t))


def _exact_combine(a, b, op):
    Pa, pa, Ra, ta = _exact_params(a)
    Pb, pb, Rb, tb = _exact_params(b)
    L = pa * pb // math.gcd(pa, pb)
    T = max(ta, tb)
    f = {
        "union": lambda u, v: u or v,
        "intersection": lambda u, v: u and v,
        "difference": lambda u, v: u and not v,
    }[op]
    prelude = frozenset(x for x in range(T) if f(a.contains(x), b.contains(x)))
    residues = set()
    for x in range(T, T + L):
        if f(a.contains(x), b.contains(x)):
            residues.add(x % L)
    return normalize(EventuallyPeriodic(prelude, L, frozenset(residues), T))


def normalize(s: SetExpr) -> SetExpr:
    """Canonical exact-tier form: minimal period, then minimal threshold.

    Sets with no periodic residues come back as :class:`Finite`. Non-exact
    inputs are returned unchanged.
    """
    if isinstance(s, Finite):
        return s
    if not isinstance(s, EventuallyPeriodic):
        e = exact_form(s)
        return s if e is None else normalize(e)
    p, R = s.period, s.residues
    if not R:
        return Finite(tuple(sorted(s.prelude)), NAT)
    for d in sorted(k for k in range(1, p + 1) if p % k == 0):
        if all(((r + d) % p in R) == (r in R) for r in range(p)):
            R = frozenset(r for r in R if r < d)
            p = d
            break
    t = s.threshold
    P = set(s.prelude)
    while t > 0 and ((t - 1) in P) == ((t - 1) % p in R):
        t -= 1
        P.discard(t)
    return EventuallyPeriodic(frozenset(P), p, R, t)


def combine(S: SetExpr, T: SetExpr, op: str) -> SetExpr:
    """Union / intersection / difference; exact inputs stay in the exact tier."""
    if op not in ("union", "intersection", "difference"):
        raise ValueError(f"unknown operation {op!r}")
    if S.ground != T.ground:
        raise GroundMismatch(f"{S.ground} vs {T.ground}")
    if isinstance(S.ground, Naturals):
        a, b = exact_form(S), exact_form(T)
        if a is not None and b is not None:
            return _exact_combine(a, b, op)
    elif isinstance(S, Finite) and isinstance(T, Finite):
        f = {"union": set.union, "intersection": set.intersection, "difference": set.difference}[op]
        return Finite(tuple(f(set(S.elements), set(T.elements))), S.ground)
    if op == "union":
        return Union((S, T))
    if op == "intersection":
        return Intersection((S, T))
    return Intersection((S, Complement(T)))


def contains(S: SetExpr, x) -> bool:
    """Membership; raises :class:`EncodingError` for malformed elements."""
    S.ground.encode(x)
    return S.contains(x)


def enumerate_set(S: SetExpr, horizon: int) -> list:
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    return S.enumerate(horizon)


# ====================================================================== finiteness

def finiteness(S: SetExpr, horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Is ``S`` finite?  Exact-tier inputs always decide."""
    if S.ground.size is not None:
        return Verdict.true(note="finite ground")
    e = exact_form(S) if isinstance(S.ground, Naturals) else None
    if e is not None:
        e = normalize(e)
        if isinstance(e, Finite):
            return Verdict.true()
        r = min(e.residues)
        first = e.threshold + ((r - e.threshold) % e.period)
        return Verdict.false(
            {"residue": r, "period": e.period, "from": e.threshold, "elements": [first + k * e.period for k in range(3)]},
            note="unbounded residue class",
        )
    if isinstance(S, Finite):
        return Verdict.true()
    if isinstance(S, SparseGenerator):
        return Verdict.false({"elements": [S.nth(k) for k in range(4)]}, note="strictly increasing generator")
    if isinstance(S, Union):
        vs = [finiteness(p, horizon) for p in S.parts]
        for v in vs:
            if v.is_false:
                return v
        if all(v.is_true for v in vs):
            return Verdict.true()
        return Verdict.unknown(horizon)
    if isinstance(S, Intersection):
        vs = [finiteness(p, horizon) for p in S.parts]
        if any(v.is_true for v in vs):
            return Verdict.true()
        return Verdict.unknown(horizon, note="intersection of infinite sets")
    if isinstance(S, Complement):
        v = finiteness(S.inner, horizon)
        if v.is_true:
            return Verdict.false(note="complement of a finite set in an infinite ground")
        return Verdict.unknown(horizon)
    if isinstance(S, Rectangle):
        vs = [finiteness(c, horizon) for c in S.components]
        empties = [is_empty(c, horizon) for c in S.components]
        if any(e.is_true for e in empties) or all(v.is_true for v in vs):
            return Verdict.true()
        if any(v.is_false for v in vs) and all(e.is_false for e in empties):
            return Verdict.false(note="infinite side")
        return Verdict.unknown(horizon)
    if isinstance(S, Tagged):
        return finiteness(S.inner, horizon)
    if isinstance(S, Predicate) and S.finite_hint is not None:
        return Verdict.true() if S.finite_hint else Verdict.false(note="declared infinite")
    return Verdict.unknown(horizon)


def is_empty(S: SetExpr, horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Emptiness; exact when the set normalizes, otherwise searched up to ``horizon``."""
    if isinstance(S.ground, Naturals):
        e = exact_form(S)
        if e is not None:
            e = normalize(e)
            if isinstance(e, Finite) and not e.elements:
                return Verdict.true()
            return Verdict.false(e.nth(0))
    if isinstance(S, Finite):
        return Verdict.true() if not S.elements else Verdict.false(S.elements[0])
    if isinstance(S, SparseGenerator):
        return Verdict.false(S.nth(0))
    found = S.enumerate(horizon)
    if found:
        return Verdict.false(found[0])
    fv = finiteness(S, horizon)
    if fv.is_false:
        return Verdict.false(note="infinite")
    return Verdict.unknown(horizon)


def is_subset(S: SetExpr, T: SetExpr, horizon: int = DEFAULT_HORIZON) -> Verdict:
    """S ⊆ T: exact on the exact tier, otherwise via emptiness of S \\ T."""
    v = is_empty(combine(S, T, "difference"), horizon)
    if v.is_false:
        return Verdict.false(v.witness)
    return v
