"""Independent reference implementations used by the tests.

Nothing here imports the package's kernels or decision procedures; relations
are frozensets of pairs and sets are python predicates over a range.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from fractions import Fraction


# ---------------------------------------------------------------- relations as sets of pairs

def pairs_of(mask, n):
    return frozenset((i, j) for i in range(n) for j in range(n) if (mask >> (i * n + j)) & 1)


def mask_of(pairs, n):
    m = 0
    for i, j in pairs:
        m |= 1 << (i * n + j)
    return m


def rcompose(E, F):
    """(E ∘ F)[x] = F[E[x]]."""
    after = {}
    for y, z in F:
        after.setdefault(y, []).append(z)
    return frozenset((x, z) for (x, y) in E for z in after.get(y, ()))


_rcompose_frozen = lru_cache(maxsize=1 << 18)(rcompose)  # frozenset arguments only


def rinvert(E):
    return frozenset((y, x) for x, y in E)


def diagonal(n):
    return frozenset((i, i) for i in range(n))


def is_structure(family, n) -> bool:
    """Coarse-structure axioms straight from the definition."""
    fam = {frozenset(R) for R in family}
    d = diagonal(n)
    if not fam or d not in fam or any(not d <= R for R in fam):
        return False
    for R in fam:
        if rinvert(R) not in fam:
            return False
        extra = sorted(R - d)
        for k in range(len(extra) + 1):
            for sub in itertools.combinations(extra, k):
                if d | frozenset(sub) not in fam:
                    return False
    for R in fam:
        for S in fam:
            if _rcompose_frozen(R, S) not in fam:
                return False
    return True


def bell(n) -> int:
    """Number of partitions of an n-set (Bell triangle)."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def closure(gens, n):
    """Smallest family containing Δ ∪ each generator, closed under ∘, ⁻¹ and Δ-containing subsets."""
    d = diagonal(n)
    fam = {d} | {frozenset(g) | d for g in gens}
    fresh = set(fam)
    while fresh:
        # only pairs involving a relation found in the last round can be new
        new = set()
        for R in fresh:
            new.add(rinvert(R))
            for S in fam:
                new.add(_rcompose_frozen(R, S))
                new.add(_rcompose_frozen(S, R))
        fresh = new - fam
        fam |= fresh
    out = set()
    # a relation already collected brings all of its subsets along
    for R in sorted(fam, key=len, reverse=True):
        if R in out:
            continue
        extra = sorted(R - d)
        for k in range(len(extra) + 1):
            for sub in itertools.combinations(extra, k):
                out.add(d | frozenset(sub))
    return out


# ---------------------------------------------------------------- sets of N as predicates

def members(pred, hi):
    return [x for x in range(hi + 1) if pred(x)]


def ep_pred(prelude, period, residues, threshold):
    pre, res = set(prelude), {r % period for r in residues}
    return lambda x: (x in pre) if x < threshold else (x % period in res)


def powers(base, mult=1, hi=1 << 40):
    out, v = [], mult
    while v <= hi:
        out.append(v)
        v *= base
    return out


# ---------------------------------------------------------------- metric N

def thick_meet(Y, Z, r, hi):
    """Points x <= hi within r of both Y and Z (Y, Z sorted lists)."""
    ys, zs = set(), set()
    for y in Y:
        ys.update(range(max(0, y - r), y + r + 1))
    for z in Z:
        zs.update(range(max(0, z - r), z + r + 1))
    return sorted(x for x in ys & zs if x <= hi)


def cross_gaps(Y, Z):
    """Gaps between consecutive points of Y ∪ Z carrying different labels."""
    lab = sorted([(y, 0) for y in Y] + [(z, 1) for z in Z])
    return [b[0] - a[0] for a, b in zip(lab, lab[1:]) if a[1] != b[1]]


def ratio_value(x, Y, Z):
    dy = min(abs(x - y) for y in Y)
    dz = min(abs(x - z) for z in Z)
    if dy == 0:
        return Fraction(0)
    return Fraction(dy, dy + dz)


def ball_diam(f, x, r):
    vals = [f(y) for y in range(max(0, x - r), x + r + 1)]
    return max(vals) - min(vals)


def last_violation(f, r, eps, hi):
    """Largest center x <= hi whose r-ball image has diameter >= eps (-1 when none)."""
    last = -1
    for x in range(hi + 1):
        if ball_diam(f, x, r) >= eps:
            last = x
    return last
