"""Hot loops: bitmask relation algebra on small grounds and 1-d horizon sweeps.

Relations on ``n <= 6`` points are packed into an int64: pair ``(i, j)`` is bit
``i * n + j``. Every public function dispatches to a numba kernel (``_nb_*``)
or to a numpy/pure-python twin (``_np_*``); both are importable so tests can
compare them directly.
"""
from functools import lru_cache

import numpy as np

from ._accel import BACKEND, HAVE_NUMBA, njit

__all__ = [
    "BACKEND",
    "diag_mask",
    "full_mask",
    "compose",
    "invert",
    "compose_arrays",
    "invert_arrays",
    "downset",
    "word_closure",
    "check_family",
    "composition_violation",
    "down_violation",
    "equivalence_closure",
    "distance_transform",
    "csr_dilate",
    "csr_diam",
    "sliding_diam",
]

MAX_POINTS = 6
SMALL_FAMILY = 32  # numpy twins switch to python sets below this size
CLOSURE_MAX_POINTS = 4

# check_family status codes
OK, NO_DIAGONAL, NOT_COMPOSITION_CLOSED, NOT_INVERSE_CLOSED, NOT_DOWN_CLOSED, EMPTY = range(6)


def diag_mask(n):
    m = 0
    for i in range(n):
        m |= 1 << (i * n + i)
    return m


def full_mask(n):
    return (1 << (n * n)) - 1


def _check_n(n, limit=MAX_POINTS):
    if not 0 < n <= limit:
        raise ValueError(f"bitmask relations support 1..{limit} points, got {n}")


# ---------------------------------------------------------------- scalar ops
# Scalars stay in python: a call into numba costs more than the work.

def compose(a, b, n):
    """Bitmask of ``a ∘ b`` = {(x, y): ∃z (x,z) ∈ a, (z,y) ∈ b}."""
    row = (1 << n) - 1
    out = 0
    for i in range(n):
        ra = (a >> (i * n)) & row
        acc = 0
        k = 0
        while ra:
            if ra & 1:
                acc |= (b >> (k * n)) & row
            ra >>= 1
            k += 1
        out |= acc << (i * n)
    return out


@lru_cache(maxsize=1 << 16)
def invert(a, n):
    out = 0
    for i in range(n):
        for j in range(n):
            if (a >> (i * n + j)) & 1:
                out |= 1 << (j * n + i)
    return out


# ---------------------------------------------------------------- numba kernels

@njit(cache=True)
def _nb_compose1(a, b, n):
    row = (np.int64(1) << n) - 1
    out = np.int64(0)
    for i in range(n):
        ra = (a >> (i * n)) & row
        acc = np.int64(0)
        for k in range(n):
            if (ra >> k) & 1:
                acc |= (b >> (k * n)) & row
        out |= acc << (i * n)
    return out


@njit(cache=True)
def _nb_invert1(a, n):
    out = np.int64(0)
    for i in range(n):
        for j in range(n):
            if (a >> (i * n + j)) & 1:
                out |= np.int64(1) << (j * n + i)
    return out


@njit(cache=True)
def _nb_compose_arrays(A, B, n):
    out = np.empty(A.shape[0], dtype=np.int64)
    for t in range(A.shape[0]):
        out[t] = _nb_compose1(A[t], B[t], n)
    return out


@njit(cache=True)
def _nb_invert_arrays(A, n):
    out = np.empty(A.shape[0], dtype=np.int64)
    for t in range(A.shape[0]):
        out[t] = _nb_invert1(A[t], n)
    return out


@njit(cache=True)
def _nb_downset(mask, diag):
    free = mask & ~diag
    cnt = 0
    f = free
    while f:
        f &= f - 1
        cnt += 1
    out = np.empty(np.int64(1) << cnt, dtype=np.int64)
    s = free
    i = 0
    while True:
        out[i] = s | diag
        i += 1
        if s == 0:
            break
        s = (s - 1) & free
    return np.sort(out)


@njit(cache=True)
def _nb_member(sorted_masks, m):
    k = np.searchsorted(sorted_masks, m)
    return k < sorted_masks.shape[0] and sorted_masks[k] == m


@njit(cache=True)
def _nb_check_family(masks, n, diag):
    # masks sorted ascending and unique; returns (code, witness_a, witness_b)
    m = masks.shape[0]
    if m == 0:
        return EMPTY, np.int64(-1), np.int64(-1)
    for t in range(m):
        if masks[t] & diag != diag:
            return NO_DIAGONAL, masks[t], np.int64(-1)
    for t in range(m - 1, -1, -1):
        inv = _nb_invert1(masks[t], n)
        if not _nb_member(masks, inv):
            return NOT_INVERSE_CLOSED, masks[t], np.int64(-1)
    # largest members first so a violation surfaces early
    for t in range(m - 1, -1, -1):
        for u in range(m - 1, -1, -1):
            c = _nb_compose1(masks[t], masks[u], n)
            if not _nb_member(masks, c):
                return NOT_COMPOSITION_CLOSED, masks[t], masks[u]
    for t in range(m - 1, -1, -1):
        free = masks[t] & ~diag
        s = free
        while True:
            if not _nb_member(masks, s | diag):
                return NOT_DOWN_CLOSED, masks[t], s | diag
            if s == 0:
                break
            s = (s - 1) & free
    return OK, np.int64(-1), np.int64(-1)


@njit(cache=True)
def _nb_composition_violation(masks, n):
    m = masks.shape[0]
    for t in range(m - 1, -1, -1):
        for u in range(m - 1, -1, -1):
            c = _nb_compose1(masks[t], masks[u], n)
            if not _nb_member(masks, c):
                return masks[t], masks[u]
    return np.int64(-1), np.int64(-1)


@njit(cache=True)
def _nb_down_violation(masks, diag):
    m = masks.shape[0]
    for t in range(m - 1, -1, -1):
        if masks[t] & diag != diag:
            continue
        free = masks[t] & ~diag
        s = free
        while True:
            if not _nb_member(masks, s | diag):
                return masks[t], s | diag
            if s == 0:
                break
            s = (s - 1) & free
    return np.int64(-1), np.int64(-1)


@njit(cache=True)
def _nb_word_closure(gens, n):
    size = np.int64(1) << (n * n)
    seen = np.zeros(size, dtype=np.bool_)
    items = np.empty(size, dtype=np.int64)
    cnt = 0
    for g in gens:
        if not seen[g]:
            seen[g] = True
            items[cnt] = g
            cnt += 1
    head = 0
    while head < cnt:
        a = items[head]
        head += 1
        inv = _nb_invert1(a, n)
        if not seen[inv]:
            seen[inv] = True
            items[cnt] = inv
            cnt += 1
        # compose the new item with everything discovered so far, both orders
        for t in range(head):
            b = items[t]
            c1 = _nb_compose1(a, b, n)
            if not seen[c1]:
                seen[c1] = True
                items[cnt] = c1
                cnt += 1
            c2 = _nb_compose1(b, a, n)
            if not seen[c2]:
                seen[c2] = True
                items[cnt] = c2
                cnt += 1
    return np.sort(items[:cnt])


@njit(cache=True)
def _nb_distance_transform(mask):
    n = mask.shape[0]
    big = np.int64(1) << 60
    out = np.empty(n, dtype=np.int64)
    last = -1
    for i in range(n):
        if mask[i]:
            last = i
        out[i] = i - last if last >= 0 else big
    last = -1
    for i in range(n - 1, -1, -1):
        if mask[i]:
            last = i
        if last >= 0 and last - i < out[i]:
            out[i] = last - i
    return out


@njit(cache=True)
def _nb_csr_dilate(indptr, indices, src, size):
    out = np.zeros(size, dtype=np.bool_)
    for c in range(indptr.shape[0] - 1):
        if src[c]:
            for k in range(indptr[c], indptr[c + 1]):
                out[indices[k]] = True
    return out


@njit(cache=True)
def _nb_csr_diam(indptr, indices, values):
    m = indptr.shape[0] - 1
    out = np.zeros(m, dtype=np.float64)
    for c in range(m):
        lo = np.inf
        hi = -np.inf
        for k in range(indptr[c], indptr[c + 1]):
            v = values[indices[k]]
            if v < lo:
                lo = v
            if v > hi:
                hi = v
        if hi >= lo:
            out[c] = hi - lo
    return out


@njit(cache=True)
def _nb_sliding_diam(values, r):
    n = values.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        a = max(0, i - r)
        b = min(n - 1, i + r)
        lo = values[a]
        hi = values[a]
        for k in range(a + 1, b + 1):
            v = values[k]
            if v < lo:
                lo = v
            if v > hi:
                hi = v
        out[i] = hi - lo
    return out


# ---------------------------------------------------------------- numpy twins

def _np_compose_arrays(A, B, n):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    row = np.int64((1 << n) - 1)
    out = np.zeros_like(A)
    for i in range(n):
        ra = (A >> (i * n)) & row
        acc = np.zeros_like(A)
        for k in range(n):
            hit = ((ra >> k) & 1).astype(bool)
            acc |= np.where(hit, (B >> (k * n)) & row, 0)
        out |= acc << (i * n)
    return out


def _np_invert_arrays(A, n):
    A = np.asarray(A, dtype=np.int64)
    out = np.zeros_like(A)
    for i in range(n):
        for j in range(n):
            out |= ((A >> (i * n + j)) & 1) << (j * n + i)
    return out


def _np_downset(mask, diag):
    return _np_downset_cached(int(mask), int(diag))


@lru_cache(maxsize=4096)
def _np_downset_cached(mask, diag):
    free = mask & ~diag
    bits = [b for b in range(64) if (free >> b) & 1]
    idx = np.arange(1 << len(bits), dtype=np.int64)
    out = np.full(idx.shape, diag, dtype=np.int64)
    for pos, b in enumerate(bits):
        out |= ((idx >> pos) & 1) << b
    out = np.sort(out)
    out.flags.writeable = False
    return out


def _np_member(sorted_masks, values):
    k = np.searchsorted(sorted_masks, values)
    k = np.minimum(k, len(sorted_masks) - 1)
    return sorted_masks[k] == values


def _np_check_family(masks, n, diag, chunk=1 << 20):
    masks = np.asarray(masks, dtype=np.int64)
    m = len(masks)
    if m == 0:
        return EMPTY, -1, -1
    bad = (masks & diag) != diag
    if bad.any():
        return NO_DIAGONAL, int(masks[bad][0]), -1
    desc = masks[::-1]
    inv = _np_invert_arrays(desc, n)
    miss = ~_np_member(masks, inv)
    if miss.any():
        return NOT_INVERSE_CLOSED, int(desc[miss][0]), -1
    rows_per_chunk = max(1, chunk // m)
    for start in range(0, m, rows_per_chunk):
        left = desc[start:start + rows_per_chunk]
        A = np.repeat(left, m)
        B = np.tile(desc, len(left))
        comp = _np_compose_arrays(A, B, n)
        miss = ~_np_member(masks, comp)
        if miss.any():
            k = int(np.argmax(miss))
            return NOT_COMPOSITION_CLOSED, int(A[k]), int(B[k])
    for a in desc:
        sub = _np_downset(int(a), diag)
        miss = ~_np_member(masks, sub)
        if miss.any():
            return NOT_DOWN_CLOSED, int(a), int(sub[miss][-1])
    return OK, -1, -1


def _np_composition_violation(masks, n, chunk=1 << 20):
    masks = np.asarray(masks, dtype=np.int64)
    m = len(masks)
    if m <= SMALL_FAMILY:
        desc = [int(x) for x in masks[::-1]]
        have = set(desc)
        for a in desc:
            for b in desc:
                if compose(a, b, n) not in have:
                    return a, b
        return -1, -1
    desc = masks[::-1]
    rows_per_chunk = max(1, chunk // max(m, 1))
    for start in range(0, m, rows_per_chunk):
        left = desc[start:start + rows_per_chunk]
        A = np.repeat(left, m)
        B = np.tile(desc, len(left))
        miss = ~_np_member(masks, _np_compose_arrays(A, B, n))
        if miss.any():
            k = int(np.argmax(miss))
            return int(A[k]), int(B[k])
    return -1, -1


def _np_down_violation(masks, diag):
    masks = np.asarray(masks, dtype=np.int64)
    if len(masks) <= SMALL_FAMILY:
        desc = [int(x) for x in masks[::-1]]
        have = set(desc)
        for a in desc:
            if a & diag != diag:
                continue
            free = s = a & ~diag
            while True:
                if s | diag not in have:
                    return a, s | diag
                if s == 0:
                    break
                s = (s - 1) & free
        return -1, -1
    for a in masks[::-1]:
        if int(a) & diag != diag:
            continue
        sub = _np_downset(int(a), diag)
        miss = ~_np_member(masks, sub)
        if miss.any():
            return int(a), int(sub[miss][-1])
    return -1, -1


def _py_word_closure(gens, n, cap=None):
    return _py_word_closure_cached(tuple(sorted({int(g) for g in gens})), n, cap)


@lru_cache(maxsize=4096)
def _py_word_closure_cached(gens, n, cap):
    # scalar search; gives up (returns None) once more than ``cap`` words appear
    items = list(gens)
    seen = set(items)
    head = 0
    while head < len(items):
        if cap is not None and len(items) > cap:
            return None
        a = items[head]
        head += 1
        new = [invert(a, n)]
        for b in items[:head]:
            new += [compose(a, b, n), compose(b, a, n)]
        for c in new:
            if c not in seen:
                seen.add(c)
                items.append(c)
    out = np.array(sorted(items), dtype=np.int64)
    out.flags.writeable = False
    return out


def _np_word_closure(gens, n, chunk=1 << 20):
    small = _py_word_closure(gens, n, None if n <= 2 else SMALL_FAMILY)
    if small is not None:
        return small
    # breadth-first by layers: each new layer meets everything found so far
    items = np.unique(np.asarray(gens, dtype=np.int64))
    front = items
    while front.size:
        found = [_np_invert_arrays(front, n)]
        step = max(1, chunk // max(items.size, 1))
        for lo in range(0, front.size, step):
            f = front[lo:lo + step]
            a, b = np.repeat(f, items.size), np.tile(items, f.size)
            found += [_np_compose_arrays(a, b, n), _np_compose_arrays(b, a, n)]
        front = np.setdiff1d(np.concatenate(found), items)
        items = np.union1d(items, front)
    return items


def _np_distance_transform(mask):
    mask = np.asarray(mask, dtype=bool)
    n = len(mask)
    big = np.int64(1) << 60
    idx = np.arange(n, dtype=np.int64)
    prev = np.maximum.accumulate(np.where(mask, idx, -1))
    nxt = np.minimum.accumulate(np.where(mask, idx, n)[::-1])[::-1]
    d_prev = np.where(prev >= 0, idx - prev, big)
    d_next = np.where(nxt < n, nxt - idx, big)
    return np.minimum(d_prev, d_next)


def _np_csr_dilate(indptr, indices, src, size):
    counts = np.diff(indptr)
    take = np.repeat(np.asarray(src, dtype=bool), counts)
    out = np.zeros(size, dtype=bool)
    out[indices[take]] = True
    return out


def _np_csr_diam(indptr, indices, values):
    vals = np.asarray(values, dtype=np.float64)[indices]
    starts = indptr[:-1]
    out = np.zeros(len(starts), dtype=np.float64)
    nonempty = np.diff(indptr) > 0
    if nonempty.any():
        s = starts[nonempty]
        hi = np.maximum.reduceat(vals, s)
        lo = np.minimum.reduceat(vals, s)
        out[nonempty] = hi - lo
    return out


def _np_sliding_diam(values, r):
    values = np.asarray(values, dtype=np.float64)
    if r == 0 or len(values) == 0:
        return np.zeros(len(values))
    lo_pad = np.pad(values, r, mode="edge")
    win = np.lib.stride_tricks.sliding_window_view(lo_pad, 2 * r + 1)
    return win.max(axis=1) - win.min(axis=1)


# ---------------------------------------------------------------- dispatch

def compose_arrays(A, B, n):
    _check_n(n)
    A = np.ascontiguousarray(A, dtype=np.int64)
    B = np.ascontiguousarray(B, dtype=np.int64)
    if HAVE_NUMBA:
        return _nb_compose_arrays(A, B, n)
    return _np_compose_arrays(A, B, n)


def invert_arrays(A, n):
    _check_n(n)
    A = np.ascontiguousarray(A, dtype=np.int64)
    if HAVE_NUMBA:
        return _nb_invert_arrays(A, n)
    return _np_invert_arrays(A, n)


def downset(mask, n):
    """All relations between the diagonal and ``mask``, as a sorted array."""
    _check_n(n)
    d = diag_mask(n)
    mask = int(mask) | d
    if HAVE_NUMBA:
        return _nb_downset(np.int64(mask), np.int64(d))
    return _np_downset(mask, d)


def word_closure(gens, n):
    """Close a set of relations under composition and inversion (no subsets)."""
    _check_n(n, CLOSURE_MAX_POINTS)
    gens = np.asarray(sorted({int(g) for g in gens}), dtype=np.int64)
    if HAVE_NUMBA and len(gens):
        return _nb_word_closure(gens, n)
    return _np_word_closure(gens, n)


def check_family(masks, n):
    """Coarse-structure axioms on an explicit family; returns (code, a, b)."""
    _check_n(n)
    masks = np.unique(np.asarray(list(masks), dtype=np.int64))
    d = diag_mask(n)
    if HAVE_NUMBA:
        code, a, b = _nb_check_family(masks, n, np.int64(d))
    else:
        code, a, b = _np_check_family(masks, n, d)
    return int(code), int(a), int(b)


def composition_violation(masks, n, unique=False):
    """First pair (a, b) of members with a ∘ b outside the family, or (-1, -1)."""
    _check_n(n)
    if not unique:
        masks = np.unique(np.asarray(list(masks), dtype=np.int64))
    if len(masks) == 0:
        return -1, -1
    if HAVE_NUMBA:
        a, b = _nb_composition_violation(masks, n)
        return int(a), int(b)
    return _np_composition_violation(masks, n)


def down_violation(masks, n, unique=False):
    """First (member, missing sub-relation above the diagonal), or (-1, -1)."""
    _check_n(n)
    if not unique:
        masks = np.unique(np.asarray(list(masks), dtype=np.int64))
    if len(masks) == 0:
        return -1, -1
    d = diag_mask(n)
    if HAVE_NUMBA:
        a, b = _nb_down_violation(masks, np.int64(d))
        return int(a), int(b)
    return _np_down_violation(masks, d)


def equivalence_closure(mask, n):
    """Smallest equivalence relation containing ``mask`` (reflexive-symmetric-transitive)."""
    m = int(mask) | diag_mask(n)
    m |= invert(m, n)
    while True:
        nxt = compose(m, m, n)
        if nxt == m:
            return m
        m = nxt


def distance_transform(mask):
    """Distance from each index to the nearest True entry (2**60 if none)."""
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    if HAVE_NUMBA:
        return _nb_distance_transform(mask)
    return _np_distance_transform(mask)


def csr_dilate(indptr, indices, src, size=None):
    """Union of the rows of a CSR adjacency selected by ``src``."""
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    src = np.ascontiguousarray(src, dtype=np.bool_)
    size = len(src) if size is None else size
    if HAVE_NUMBA:
        return _nb_csr_dilate(indptr, indices, src, size)
    return _np_csr_dilate(indptr, indices, src, size)


def csr_diam(indptr, indices, values):
    """Per-row diameter (max - min) of ``values`` over the row's column set."""
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if HAVE_NUMBA:
        return _nb_csr_diam(indptr, indices, values)
    return _np_csr_diam(indptr, indices, values)


def sliding_diam(values, r):
    """Diameter of ``values`` over every window [i-r, i+r] (clipped at the ends)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if HAVE_NUMBA:
        return _nb_sliding_diam(values, int(r))
    return _np_sliding_diam(values, int(r))
