"""Asymptotic predicates, slowly oscillating functions and separator synthesis.

Exact answers come from the exact tier (metric N on eventually periodic sets)
and from block case analysis on ↓B. Sparse sets in metric N use a gap-growth
certificate. Everything else is a horizon sweep that may refute (an escaping
family of witnesses) but never certifies a universal statement.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

import numpy as np

from . import kernels
from .bornology import DomainError
from .constructions import largest_membership
from .core import (
    BIG,
    DEFAULT_RADII,
    CoarsePresentation,
    Entourage,
    MetricRadius,
    Window,
    window,
    apply,
    bounded_sets,
    escape_profile,
    escape_profile_values,
    is_bounded,
)
from .groundsets import (
    DEFAULT_HORIZON,
    NAT,
    WEDGE_POINT,
    Complement,
    EncodingError,
    EventuallyPeriodic,
    Finite,
    Intersection,
    Naturals,
    Predicate,
    SetExpr,
    SparseGenerator,
    Tagged,
    Union,
    Verdict,
    combine,
    exact_form,
    finiteness,
    full,
    is_empty,
    is_subset,
    normalize,
    part_basepoint,
)

EPS_GRID = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))


class PreconditionError(ValueError):
    """Inputs do not meet an operation's precondition."""


def _kind(X: CoarsePresentation) -> str:
    if X.origin == "metric-nat" and X.carrier is None:
        return "metric"
    if X.origin == "down":
        return "down"
    if X.origin == "bouquet":
        return "bouquet"
    if X.origin == "comb":
        return "comb"
    return "generic"


# ====================================================================== nearest distances in N

class Nearest:
    """Exact distance from points of N to a fixed subset, with an extending cache."""

    def __init__(self, S: SetExpr):
        self.S = S
        self.vals: list = []
        self.done = False
        ex = exact_form(S)
        self.exact = normalize(ex) if ex is not None else None

    def _extend(self, x):
        """Make sure the cache holds every element <= x and the first element > x."""
        if self.done or (self.vals and self.vals[-1] > x):
            return
        if isinstance(self.exact, Finite):
            self.vals = list(self.exact.elements)
            self.done = True
            return
        h = max(2 * x + 16, 64)
        while True:
            self.vals = self.S.enumerate(h)
            if self.vals and self.vals[-1] > x:
                return
            if isinstance(self.S, SparseGenerator):
                self.vals.append(self.S.nth(len(self.vals)))
                return
            if self.exact is None and h > (1 << 22):
                self.done = True  # saturation: nothing found beyond x
                return
            h *= 4

    def dist(self, x: int) -> Optional[int]:
        self._extend(x)
        v = self.vals
        if not v:
            return None
        k = bisect.bisect_left(v, x)
        best = None
        if k < len(v):
            best = v[k] - x
        if k > 0:
            d = x - v[k - 1]
            best = d if best is None else min(best, d)
        return best

    def dists(self, xs: np.ndarray) -> np.ndarray:
        if len(xs) == 0:
            return np.zeros(0, dtype=np.int64)
        self._extend(int(xs.max()))
        v = np.asarray(self.vals, dtype=np.int64)
        if len(v) == 0:
            return np.full(len(xs), BIG, dtype=np.int64)
        k = np.searchsorted(v, xs)
        right = np.where(k < len(v), v[np.minimum(k, len(v) - 1)] - xs, BIG)
        left = np.where(k > 0, xs - v[np.maximum(k - 1, 0)], BIG)
        return np.minimum(left, right)


# ====================================================================== gap certificate

@dataclass(frozen=True)
class GapCertificate:
    """Cross gaps between two sparse subsets of N, grown past every radius."""

    positions: tuple
    gaps: tuple
    bounds: dict

    @property
    def ok(self):
        return bool(self.bounds)


def gap_certificate(Y: SetExpr, Z: SetExpr, horizon: int, radii=DEFAULT_RADII) -> Optional[GapCertificate]:
    """Certify that the distance between Y and Z beyond a point grows monotonically.

    Consecutive elements of Y ∪ Z with different labels give the local cross
    distances. The certificate requires them to be strictly increasing over the
    later half of the crossings found in the window and to exceed 2·max(radii) + 1 at the
    horizon. The bound for radius r is then the last crossing with gap <= 2r + 1.
    """
    ys, zs = Y.enumerate(horizon), Z.enumerate(horizon)
    if len(ys) < 3 or len(zs) < 3:
        return None
    merged = sorted([(y, 0) for y in ys] + [(z, 1) for z in zs])
    pos, gaps = [], []
    for (a, la), (b, lb) in zip(merged, merged[1:]):
        if a == b:
            pos.append(a)
            gaps.append(0)
        elif la != lb:
            pos.append(b)
            gaps.append(b - a)
    tail = gaps[len(gaps) // 2:]
    if len(gaps) < 4 or len(tail) < 2 or any(b <= a for a, b in zip(tail, tail[1:])):
        return None
    if tail[-1] <= 2 * max(radii) + 1:
        return None
    bounds = {}
    for r in radii:
        close = [p for p, g in zip(pos, gaps) if g <= 2 * r + 1]
        bounds[r] = (max(close) + r) if close else -1
    return GapCertificate(tuple(pos), tuple(gaps), bounds)


# ====================================================================== spine helpers

def spine_part(Y: SetExpr, alpha, ground) -> SetExpr:
    """{s : (alpha, s) ∈ Y} in the spine ground, with the basepoint iff the glued point is in Y."""
    part = ground.part if hasattr(ground, "index") else ground.part(alpha)
    base = part_basepoint(ground, alpha)
    if isinstance(Y, Tagged):
        if Y.tag == alpha:
            return Y.inner
        inner = Finite((base,), part) if base is not None and Y.contains(WEDGE_POINT) else Finite((), part)
        return inner
    if isinstance(Y, Union):
        parts = [spine_part(p, alpha, ground) for p in Y.parts]
        parts = [p for p in parts if not (isinstance(p, Finite) and not p.elements)] or [Finite((), part)]
        out = parts[0]
        for p in parts[1:]:
            out = combine(out, p, "union")
        return out
    if isinstance(Y, Finite):
        pts = [x[1] for x in Y.elements if x != WEDGE_POINT and x[0] == alpha]
        if WEDGE_POINT in Y.elements and base is not None:
            pts.append(base)
        return Finite(tuple(pts), part)

    def member(s):
        if base is not None and s == base:
            return Y.contains(WEDGE_POINT)
        return Y.contains((alpha, s))

    return Predicate(part, member, f"{Y}@{alpha}")


def _spines(X, *sets):
    """All spines of a finite index, or the spines the given sets live on."""
    A = X.meta["index"]
    k = A.count()
    if k is not None:
        return [A.nth(i) for i in range(k)]
    tags = set()
    for S in sets:
        t = spine_support(S)
        if t is None:
            return None
        tags |= t
    return sorted(tags)


def spine_support(S: SetExpr) -> Optional[set]:
    """Spines carrying points of S (glued point aside), when S names them explicitly."""
    if isinstance(S, Tagged):
        return {S.tag}
    if isinstance(S, Union):
        out = set()
        for p in S.parts:
            t = spine_support(p)
            if t is None:
                return None
            out |= t
        return out
    if isinstance(S, Finite):
        return {x[0] for x in S.elements if x != WEDGE_POINT}
    return None


def handle_part(Y: SetExpr) -> Optional[SetExpr]:
    """Inner handle set when Y lies on the handle of a comb."""
    if isinstance(Y, Tagged) and Y.tag == "handle":
        return Y.inner
    if isinstance(Y, Finite) and all(x[0] == "handle" for x in Y.elements):
        return Finite(tuple(x[1] for x in Y.elements), Y.ground.part("handle"))
    return None


# ====================================================================== asymptotic disjointness

def asymptotically_disjoint(X: CoarsePresentation, Y: SetExpr, Z: SetExpr, horizon: int = DEFAULT_HORIZON,
                            radii=DEFAULT_RADII) -> Verdict:
    """Is E[Y] ∩ E[Z] bounded for every entourage E?"""
    for S in (Y, Z):
        if S.ground != X.ground:
            from .groundsets import GroundMismatch

            raise GroundMismatch(f"{S.ground} vs {X.ground}")
    for S in (Z, Y):
        if is_bounded(X, S, horizon).is_true:
            return Verdict.true(note="one of the sets is bounded, so every thickened intersection is")
    kind = _kind(X)
    if kind == "metric":
        return _disjoint_metric(Y, Z, horizon, radii)
    if kind == "down":
        B = X.bornology
        both = combine(Y, Z, "intersection")
        v = B.member(both, horizon)
        if v.is_true:
            return Verdict.true(note="E_n[Y] ∩ E_n[Z] ⊆ (Y ∩ Z) ∪ B_n and Y ∩ Z is bounded")
        if v.is_false:
            return Verdict.false({"index": 0, "points": both.enumerate(min(horizon, 64))[:8]},
                                 note="Y ∩ Z is unbounded")
        return Verdict.unknown(horizon)
    if kind == "bouquet" and _spines(X, Y, Z) is not None:
        # off the named spines both thickenings stay within E_n[e], which is bounded
        verdicts = []
        for a in _spines(X, Y, Z):
            comp = X.meta["comp_of"](a)
            v = asymptotically_disjoint(comp, spine_part(Y, a, X.ground), spine_part(Z, a, X.ground), horizon, radii)
            if v.is_false:
                return Verdict.false({"spine": a, "inner": v.witness}, note="disjointness fails on a spine")
            verdicts.append(v)
        if all(v.is_true for v in verdicts):
            return Verdict.true(note="finitely many spines carry the sets, disjoint on each")
        return Verdict.unknown(horizon)
    if kind == "comb":
        hy, hz = handle_part(Y), handle_part(Z)
        if hy is not None and hz is not None:
            v = asymptotically_disjoint(X.meta["handle"], hy, hz, horizon, radii)
            note = "handle sets: teeth near both lie over a bounded part of the handle"
            return Verdict(v.value, v.witness, v.horizon, note if v.is_true else v.note)
    return _disjoint_window(X, Y, Z, horizon, radii)


def _disjoint_metric(Y, Z, horizon, radii):
    ey, ez = exact_form(Y), exact_form(Z)
    if ey is not None and ez is not None:
        ey, ez = normalize(ey), normalize(ez)
        # both infinite: one period of dilation already covers a tail of N
        r = max(ey.period, ez.period)
        both = combine(apply(MetricRadius(r), ey), apply(MetricRadius(r), ez), "intersection")
        fin = finiteness(both)
        if fin.is_false:
            return Verdict.false({"index": r, "tail": fin.witness}, note=f"E_{r}[Y] ∩ E_{r}[Z] is infinite")
        return Verdict.true(note="exact tier")
    cert = gap_certificate(Y, Z, horizon, radii)
    if cert is not None:
        return Verdict.true({"bounds": cert.bounds}, note="cross gaps grow past every radius")
    return _disjoint_window(None, Y, Z, horizon, radii, metric=True)


def sweep(X: CoarsePresentation, horizon: int, radii, mask_fn):
    """Escape status of ``mask_fn(window, r)`` for each radius.

    Returns ("escaping", r, profile) for the first radius whose mask escapes
    both the window and a window twice as large (with a larger reach there),
    otherwise ("stable", {r: bound}, None) or ("unclear", r, profile). A set
    that merely fills a small window is not reported as escaping.
    """
    win, wide = window(X, horizon), None
    if win.horizon < horizon:
        # capped sample: confirm inside it, using its own half as the base window
        win, wide = window(X, win.horizon // 2), win
    bounds, unclear = {}, None
    for r in radii:
        prof = escape_profile(win, mask_fn(win, r))
        if prof.status == "escaping":
            wide = wide or window(X, 2 * horizon)
            p2 = escape_profile(wide, mask_fn(wide, r))
            if p2.status == "escaping" and p2.bound > prof.bound:
                return "escaping", r, p2
            unclear = unclear or (r, prof)
        elif prof.status == "unclear":
            unclear = unclear or (r, prof)
        else:
            bounds[r] = prof.bound
    if unclear is not None:
        return ("unclear",) + unclear
    return "stable", bounds, None


def _disjoint_window(X, Y, Z, horizon, radii, metric=False):
    if metric:
        from .core import metric_nat

        X = metric_nat()

    def mask(win, r):
        return win.dilate(r, win.mask_of(Y)) & win.dilate(r, win.mask_of(Z))

    status, r, prof = sweep(X, horizon, radii, mask)
    if status == "escaping":
        return Verdict.false({"index": r, "points": list(prof.witnesses)}, note="intersection escapes the window")
    return Verdict.unknown(horizon)


# ====================================================================== asymptotic neighbourhoods

@dataclass(frozen=True, eq=False)
class VoronoiRegion(Predicate):
    """{x : d(x, own) <= d(x, other)} (``strict``: <) in a presentation's distance."""

    own: SetExpr = None
    other: SetExpr = None
    strict: bool = False


def voronoi(X: CoarsePresentation, own: SetExpr, other: SetExpr, strict=False) -> VoronoiRegion:
    if _kind(X) == "metric":
        ny, nz = Nearest(own), Nearest(other)

        def member(x):
            a, b = ny.dist(x), nz.dist(x)
            a = BIG if a is None else a
            b = BIG if b is None else b
            return a < b if strict else a <= b

        def lister(h):
            xs = np.arange(h + 1)
            a, b = ny.dists(xs), nz.dists(xs)
            return [int(x) for x in np.flatnonzero(a < b if strict else a <= b)]
    else:
        def member(x):
            return _set_distance(X, x, own) < _set_distance(X, x, other) if strict else \
                _set_distance(X, x, own) <= _set_distance(X, x, other)

        lister = None
    name = f"{{d(·,{own}) {'<' if strict else '<='} d(·,{other})}}"
    return VoronoiRegion(X.ground, member, name, lister, None, own, other, strict)


def _set_distance(X, x, S, horizon=512):
    best = BIG
    for y in S.enumerate(horizon):
        d = X.distance(x, y, limit=1 << 62)
        if d is not None and d < best:
            best = d
    return best


@dataclass(frozen=True, eq=False)
class LevelRegion(Predicate):
    """{x : f(x) <= 1/2} (or > 1/2) for a verified separator f."""

    separator: Any = None
    low: bool = True


def is_asymptotic_neighborhood(X: CoarsePresentation, Y: SetExpr, U: SetExpr, horizon: int = DEFAULT_HORIZON,
                               radii=DEFAULT_RADII) -> Verdict:
    """Is E[Y] \\ U bounded for every entourage E?"""
    if is_subset(X.full_set, U, horizon).is_true:
        return Verdict.true(note="U is everything")
    if is_bounded(X, Y, horizon).is_true:
        return Verdict.true(note="Y is bounded, so is every E[Y]")
    if isinstance(U, VoronoiRegion) and U.own == Y:
        v = asymptotically_disjoint(X, U.own, U.other, horizon, radii)
        if v.is_true:
            return Verdict.true(note="E_r[Y] \\ U lies in E_r[Y] ∩ E_r[Z] for the Voronoi split")
    if isinstance(U, LevelRegion):
        f = U.separator
        if f.verified and ((U.low and f.zero_set is Y) or (not U.low and f.one_set is Y)):
            return Verdict.true(note="Y sits at one end of a slowly oscillating separator")
    kind = _kind(X)
    if kind == "metric":
        ey, eu = exact_form(Y), exact_form(U)
        if ey is not None and eu is not None:
            ey = normalize(ey)
            r = ey.period
            rest = combine(apply(MetricRadius(r), ey), eu, "difference")
            fin = finiteness(rest)
            if fin.is_false:
                return Verdict.false({"index": r, "tail": fin.witness}, note="E[Y] \\ U is infinite")
            return Verdict.true(note="exact tier: U is cofinite")
    if kind == "down":
        v = X.bornology.member(combine(Y, U, "difference"), horizon)
        if v.is_true:
            return Verdict.true(note="E_n[Y] \\ U ⊆ (Y \\ U) ∪ B_n")
        if v.is_false:
            return Verdict.false({"index": 0}, note="Y \\ U is unbounded")
        return Verdict.unknown(horizon)
    def mask(win, r):
        return win.dilate(r, win.mask_of(Y)) & ~win.mask_of(U)

    status, r, prof = sweep(X, horizon, radii, mask)
    if status == "escaping":
        return Verdict.false({"index": r, "points": list(prof.witnesses)}, note="E[Y] \\ U escapes the window")
    return Verdict.unknown(horizon)


def asymptotically_separated(X: CoarsePresentation, Y: SetExpr, Z: SetExpr, horizon: int = DEFAULT_HORIZON,
                             radii=DEFAULT_RADII) -> Verdict:
    """Disjoint asymptotic neighbourhoods, searched in a fixed witness family."""
    d = asymptotically_disjoint(X, Y, Z, horizon, radii)
    if d.is_false:
        return Verdict.false(d.witness, note="not asymptotically disjoint")
    if d.is_unknown:
        return Verdict.unknown(horizon, note="disjointness undecided")
    kind = _kind(X)
    if kind == "metric":
        # Z gets the strict side so that U and V are disjoint
        U, V = voronoi(X, Y, Z), voronoi(X, Z, Y, strict=True)
    elif kind == "down":
        U, V = Y, combine(Z, Y, "difference")
    else:
        try:
            f = synthesize_separator(X, Y, Z, horizon)
        except PreconditionError as exc:
            return Verdict.unknown(horizon, note=str(exc))
        U = LevelRegion(X.ground, lambda x: f(x) <= Fraction(1, 2), "{f <= 1/2}", None, None, f, True)
        V = LevelRegion(X.ground, lambda x: f(x) > Fraction(1, 2), "{f > 1/2}", None, None, f, False)
    vu = is_asymptotic_neighborhood(X, Y, U, horizon, radii)
    vv = is_asymptotic_neighborhood(X, Z, V, horizon, radii)
    if vu.is_true and vv.is_true:
        return Verdict.true({"U": str(U), "V": str(V)})
    if vu.is_false or vv.is_false:
        return Verdict.unknown(horizon, note="witness family failed; other neighbourhoods may exist")
    return Verdict.unknown(horizon)


# ====================================================================== slowly oscillating functions

@dataclass(eq=False)
class SlowFunction:
    """A map ground -> [0, 1] with provenance; ``batch`` may evaluate many points at once."""

    fn: Callable[[Any], Fraction]
    provenance: str = "user"
    name: str = "f"
    batch: Optional[Callable[[list], np.ndarray]] = None
    zero_set: Optional[SetExpr] = None
    one_set: Optional[SetExpr] = None
    verified: bool = False
    meta: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.fn(x)

    def values(self, pts) -> np.ndarray:
        if self.batch is not None:
            return np.asarray(self.batch(pts), dtype=np.float64)
        return np.array([float(self.fn(x)) for x in pts], dtype=np.float64)

    def table(self, X: CoarsePresentation, horizon: int) -> list:
        return [(x, self.fn(x)) for x in X.window_elements(horizon)]


def constant(c) -> SlowFunction:
    c = Fraction(c)
    return SlowFunction(lambda x: c, "user", f"const {c}", lambda pts: np.full(len(pts), float(c)))


def parity() -> SlowFunction:
    return SlowFunction(lambda n: Fraction(n % 2), "user", "n mod 2", lambda pts: np.asarray(pts) % 2)


def log_wave() -> SlowFunction:
    """log2(1+n) folded into [0, 1] by a sliding triangular cap (period 2 in log scale)."""

    def f(n):
        u = math.log2(1 + n) / 2
        return Fraction(abs(2 * (u - math.floor(u)) - 1)).limit_denominator(1 << 20)

    def batch(pts):
        u = np.log2(1 + np.asarray(pts, dtype=np.float64)) / 2
        return np.abs(2 * (u - np.floor(u)) - 1)

    return SlowFunction(f, "user", "log-wave", batch)


def is_slowly_oscillating(X: CoarsePresentation, f: SlowFunction, eps, horizon: int = DEFAULT_HORIZON,
                          radii=DEFAULT_RADII) -> Verdict:
    """For each probe radius: is diam f(E_r[x]) < eps outside a bounded set (window sweep)?"""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    tol = float(eps) - 1e-12
    reduced = _reduce_oscillation(X, f, eps, horizon, radii)
    if reduced is not None:
        return reduced
    cache = {}

    if _kind(X) == "metric":
        R = max(radii)

        def mask(win, r):
            H = win.horizon
            if H not in cache:
                cache[H] = f.values(np.arange(H + R + 1))
            return kernels.sliding_diam(cache[H], r)[: H + 1] >= tol
    else:
        def mask(win, r):
            H = win.horizon
            if H not in cache:
                cache[H] = f.values(win.elems)
            indptr, indices = win.csr(r)
            return kernels.csr_diam(indptr, indices, cache[H]) >= tol

    status, r, prof = sweep(X, horizon, radii, mask)
    if status == "escaping":
        return Verdict.false({"index": r, "centers": list(prof.witnesses)}, note="violating centers escape")
    if status == "stable":
        return Verdict.true({"exceptional_bound": r})
    return Verdict.unknown(horizon)


def _reduce_oscillation(X, f, eps, horizon, radii) -> Optional[Verdict]:
    """Piecewise functions whose pieces live on simpler spaces.

    A comb-handle function is constant along teeth, so every ball's image lies
    in the image of a handle ball. A glued function on a bouquet with an
    infinite index is constant off finitely many spines, and balls far from
    the glued point stay inside one spine. Either way the question moves to
    the pieces, which the window on the whole space samples too thinly.
    """
    kind = _kind(X)
    if kind == "comb" and "handle_separator" in f.meta:
        v = is_slowly_oscillating(X.meta["handle"], f.meta["handle_separator"], eps, horizon, radii)
        return Verdict(v.value, v.witness, v.horizon, "handle: " + (v.note or ""))
    if kind == "bouquet" and "pieces" in f.meta and X.meta["index"].count() is None:
        bounds, unknown = {}, None
        for a, piece in f.meta["pieces"].items():
            v = is_slowly_oscillating(X.meta["comp_of"](a), piece, eps, horizon, radii)
            if v.is_false:
                return Verdict.false({"spine": a, **v.witness}, note=f"spine {a}: {v.note}")
            if v.is_unknown:
                unknown = v
            else:
                bounds[a] = v.witness
        if unknown is not None:
            return Verdict.unknown(horizon, note="a spine is undecided")
        return Verdict.true({"exceptional_bound": bounds}, note="spine by spine; constant elsewhere")
    return None


# ====================================================================== separators

def _ratio(dy, dz):
    if dy is None and dz is None:
        return Fraction(1, 2)
    if dy is None:
        return Fraction(1)
    if dz is None:
        return Fraction(0)
    if dy == 0:
        return Fraction(0)
    return Fraction(dy, dy + dz)


def metric_separator(Y: SetExpr, Z: SetExpr) -> SlowFunction:
    """d(x,Y) / (d(x,Y) + d(x,Z)) on N with exact nearest distances."""
    ny, nz = Nearest(Y), Nearest(Z)

    def fn(x):
        return _ratio(ny.dist(x), nz.dist(x))

    def batch(pts):
        if any(x >= BIG for x in pts):
            # beyond int64: exact scalar route
            return np.asarray([float(fn(x)) for x in pts], dtype=np.float64)
        xs = np.asarray(pts, dtype=np.int64)
        a = ny.dists(xs).astype(np.float64)
        b = nz.dists(xs).astype(np.float64)
        out = np.where(a == 0, 0.0, a / np.maximum(a + b, 1))
        out = np.where(a >= BIG, 1.0, out)
        out = np.where(b >= BIG, 0.0, out)
        out = np.where((a >= BIG) & (b >= BIG), 0.5, out)
        return out

    return SlowFunction(fn, "metric-quotient", f"ratio({Y},{Z})", batch, Y, Z)


def indicator_separator(Z: SetExpr, Y: SetExpr) -> SlowFunction:
    def fn(x):
        return Fraction(1 if Z.contains(x) else 0)

    return SlowFunction(fn, "discrete-indicator", f"1[{Z}]", None, Y, Z)


def glued_separator(X: CoarsePresentation, Y: SetExpr, Z: SetExpr, horizon: int) -> SlowFunction:
    """Per-spine separators agreeing at the glued point (value 1/2, or 0/1 when e ∈ Y/Z)."""
    if Y.contains(WEDGE_POINT):
        c = Fraction(0)
    elif Z.contains(WEDGE_POINT):
        c = Fraction(1)
    else:
        c = Fraction(1, 2)
    pieces = {}
    # spines carrying neither set keep the constant basepoint value
    for a in _spines(X, Y, Z):
        comp = X.meta["comp_of"](a)
        ya, za = spine_part(Y, a, X.ground), spine_part(Z, a, X.ground)
        if c == Fraction(1, 2):
            # the basepoint value is changed anyway; keep it out of both sides
            base = Finite((comp.basepoint,), comp.ground)
            if ya.contains(comp.basepoint):
                ya = combine(ya, base, "difference")
            if za.contains(comp.basepoint):
                za = combine(za, base, "difference")
        pieces[a] = synthesize_separator(comp, ya, za, horizon, verify=False)

    def fn(x):
        if x == WEDGE_POINT or x[0] not in pieces:
            return c
        return pieces[x[0]](x[1])

    def batch(pts):
        out = np.full(len(pts), float(c), dtype=np.float64)
        for a, piece in pieces.items():
            idx = [i for i, x in enumerate(pts) if x != WEDGE_POINT and x[0] == a]
            if idx:
                out[idx] = piece.values([pts[i][1] for i in idx])
        return out

    f = SlowFunction(fn, "glued", f"glue({', '.join(p.name for p in pieces.values())}; e={c})", batch, Y, Z)
    f.meta["pieces"] = pieces
    f.meta["basepoint_value"] = c
    return f


def comb_handle_separator(X: CoarsePresentation, Y: SetExpr, Z: SetExpr, horizon: int) -> SlowFunction:
    """Handle separator extended constantly along each tooth."""
    fh = synthesize_separator(X.meta["handle"], handle_part(Y), handle_part(Z), horizon, verify=False)
    split = X.meta["split"]

    def fn(p):
        return fh(split(p)[0])

    def batch(pts):
        return fh.values([split(p)[0] for p in pts])

    f = SlowFunction(fn, "comb-handle", f"handle({fh.name})", batch, Y, Z)
    f.meta["handle_separator"] = fh
    return f


def chain_separator(X: CoarsePresentation, Y: SetExpr, Z: SetExpr, horizon: int) -> SlowFunction:
    """Ratio of level distances to Y and Z, searched inside the window (saturates at the horizon)."""
    ys, zs = Y.enumerate(horizon), Z.enumerate(horizon)

    def near(x, pts):
        best = None
        for y in pts:
            d = X.distance(x, y, limit=1 << 62)
            if d is not None and (best is None or d < best):
                best = d
        return best

    def fn(x):
        return _ratio(near(x, ys), near(x, zs))

    return SlowFunction(fn, "chain-quotient", f"chain-ratio({Y},{Z})", None, Y, Z)


def synthesize_separator(X: CoarsePresentation, Y: SetExpr, Z: SetExpr, horizon: int = DEFAULT_HORIZON,
                         verify: bool = True) -> SlowFunction:
    """A slowly oscillating f: X -> [0,1] with f(Y) ⊆ {0}, f(Z) ⊆ {1}."""
    clash = is_empty(combine(Y, Z, "intersection"), horizon)
    if clash.is_false:
        raise PreconditionError(f"Y and Z meet at {clash.witness!r}")
    d = asymptotically_disjoint(X, Y, Z, horizon)
    if d.is_false:
        raise PreconditionError(f"Y and Z are not asymptotically disjoint: {d}")
    if d.is_unknown:
        raise PreconditionError(f"asymptotic disjointness undecided at horizon {horizon}; refusing to synthesize")
    kind = _kind(X)
    if kind == "metric":
        f = metric_separator(Y, Z)
    elif kind == "down":
        f = indicator_separator(Z, Y)
    elif kind == "bouquet" and _spines(X, Y, Z) is not None:
        f = glued_separator(X, Y, Z, horizon)
    elif kind == "comb" and handle_part(Y) is not None and handle_part(Z) is not None:
        f = comb_handle_separator(X, Y, Z, horizon)
    elif X.distance_fn is not None and X.cofinal:
        f = chain_separator(X, Y, Z, min(horizon, 512))
    else:
        raise PreconditionError("no separator strategy for this presentation")
    if verify:
        verify_separator(X, f, Y, Z, horizon)
    return f


def verify_separator(X, f: SlowFunction, Y, Z, horizon: int = DEFAULT_HORIZON, grid=EPS_GRID) -> dict:
    """Pointwise ends at the horizon plus slow oscillation on the eps grid."""
    h = horizon
    bad_y = [y for y in Y.enumerate(h) if f(y) != 0][:3]
    bad_z = [z for z in Z.enumerate(h) if f(z) != 1][:3]
    checks = {"Y->0": not bad_y, "Z->1": not bad_z}
    for eps in grid:
        checks[f"slow@{eps}"] = is_slowly_oscillating(X, f, eps, horizon)
    f.meta["verification"] = checks
    f.verified = checks["Y->0"] and checks["Z->1"] and all(v.is_true for k, v in checks.items() if k.startswith("slow"))
    return checks


# ====================================================================== discreteness and friends

def _require_unbounded(X, horizon):
    v = is_bounded(X, X.full_set, horizon)
    if v.is_true:
        raise DomainError("the definition applies to unbounded balleans")


def is_discrete(X: CoarsePresentation, horizon: int = DEFAULT_HORIZON, radii=DEFAULT_RADII) -> Verdict:
    """Does every entourage have singleton balls outside a bounded set?"""
    _require_unbounded(X, horizon)
    if X.origin == "down":
        return Verdict.true(note="block balls outside B_n are singletons")
    def mask(win, r):
        return np.diff(win.csr(r)[0]) > 1

    status, r, prof = sweep(X, horizon, [r for r in radii if r > 0], mask)
    if status == "escaping":
        return Verdict.false({"index": r, "centers": list(prof.witnesses)}, note="non-singleton balls are cofinal")
    return Verdict.unknown(horizon)


def is_antidiscrete(X: CoarsePresentation, witnesses=(), horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Refute X = ↑B_X with a witness of ↑B_X not dominated by any probe."""
    if X.origin == "up":
        return Verdict.true(note="largest structure compatible with its bornology, by construction")
    B = bounded_sets(X)
    h = min(horizon, 1024)
    for W in witnesses:
        if not largest_membership(B, W, h).is_true:
            continue
        if not X.cofinal:
            continue
        win = window(X, h)
        need = np.zeros(len(win), dtype=np.int64)
        for c, x in enumerate(win.elems):
            lst = W.ball_list(x)
            if lst is None:
                break
            worst = 0
            for y in lst:
                d = X.distance(x, y, limit=1 << 62)
                worst = BIG if d is None else max(worst, d)
            need[c] = worst
        prof = escape_profile_values(win, need)
        if prof.status == "escaping":
            c = int(np.argmax(need))
            return Verdict.false({"witness": repr(W), "x": win.elems[c], "needed_index": int(need[c])},
                                 note="witness lies in ↑B_X but no probe dominates it")
    return Verdict.unknown(horizon)


def ultranormal_search(X: CoarsePresentation, catalog, horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Look for two unbounded, asymptotically disjoint catalog sets."""
    items = [(str(s), s) if isinstance(s, SetExpr) else s for s in catalog]
    unbounded = [(n, s) for n, s in items if is_bounded(X, s, horizon).is_false]
    scanned = 0
    for i, (na, a) in enumerate(unbounded):
        for nb, b in unbounded[i + 1:]:
            scanned += 1
            if asymptotically_disjoint(X, a, b, horizon).is_true:
                return Verdict.false((na, nb), note="two unbounded asymptotically disjoint sets")
    return Verdict.unknown(horizon, note=f"{scanned} qualifying pairs scanned")
