"""Flat-spacetime regions, causal structure, Weiss covers, bump functions.

Regions are finite unions of open axis-aligned boxes with rational endpoints;
dimension 1 (time line) supports exact causal/cover algebra, dimension 2 is
predicate/sampling based.  The metric is diag(+,-).

Bumps are closed-form compactly supported smooth functions built from the
mollifier exp(-1/(1-t^2)) under affine placement, sums, products and
quotients; they evaluate together with derivatives to any order via
Taylor-series arithmetic at the evaluation point.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

def _fr(x):
    return x if isinstance(x, Fraction) else Fraction(x)


class Region:
    """Finite union of open boxes; normal form merges overlapping/adjacent
    intervals per axis pattern (exact in dim 1)."""

    __slots__ = ("dim", "boxes")

    def __init__(self, boxes=(), dim=1):
        self.dim = dim
        norm = []
        for box in boxes:
            box = tuple((_fr(lo), _fr(hi)) for lo, hi in box)
            if len(box) != dim:
                raise ValueError("box arity != dim")
            if all(lo < hi for lo, hi in box):
                norm.append(box)
        if dim == 1:
            norm = _merge_intervals([b[0] for b in norm])
            self.boxes = tuple((iv,) for iv in norm)
        else:
            self.boxes = tuple(sorted(norm))

    @staticmethod
    def interval(lo, hi):
        return Region([((lo, hi),)], dim=1)

    @staticmethod
    def intervals(pairs):
        return Region([((lo, hi),) for lo, hi in pairs], dim=1)

    @staticmethod
    def box2(t0, t1, x0, x1):
        return Region([((t0, t1), (x0, x1))], dim=2)

    @staticmethod
    def empty(dim=1):
        return Region([], dim=dim)

    def is_empty(self):
        return not self.boxes

    def union(self, other):
        self._chk(other)
        return Region(self.boxes + other.boxes, self.dim)

    def contains_point(self, pt, closed=False):
        pt = tuple(pt) if isinstance(pt, (tuple, list, np.ndarray)) else (pt,)
        for box in self.boxes:
            ok = True
            for (lo, hi), v in zip(box, pt):
                if closed:
                    if not (lo <= v <= hi):
                        ok = False
                        break
                else:
                    if not (lo < v < hi):
                        ok = False
                        break
            if ok:
                return True
        return False

    def contains_region(self, other):
        self._chk(other)
        if self.dim == 1:
            return all(self._covers_interval_1d(b[0]) for b in other.boxes)
        return all(any(all(so <= oo and oh <= sh
                           for (so, sh), (oo, oh) in zip(sb, ob))
                       for sb in self.boxes) for ob in other.boxes)

    def _covers_interval_1d(self, iv):
        lo, hi = iv
        mine = sorted(b[0] for b in self.boxes)
        cur = lo
        for a, b in mine:
            if a <= cur < b:
                cur = b
            if cur >= hi:
                return True
        return cur >= hi

    def intersects(self, other):
        self._chk(other)
        for b1 in self.boxes:
            for b2 in other.boxes:
                if all(max(l1, l2) < min(h1, h2)
                       for (l1, h1), (l2, h2) in zip(b1, b2)):
                    return True
        return False

    def disjoint_from(self, other):
        return not self.intersects(other)

    def bounds(self):
        """Bounding box as list of (lo, hi) per axis."""
        if not self.boxes:
            return None
        out = []
        for ax in range(self.dim):
            out.append((min(b[ax][0] for b in self.boxes),
                        max(b[ax][1] for b in self.boxes)))
        return out

    def sample_points(self, count, rng):
        bounds = self.bounds()
        pts = []
        while len(pts) < count:
            p = tuple(rng.uniform(float(lo), float(hi)) for lo, hi in bounds)
            if self.contains_point(p):
                pts.append(p if self.dim > 1 else p[0])
        return pts

    def _chk(self, other):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return self.dim == other.dim and self.boxes == other.boxes

    def __hash__(self):
        return hash((self.dim, self.boxes))

    def __repr__(self):
        if not self.boxes:
            return "Region(empty)"
        if self.dim == 1:
            return "Region(%s)" % " u ".join("(%s,%s)" % b[0] for b in self.boxes)
        return "Region(%s)" % list(self.boxes)


def _merge_intervals(ivs):
    ivs = sorted(ivs)
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return [tuple(iv) for iv in out]


# ---------------------------------------------------------------------------
# Causal structure, metric diag(+,-,...)
# ---------------------------------------------------------------------------

class CausalFuture:
    """Membership predicate for J^+(R); exact in dim 1 (a closed ray)."""

    def __init__(self, region: Region):
        self.region = region
        self.dim = region.dim
        if region.is_empty():
            self.t_min = None
        elif self.dim == 1:
            self.t_min = min(b[0][0] for b in region.boxes)
        else:
            self.t_min = min(b[0][0] for b in region.boxes)

    def contains(self, pt):
        if self.region.is_empty():
            return False
        if self.dim == 1:
            t = pt if not isinstance(pt, (tuple, list)) else pt[0]
            return t >= self.t_min
        t, x = pt
        for (t0, t1), (x0, x1) in self.region.boxes:
            # J+ of an open box: points reachable by future-directed causal
            # curves from some box point
            if t <= float(t0):
                continue
            dx = 0.0
            if x < float(x0):
                dx = float(x0) - x
            elif x > float(x1):
                dx = x - float(x1)
            if dx <= t - float(t0):
                return True
        return False


def causal_future(region: Region) -> CausalFuture:
    return CausalFuture(region)


def not_later(A: Region, B: Region) -> bool:
    """True iff A does not intersect the causal future of B."""
    A._chk(B)
    if A.is_empty() or B.is_empty():
        return True
    if A.dim == 1:
        t_min = min(b[0][0] for b in B.boxes)
        return all(b[0][1] <= t_min for b in A.boxes)
    # dim 2: exact for boxes under the flat metric
    for (at0, at1), (ax0, ax1) in A.boxes:
        for (bt0, bt1), (bx0, bx1) in B.boxes:
            # separation of the open spatial intervals
            if ax1 <= bx0:
                gap = bx0 - ax1
            elif bx1 <= ax0:
                gap = ax0 - bx1
            else:
                gap = Fraction(0)
            # some point of A lies in J+(B) iff sup over A of
            # (t - bt0 - spatial distance) > 0
            if at1 - bt0 > gap:
                return False
    return True


# ---------------------------------------------------------------------------
# Weiss covers
# ---------------------------------------------------------------------------

class WeissReport:
    def __init__(self, ok, witness=None):
        self.ok = ok
        self.witness = witness  # point tuple violating the condition

    def __bool__(self):
        return self.ok


def is_weiss_cover(cover, U: Region, k: int, rng=None, samples=400):
    """Check that every <=k-point configuration in U lies inside a single
    cover element.  Exact (endpoint combinatorics) in dim 1; randomized with
    witness certificates in dim 2."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if U.dim == 1:
        return _weiss_1d(cover, U, k)
    rng = rng or random.Random(0)
    if not cover:
        return WeissReport(U.is_empty())
    pts = U.sample_points(samples, rng)
    for _ in range(samples):
        config = [pts[rng.randrange(len(pts))] for _ in range(k)]
        if not any(all(V.contains_point(p) for p in config) for V in cover):
            return WeissReport(False, tuple(config))
    return WeissReport(True)


def _weiss_1d(cover, U, k):
    # elementary intervals: arrangement of all endpoints restricted to U
    endpoints = set()
    for b in U.boxes:
        endpoints.update(b[0])
    for V in cover:
        for b in V.boxes:
            endpoints.update(b[0])
    endpoints = sorted(endpoints)
    # representative points: elementary-interval midpoints plus the
    # arrangement endpoints themselves (membership flips exactly there, so
    # midpoints alone can miss uncovered boundary configurations)
    cells = []
    for lo, hi in zip(endpoints, endpoints[1:]):
        mid = (lo + hi) / 2
        if U.contains_point(mid):
            cells.append(mid)
    for p in endpoints:
        if U.contains_point(p):
            cells.append(p)
    if not cells:
        return WeissReport(True)
    if not cover:
        return WeissReport(False, (float(cells[0]),) * k)
    member = [[V.contains_point(c) for V in cover] for c in cells]
    # first: every point must be covered (ordinary cover condition at arity 1)
    for idx, row in enumerate(member):
        if not any(row):
            return WeissReport(False, (float(cells[idx]),) * k)
    for combo in itertools.combinations_with_replacement(range(len(cells)), k):
        if not any(all(member[c][j] for c in combo) for j in range(len(cover))):
            return WeissReport(False, tuple(float(cells[c]) for c in combo))
    return WeissReport(True)


# ---------------------------------------------------------------------------
# Bumps: Taylor-series arithmetic nodes
# ---------------------------------------------------------------------------

def _series_mul(a, b):
    n = len(a)
    out = np.zeros(n, dtype=a.dtype if a.dtype == complex else float)
    for i in range(n):
        if a[i]:
            out[i:] = out[i:] + a[i] * b[:n - i]
    return out


def _series_div(a, b):
    if b[0] == 0:
        raise ZeroDivisionError("series division by zero constant term")
    n = len(a)
    out = np.zeros(n, dtype=float)
    for i in range(n):
        s = a[i] - sum(out[j] * b[i - j] for j in range(i))
        out[i] = s / b[0]
    return out


def _series_exp(a):
    n = len(a)
    out = np.zeros(n, dtype=float)
    out[0] = math.exp(a[0])
    for i in range(1, n):
        out[i] = sum(j * a[j] * out[i - j] for j in range(1, i + 1)) / i
    return out


class Bump:
    """Smooth function with tracked support, evaluable with derivatives."""

    _counter = 0

    def __init__(self, node, support: Region):
        self.node = node
        self.support = support
        Bump._counter += 1
        self.serial = Bump._counter

    # evaluation ---------------------------------------------------------
    def series(self, t, order):
        """Taylor coefficients f(t), f'(t)/1!, ..., f^(order)(t)/order!."""
        return self.node.series(float(t), order + 1)

    def __call__(self, t):
        return float(self.series(t, 0)[0])

    def deriv(self, t, k):
        s = self.series(t, k)
        return float(s[k] * math.factorial(k))

    def derivs(self, t, order):
        s = self.series(t, order)
        return np.array([s[k] * math.factorial(k) for k in range(order + 1)])

    # algebra ------------------------------------------------------------
    def __add__(self, other):
        other = _as_bump(other)
        return Bump(_Sum([self.node, other.node]),
                    self.support.union(other.support))

    def __mul__(self, other):
        other = _as_bump(other)
        supp = _support_intersection(self.support, other.support)
        return Bump(_Prod([self.node, other.node]), supp)

    def __rmul__(self, c):
        return Bump(_Prod([_Const(float(c)), self.node]), self.support)

    def d(self, k=1):
        """The k-th derivative as a Bump (same support)."""
        if k == 0:
            return self
        return Bump(_Deriv(self.node, k), self.support)

    def __repr__(self):
        return "Bump(supp=%r)" % (self.support,)


def _support_intersection(a, b):
    boxes = []
    for b1 in a.boxes:
        for b2 in b.boxes:
            box = tuple((max(l1, l2), min(h1, h2))
                        for (l1, h1), (l2, h2) in zip(b1, b2))
            if all(lo < hi for lo, hi in box):
                boxes.append(box)
    return Region(boxes, a.dim)


def _as_bump(x):
    if isinstance(x, Bump):
        return x
    raise TypeError("expected Bump")


class _Const:
    def __init__(self, c):
        self.c = float(c)

    def series(self, t, n):
        out = np.zeros(n)
        out[0] = self.c
        return out


class _Poly:
    """Polynomial sum c_k t^k."""

    def __init__(self, coeffs):
        self.coeffs = [float(c) for c in coeffs]

    def series(self, t, n):
        out = np.zeros(n)
        # shift polynomial to center t via binomials
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            for j in range(min(k, n - 1) + 1):
                out[j] += c * math.comb(k, j) * t ** (k - j)
        return out


class _Sum:
    def __init__(self, children):
        self.children = children

    def series(self, t, n):
        out = np.zeros(n)
        for ch in self.children:
            out = out + ch.series(t, n)
        return out


class _Prod:
    def __init__(self, children):
        self.children = children

    def series(self, t, n):
        out = None
        for ch in self.children:
            s = ch.series(t, n)
            out = s if out is None else _series_mul(out, s)
            if out is not None and not out.any():
                return np.zeros(n)
        return out


class _Quot:
    """Numerator/denominator; returns 0 where the numerator vanishes to all
    orders (the denominator is then allowed to vanish too)."""

    def __init__(self, num, den):
        self.num = num
        self.den = den

    def series(self, t, n):
        a = self.num.series(t, n)
        if not a.any():
            return np.zeros(n)
        b = self.den.series(t, n)
        return _series_div(a, b)


class _ExpInv:
    """exp(-1/g(t)) where g > 0, extended by 0 where g <= 0."""

    def __init__(self, arg):
        self.arg = arg

    def series(self, t, n):
        g = self.arg.series(t, max(n, 1))
        if g[0] <= 0:
            return np.zeros(n)
        one = np.zeros(len(g))
        one[0] = 1.0
        h = -_series_div(one, g)
        return _series_exp(h)[:n]


def mollifier(center=0, radius=1):
    """exp(-1/(1 - ((t-c)/r)^2)) on (c-r, c+r)."""
    c, r = float(center), float(radius)
    # 1 - ((t-c)/r)^2 as a polynomial in t
    poly = _Poly([1 - c * c / r ** 2, 2 * c / r ** 2, -1 / r ** 2])
    return Bump(_ExpInv(poly), Region.interval(Fraction(center) - Fraction(radius),
                                               Fraction(center) + Fraction(radius)))


def _expinv_linear(a, b):
    # exp(-1/(a t + b)) for a t + b > 0
    return _ExpInv(_Poly([b, a]))


def smoothstep(a, b):
    """0 for t <= a, 1 for t >= b, strictly increasing between (a < b)."""
    a, b = float(a), float(b)
    w = b - a
    num = _expinv_linear(1.0 / w, -a / w)            # exp(-1/s), s=(t-a)/w
    den2 = _expinv_linear(-1.0 / w, b / w)           # exp(-1/(1-s))
    node = _Quot(num, _Sum([num, den2]))
    # support is (a, inf); track a generous bounded stand-in plus flag
    return _Step(node, a)


class _Step(Bump):
    """Smoothstep; support is a ray so region bookkeeping is by the cutoff."""

    def __init__(self, node, a):
        self.node = node
        self.cut = a
        self.support = Region.interval(Fraction(a).limit_denominator(10**9),
                                       Fraction(a).limit_denominator(10**9) + 10**9)


def window(a, b, c, d):
    """Plateau bump: 0 outside (a,d), 1 on [b,c]; a < b <= c < d."""
    up = smoothstep(a, b)
    down = smoothstep(-d, -c)
    refl = _Reflect(down.node)
    node = _Prod([up.node, refl])
    return Bump(node, Region.interval(Fraction(a).limit_denominator(10**12),
                                      Fraction(d).limit_denominator(10**12)))


class _Deriv:
    def __init__(self, child, k):
        self.child = child
        self.k = k

    def series(self, t, n):
        s = self.child.series(t, n + self.k)
        return np.array([s[j + self.k] * math.factorial(j + self.k)
                         / math.factorial(j) for j in range(n)])


class _Reflect:
    def __init__(self, child):
        self.child = child

    def series(self, t, n):
        s = self.child.series(-t, n)
        signs = np.array([(-1.0) ** k for k in range(n)])
        return s * signs


def constant_one():
    node = _Const(1.0)
    return Bump(node, Region.interval(-10**9, 10**9))


# ---------------------------------------------------------------------------
# Partitions of unity (dim 1)
# ---------------------------------------------------------------------------

class CoverError(ValueError):
    pass


def partition_of_unity(cover, compact: Region):
    """Bumps psi_i with supp psi_i inside cover[i] and sum = 1 on `compact`.

    cover elements and `compact` are dim-1 regions; the cover must cover the
    closure of `compact`.
    """
    if compact.dim != 1:
        raise NotImplementedError("partitions of unity implemented for dim 1")
    if compact.is_empty():
        return [Bump(_Const(0.0), Region.empty()) for _ in cover]
    closure = [(b[0][0], b[0][1]) for b in compact.boxes]
    delta = None
    for k in range(1, 40):
        d = Fraction(1, 2 ** k)
        if _shrunk_covers(cover, closure, d):
            delta = d
            break
    if delta is None:
        raise CoverError("cover does not cover the closure of the compact region")
    windows = []
    for V in cover:
        node_children = []
        supp = Region.empty()
        for box in V.boxes:
            lo, hi = box[0]
            if hi - lo <= delta:
                continue
            a, b = lo + delta / 2, hi - delta / 2
            inner_lo, inner_hi = lo + delta, hi - delta
            if inner_lo >= inner_hi:
                inner_lo = inner_hi = (a + b) / 2
            w = window(float(a), float(inner_lo), float(inner_hi), float(b))
            node_children.append(w.node)
            supp = supp.union(Region.interval(a, b))
        node = _Sum(node_children) if node_children else _Const(0.0)
        windows.append(Bump(node, supp))
    total = _Sum([w.node for w in windows])
    out = []
    for w in windows:
        out.append(Bump(_Quot(w.node, total), w.support))
    return out


def _shrunk_covers(cover, closed_intervals, delta):
    # closed shrunk intervals [lo+delta, hi-delta] must cover the closed set
    shrunk = []
    for V in cover:
        for box in V.boxes:
            lo, hi = box[0]
            if hi - lo > 2 * delta:
                shrunk.append((lo + delta, hi - delta))
    shrunk = _merge_intervals(shrunk)
    for lo, hi in closed_intervals:
        cur = lo
        progressed = True
        while progressed:
            progressed = False
            for a, b in shrunk:
                if a <= cur <= b and b > cur:
                    cur = b
                    progressed = True
                elif a <= cur <= b and b == cur:
                    pass
            if cur >= hi:
                break
        if cur < hi:
            return False
        # endpoints must be interior to the shrunk union
        if not any(a <= lo <= b for a, b in shrunk):
            return False
        if not any(a <= hi <= b for a, b in shrunk):
            return False
    return True
