"""Free quantum theory of the 1-d harmonic oscillator, P = -(d^2/dt^2 + w^2):
closed-form propagator kernels, the Peierls bracket, the star product, the
time-ordering map and the deformed (time-ordered) product, causal
factorization, and the free quantum BV differential s0.

Kernel conventions (see the convention notes in the README):
  Delta^R(tau) = -theta(tau) sin(w tau)/w      so that P Delta^R = delta
  Delta       = Delta^R - Delta^A = -sin(w tau)/w
  H           = cos(w tau)/(2w)                (vacuum Hadamard choice)
  W           = (i/2) Delta + H = e^{-i w tau}/(2w)
  G^F         = e^{-i w |tau|}/(2w)            (= W for tau > 0; P G^F = i delta)

hbar placement: each W-contraction in the star product carries one power of
hbar, and the time-ordering map is exp((hbar/2) d_{G^F}); with these choices
the star commutator equals i hbar times the Peierls bracket and causal
factorization reduces to G^F = W on {t > s}.
"""

import cmath
import math
from fractions import Fraction
from itertools import permutations, product as iproduct

from .symexpr import Expr, QI, I, FormalSeries
from .region import Bump, Region, not_later


# ---------------------------------------------------------------------------
# Propagator kernels
# ---------------------------------------------------------------------------

KERNEL_KINDS = ("retarded", "advanced", "pauli-jordan", "wightman",
                "symmetric", "feynman")


class OscillatorModel:
    """1-d model with operator P = -(d^2/dt^2 + omega^2); omega >= 0."""

    def __init__(self, omega=1, orders=(3, 2)):
        if omega < 0:
            raise ValueError("omega must be nonnegative")
        self.omega = float(omega)
        self.orders = tuple(orders)

    def p_apply(self, field, t):
        """(P u)(t) for a sampled field."""
        return -(field.jet(t, (2,)) + self.omega ** 2 * field.jet(t, (0,)))

    def __repr__(self):
        return "OscillatorModel(omega=%g)" % self.omega


class PropagatorKernel:
    """Closed-form two-point kernel K(t, s) = k(t - s) for the model."""

    def __init__(self, kind, omega):
        if kind not in KERNEL_KINDS:
            raise ValueError("unknown kernel kind %r" % kind)
        self.kind = kind
        self.omega = float(omega)

    def __call__(self, t, s=0.0):
        return self.value(t - s)

    def value(self, tau):
        w = self.omega
        k = self.kind
        if k == "retarded":
            if tau <= 0:
                return 0.0
            return -math.sin(w * tau) / w if w else -tau
        if k == "advanced":
            if tau >= 0:
                return 0.0
            return math.sin(w * tau) / w if w else tau
        if k == "pauli-jordan":
            return -math.sin(w * tau) / w if w else -tau
        if k == "symmetric":
            if w == 0:
                raise ValueError("no symmetric vacuum kernel at omega = 0")
            return math.cos(w * tau) / (2 * w)
        if k == "wightman":
            if w == 0:
                raise ValueError("no vacuum two-point kernel at omega = 0")
            return cmath.exp(-1j * w * tau) / (2 * w)
        if k == "feynman":
            if w == 0:
                raise ValueError("no Feynman kernel at omega = 0")
            return cmath.exp(-1j * w * abs(tau)) / (2 * w)
        raise AssertionError(k)

    def __repr__(self):
        return "PropagatorKernel(%r, omega=%g)" % (self.kind, self.omega)


def green(model: OscillatorModel, kind: str) -> PropagatorKernel:
    return PropagatorKernel(kind, model.omega)


def pair_kernel(kernel, f: Bump, g: Bump, tol=1e-10, fderiv=0, gderiv=0):
    """<f^(a) (x) g^(b), K> = int f^(a)(t) K(t,s) g^(b)(s) dt ds."""
    from scipy.integrate import quad

    fb = f.support.bounds()
    gb = g.support.bounds()
    if fb is None or gb is None:
        return 0.0
    flo, fhi = float(fb[0][0]), float(fb[0][1])
    glo, ghi = float(gb[0][0]), float(gb[0][1])

    def inner(t):
        ft = f.deriv(t, fderiv) if fderiv else f(t)

        def gg(s):
            gs = g.deriv(s, gderiv) if gderiv else g(s)
            return ft * kernel(t, s) * gs
        re, _ = quad(lambda s: gg(s).real if isinstance(gg(s), complex)
                     else gg(s), glo, ghi, epsabs=tol, epsrel=tol, limit=200,
                     points=[t] if glo < t < ghi else None)
        im, _ = quad(lambda s: gg(s).imag if isinstance(gg(s), complex)
                     else 0.0, glo, ghi, epsabs=tol, epsrel=tol, limit=200,
                     points=[t] if glo < t < ghi else None)
        return re + 1j * im

    re, _ = quad(lambda t: inner(t).real, flo, fhi, epsabs=tol, epsrel=tol,
                 limit=200)
    im, _ = quad(lambda t: inner(t).imag, flo, fhi, epsabs=tol, epsrel=tol,
                 limit=200)
    return re + 1j * im if im else re


def green_defect(model, f: Bump, g: Bump, tol=1e-9):
    """| <P^T f (x) g, Delta^R> - int f g |, the weak Green-function defect."""
    from scipy.integrate import quad

    ker = green(model, "retarded")
    w2 = model.omega ** 2
    # P is formally self-adjoint: pair Delta^R with (P f)(t) g(s)
    val = -(pair_kernel(ker, f, g, tol=tol, fderiv=2)
            + w2 * pair_kernel(ker, f, g, tol=tol))
    b = f.support.bounds()
    if b is None:
        return abs(val)
    lo, hi = float(b[0][0]), float(b[0][1])
    direct, _ = quad(lambda t: f(t) * g(t), lo, hi, epsabs=tol, epsrel=tol,
                     limit=200)
    return abs(val - direct)


# ---------------------------------------------------------------------------
# Diagram polynomials
# ---------------------------------------------------------------------------

class Vertex:
    """Point vertex u^a (u~)^b (Pu)^p smeared with a Bump."""

    __slots__ = ("u", "au", "p", "w")

    def __init__(self, u=0, au=0, p=0, w=None):
        self.u = u
        self.au = au
        self.p = p
        self.w = w

    @property
    def odd(self):
        return self.au % 2 == 1

    def key(self):
        return (self.u, self.au, self.p,
                0 if self.w is None else self.w.serial)

    def replace(self, **kw):
        vals = {"u": self.u, "au": self.au, "p": self.p, "w": self.w}
        vals.update(kw)
        return Vertex(**vals)

    def __repr__(self):
        bits = []
        if self.u:
            bits.append("u^%d" % self.u if self.u > 1 else "u")
        if self.p:
            bits.append("(Pu)^%d" % self.p if self.p > 1 else "(Pu)")
        if self.au:
            bits.append("u~^%d" % self.au if self.au > 1 else "u~")
        return "[%s]" % " ".join(bits) if bits else "[1]"


# an edge is (i, j, kind, orient): kernel evaluated at
# orient * (t_i - t_j); symmetric kinds are normalized to orient +1.
_SYMMETRIC = {"symmetric", "feynman"}


def _norm_edge(i, j, kind, orient=1):
    if i > j:
        i, j = j, i
        orient = -orient
    if kind in _SYMMETRIC:
        orient = 1
    return (i, j, kind, orient)


class Diagram:
    """Vertices plus kernel edges, in canonical form."""

    __slots__ = ("verts", "edges", "sign")

    def __init__(self, verts, edges, canonicalize=True):
        if not canonicalize:
            self.verts = tuple(verts)
            self.edges = tuple(sorted(edges))
            self.sign = 1
            return
        best = None
        verts = tuple(verts)
        edges = tuple(edges)
        n = len(verts)
        keys = [v.key() for v in verts]
        odd = [v.odd for v in verts]
        order = sorted(range(n), key=lambda i: (keys[i], i))
        # group identical vertices; permute inside groups for the minimal
        # edge multiset, tracking the Koszul sign of odd-vertex swaps
        groups = []
        for i in order:
            if groups and keys[groups[-1][-1]] == keys[i]:
                groups[-1].append(i)
            else:
                groups.append([i])
        for perm_parts in iproduct(*[permutations(g) for g in groups]):
            perm = [i for part in perm_parts for i in part]  # new -> old
            pos = {old: new for new, old in enumerate(perm)}
            es = tuple(sorted(_norm_edge(pos[a], pos[b], k, o)
                              for a, b, k, o in edges))
            sgn = _odd_perm_sign(perm, odd)
            cand = (es, tuple(perm))
            if best is None or cand[0] < best[0]:
                best = (es, tuple(perm), sgn)
        perm = best[1]
        self.verts = tuple(verts[i] for i in perm)
        self.edges = best[0]
        self.sign = best[2]

    def key(self):
        return (tuple(v.key() for v in self.verts), self.edges)

    def dump(self):
        lines = ["vertex %d %r supp=%r" % (i, v, None if v.w is None
                                           else v.w.support.boxes)
                 for i, v in enumerate(self.verts)]
        for a, b, k, o in self.edges:
            lines.append("edge %d %d %s%s" % (a, b, k,
                                              "" if o > 0 else " (reversed)"))
        return "\n".join(lines)

    def __repr__(self):
        es = ",".join("%d-%d:%s" % (a, b, k) for a, b, k, _ in self.edges)
        return "Diag(%s%s)" % ("".join(map(repr, self.verts)),
                               ";" + es if es else "")


def _odd_perm_sign(perm, odd):
    sign = 1
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b] and odd[perm[a]] and odd[perm[b]]:
                sign = -sign
    return sign


class DiagramPoly:
    """Formal-series combination of diagrams."""

    def __init__(self, terms=None, orders=(3, 2)):
        self.orders = tuple(orders)
        self.terms = {}  # key -> (Diagram, FormalSeries)
        for diag, coeff in (terms or []):
            self._add(diag, coeff)

    def _add(self, diag, coeff):
        if any(v.w is not None and v.w.support.is_empty() for v in diag.verts):
            return  # a vertex weight with empty support is the zero functional
        if not isinstance(coeff, FormalSeries):
            coeff = FormalSeries.const(coeff, self.orders)
        if diag.sign < 0:
            coeff = coeff * Fraction(-1)
        k = diag.key()
        if k in self.terms:
            c = self.terms[k][1] + coeff
            if c.is_zero():
                del self.terms[k]
            else:
                self.terms[k] = (self.terms[k][0], c)
        elif not coeff.is_zero():
            self.terms[k] = (Diagram(diag.verts, diag.edges,
                                     canonicalize=False), coeff)

    # -- ring structure --------------------------------------------------

    def __add__(self, other):
        out = DiagramPoly(orders=self.orders)
        for d, c in self.terms.values():
            out._add(d, c)
        for d, c in other.terms.values():
            out._add(d, c)
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        out = DiagramPoly(orders=self.orders)
        for d, coeff in self.terms.values():
            out._add(d, coeff * c)
        return out

    def __mul__(self, other):
        """Pointwise (graded-commutative) product: diagram concatenation."""
        out = DiagramPoly(orders=self.orders)
        for d1, c1 in self.terms.values():
            for d2, c2 in other.terms.values():
                n = len(d1.verts)
                edges = list(d1.edges) + [(a + n, b + n, k, o)
                                          for a, b, k, o in d2.edges]
                out._add(Diagram(d1.verts + d2.verts, edges), c1 * c2)
        return out

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, DiagramPoly):
            return NotImplemented
        return (self - other).is_zero()

    def dump(self):
        chunks = []
        for d, c in sorted(self.terms.values(), key=lambda t: t[0].key()):
            chunks.append("coeff %s\n%s" % (c, d.dump()))
        return "\n\n".join(chunks) if chunks else "0"

    def __repr__(self):
        return " + ".join("(%s)*%r" % (c, d)
                          for d, c in self.terms.values()) or "0"

    def support(self):
        reg = Region.empty(1)
        for d, _ in self.terms.values():
            for v in d.verts:
                if v.w is not None:
                    reg = reg.union(v.w.support)
        return reg

    def max_hbar(self):
        out = 0
        for _, c in self.terms.values():
            for (p, _q) in c.coeffs:
                out = max(out, p)
        return out


def unit(orders=(3, 2)):
    return DiagramPoly([(Diagram((), ()), 1)], orders)


def field_obs(f: Bump, power=1, afpower=0, orders=(3, 2)):
    """int u(t)^power u~(t)^afpower f(t) dt as a one-vertex diagram."""
    if afpower > 1:
        raise ValueError("u~ is odd: u~(t)^2 = 0, so a vertex carries at "
                         "most one antifield leg")
    return DiagramPoly([(Diagram((Vertex(u=power, au=afpower, w=f),), ()), 1)],
                       orders)


# ---------------------------------------------------------------------------
# Contraction machinery
# ---------------------------------------------------------------------------

def _contract_u_legs(diag, i, j, kind):
    """Contract one u-type leg at vertex i with one at vertex j (i != j),
    preferring plain legs; returns list of (Diagram, scalar) results split by
    leg species (plain-plain inserts a kernel edge, a P-marked leg turns a
    Feynman edge into i*delta, i.e. a vertex merge)."""
    out = []
    vi, vj = diag.verts[i], diag.verts[j]
    combos = []
    if vi.u and vj.u:
        combos.append(("u", "u", vi.u * vj.u))
    if vi.p and vj.u:
        combos.append(("p", "u", vi.p * vj.u))
    if vi.u and vj.p:
        combos.append(("u", "p", vi.u * vj.p))
    if vi.p and vj.p:
        raise NotImplementedError("double P-marked contraction")
    for si, sj, count in combos:
        verts = list(diag.verts)
        verts[i] = vi.replace(**{("u" if si == "u" else "p"):
                                 getattr(vi, "u" if si == "u" else "p") - 1})
        verts[j] = vj.replace(**{("u" if sj == "u" else "p"):
                                 getattr(vj, "u" if sj == "u" else "p") - 1})
        if si == "u" and sj == "u":
            edges = list(diag.edges) + [(i, j, kind, 1)]
            out.append((Diagram(verts, edges), count))
        else:
            if kind != "feynman":
                raise NotImplementedError("P-marked contraction needs the "
                                          "Feynman kernel")
            res = _merge(verts, diag.edges, i, j)
            if res is not None:
                out.append((res, count * 1j))
    return out


def _contract_same_vertex(diag, i, kind):
    """Contract two u legs at the same vertex (unordered pairs)."""
    v = diag.verts[i]
    out = []
    if v.u >= 2:
        verts = list(diag.verts)
        verts[i] = v.replace(u=v.u - 2)
        edges = list(diag.edges) + [(i, i, kind, 1)]
        out.append((Diagram(verts, edges), v.u * (v.u - 1) // 2))
    if v.p and v.u:
        if kind != "feynman":
            raise NotImplementedError
        verts = list(diag.verts)
        verts[i] = v.replace(u=v.u - 1, p=v.p - 1)
        # P G^F at coincident points contributes i*delta(0) -- excluded in
        # this 1-d model by evaluating delta against the smooth smearing:
        # the merged vertex keeps its weight, the pairing is pointwise
        out.append((Diagram(verts, list(diag.edges)), v.p * v.u * 1j))
    return out


_PRODUCT_CACHE = {}


def _bump_atoms(w):
    """Multiset of primitive factors, so that differently-associated products
    of the same bumps compare equal."""
    return getattr(w, "_product_atoms", (w.serial,))


def _bump_product(w1, w2):
    """Memoized Bump product so merged vertices compare structurally."""
    key = tuple(sorted(_bump_atoms(w1) + _bump_atoms(w2)))
    if key not in _PRODUCT_CACHE:
        prod = w1 * w2
        prod._product_atoms = key
        _PRODUCT_CACHE[key] = prod
    return _PRODUCT_CACHE[key]


def _merge(verts, edges, i, j):
    """delta(t_i - t_j) contraction: fuse vertex j into vertex i.

    Returns None (the zero diagram) if the fused vertex would carry two
    antifield legs: u~ is odd, so u~(t)^2 = 0 pointwise.
    """
    verts = list(verts)
    vi, vj = verts[i], verts[j]
    if vi.au + vj.au >= 2:
        return None
    if vi.w is None:
        w = vj.w
    elif vj.w is None:
        w = vi.w
    else:
        w = _bump_product(vi.w, vj.w)
    fused = Vertex(u=vi.u + vj.u, au=vi.au + vj.au, p=vi.p + vj.p, w=w)
    # Koszul: moving vj's odd content next to vi across the vertices between
    sign = 1
    lo, hi = (i, j) if i < j else (j, i)
    if vj.au % 2:
        between = sum(verts[k].au for k in range(lo + 1, hi))
        if between % 2:
            sign = -sign
    verts[i] = fused
    del verts[j]

    def remap(k):
        k = i if k == j else k
        return k if k < j else k - 1

    new_edges = [_norm_edge(remap(a), remap(b), kind, o)
                 for a, b, kind, o in edges]
    d = Diagram(verts, new_edges)
    return _negate_marker(d) if sign < 0 else d


class _NegDiagram:
    # wrapper so _merge can signal a sign flip to its caller
    def __init__(self, diag):
        self.diag = diag


def _negate_marker(d):
    return _NegDiagram(d)


def _mixed_contraction(F: DiagramPoly, G: DiagramPoly, kind, weight):
    """sum over single kernel contractions between an F-leg and a G-leg of
    the concatenated diagram, scaled by `weight` (a FormalSeries or scalar).

    Returns a DiagramPoly of concatenations with exactly one new mixed edge.
    """
    out = DiagramPoly(orders=F.orders)
    for d1, c1 in F.terms.values():
        n1 = len(d1.verts)
        for d2, c2 in G.terms.values():
            base_verts = d1.verts + d2.verts
            base_edges = list(d1.edges) + [(a + n1, b + n1, k, o)
                                           for a, b, k, o in d2.edges]
            base = Diagram(base_verts, base_edges, canonicalize=False)
            coeff = c1 * c2 * weight
            for i in range(n1):
                for j in range(n1, n1 + len(d2.verts)):
                    for res, cnt in _contract_u_legs(base, i, j, kind):
                        if isinstance(res, _NegDiagram):
                            out._add(res.diag, coeff * (-cnt))
                        else:
                            out._add(res, coeff * cnt)
    return out


# ---------------------------------------------------------------------------
# Star product, time ordering, deformed product
# ---------------------------------------------------------------------------

def _hbar_weight(k, orders, sign=1):
    """hbar^k / k! as a FormalSeries, with an optional (-1)^k for inverses."""
    c = Fraction(sign ** k, math.factorial(k))
    return FormalSeries({(k, 0): Expr.const(c)}, orders)


def star(F: DiagramPoly, G: DiagramPoly) -> DiagramPoly:
    """m o exp(hbar D_W): Wightman contractions from F-legs to G-legs, one
    power of hbar per edge.  Iterated single contractions; the k-fold layer
    carries hbar^k / k!."""
    hmax = F.orders[0]
    total = DiagramPoly(orders=F.orders)
    pairs = [(_Split(d1, d2), c1 * c2)
             for d1, c1 in F.terms.values() for d2, c2 in G.terms.values()]
    for k in range(hmax + 1):
        w = _hbar_weight(k, F.orders)
        for sp, c in pairs:
            total._add(sp.diagram(), c * w)
        pairs = [(sp2, c * cnt) for sp, c in pairs
                 for sp2, cnt in sp.contract("wightman")]
        if not pairs:
            break
    return total


class _Split:
    """A concatenated diagram remembering the F/G boundary, for mixed-edge
    generation with correct orientation (W edges point F -> G)."""

    __slots__ = ("left", "right", "edges", "extra")

    def __init__(self, left, right, extra=None):
        self.left = left
        self.right = right
        self.extra = tuple(extra or ())  # mixed edges, global indexing

    def diagram(self):
        n = len(self.left.verts)
        edges = list(self.left.edges) + \
            [(a + n, b + n, k, o) for a, b, k, o in self.right.edges] + \
            list(self.extra)
        lu, ru = _leg_usage(self)
        verts = [v.replace(u=v.u - lu.get(i, 0))
                 for i, v in enumerate(self.left.verts)]
        verts += [v.replace(u=v.u - ru.get(j, 0))
                  for j, v in enumerate(self.right.verts)]
        return Diagram(verts, edges)

    def contract(self, kind):
        n = len(self.left.verts)
        out = []
        lverts = self.left.verts
        rverts = self.right.verts
        used = _leg_usage(self)
        for i in range(n):
            ui = lverts[i].u - used[0].get(i, 0)
            if ui <= 0:
                continue
            for j in range(len(rverts)):
                uj = rverts[j].u - used[1].get(j, 0)
                if uj <= 0:
                    continue
                out.append((_Split(self.left, self.right,
                                   self.extra + ((i, n + j, kind, 1),)),
                            ui * uj))
        return out


def _leg_usage(split):
    n = len(split.left.verts)
    lu, ru = {}, {}
    for a, b, k, o in split.extra:
        lu[a] = lu.get(a, 0) + 1
        ru[b - n] = ru.get(b - n, 0) + 1
    return lu, ru


def tmap(F: DiagramPoly, inverse=False) -> DiagramPoly:
    """T = exp((hbar/2) d_{G^F}): Feynman self-contractions, one power of
    hbar per contraction (the 1/2 is absorbed into unordered-pair counts)."""
    hmax = F.orders[0]
    sign = -1 if inverse else 1
    total = DiagramPoly(orders=F.orders)
    layer = list(F.terms.values())
    for k in range(hmax + 1):
        w = _hbar_weight(k, F.orders, sign)
        for d, c in layer:
            total._add(d, c * w)
        nxt = DiagramPoly(orders=F.orders)
        for d, c in layer:
            for i in range(len(d.verts)):
                for res, cnt in _contract_same_vertex(d, i, "feynman"):
                    _addsplit(nxt, res, c * cnt)
                for j in range(i + 1, len(d.verts)):
                    for res, cnt in _contract_u_legs(d, i, j, "feynman"):
                        _addsplit(nxt, res, c * cnt)
        layer = list(nxt.terms.values())
        if not layer:
            break
    return total


def _addsplit(poly, res, coeff):
    if res is None:
        return
    if isinstance(res, _NegDiagram):
        poly._add(res.diag, coeff * Fraction(-1))
    else:
        poly._add(res, coeff)


def tmap_inv(F: DiagramPoly) -> DiagramPoly:
    return tmap(F, inverse=True)


def tprod(F: DiagramPoly, G: DiagramPoly) -> DiagramPoly:
    """Time-ordered product T(T^-1 F . T^-1 G): equivalently, exp(hbar
    d_{G^F}) over mixed F-G legs only."""
    hmax = F.orders[0]
    total = DiagramPoly(orders=F.orders)
    pairs = [(_Split(d1, d2), c1 * c2)
             for d1, c1 in F.terms.values() for d2, c2 in G.terms.values()]
    for k in range(hmax + 1):
        w = _hbar_weight(k, F.orders)
        for sp, c in pairs:
            total._add(sp.diagram(), c * w)
        pairs = [(sp2, c * cnt) for sp, c in pairs
                 for sp2, cnt in sp.contract("feynman")]
        if not pairs:
            break
    return total


# ---------------------------------------------------------------------------
# Peierls bracket
# ---------------------------------------------------------------------------

def peierls(F: DiagramPoly, G: DiagramPoly) -> DiagramPoly:
    """Classical Peierls bracket: single Pauli-Jordan contraction between
    F-legs and G-legs."""
    return _mixed_contraction(F, G, "pauli-jordan", 1)


# ---------------------------------------------------------------------------
# Numeric evaluation of diagrams
# ---------------------------------------------------------------------------

def eval_diagram(diag: Diagram, model: OscillatorModel, fields,
                 tol=1e-10) -> complex:
    """Nested quadrature over vertex positions (supports up to 3 vertices)."""
    from scipy.integrate import quad

    verts = diag.verts
    n = len(verts)
    kernels = {k: PropagatorKernel(k, model.omega) for k in
               {e[2] for e in diag.edges}}

    def vertex_factor(v, t):
        out = v.w(t) if v.w is not None else 1.0
        if v.u:
            out *= fields["u"].jet(t, (0,)) ** v.u
        if v.p:
            out *= model.p_apply(fields["u"], t) ** v.p
        if v.au:
            out *= fields["u~"].jet(t, (0,)) ** v.au
        return out

    def integrand(ts):
        val = 1.0 + 0.0j
        for v, t in zip(verts, ts):
            val *= vertex_factor(v, t)
            if val == 0:
                return 0.0
        for a, b, k, o in diag.edges:
            tau = o * (ts[a] - ts[b])
            val *= kernels[k].value(tau)
        return val

    if n == 0:
        return integrand(())
    if n > 3:
        raise NotImplementedError("diagram evaluation supports <= 3 vertices")

    bounds = []
    for v in verts:
        if v.w is None or v.w.support.bounds() is None:
            return 0.0
        (lo, hi), = v.w.support.bounds()
        bounds.append((float(lo), float(hi)))

    def nest(level, ts):
        if level == n:
            return integrand(ts)
        lo, hi = bounds[level]
        eps = tol * (10 ** (n - level - 1))
        re, _ = quad(lambda t: nest(level + 1, ts + (t,)).real, lo, hi,
                     epsabs=eps, epsrel=eps, limit=120)
        im, _ = quad(lambda t: nest(level + 1, ts + (t,)).imag, lo, hi,
                     epsabs=eps, epsrel=eps, limit=120)
        return re + 1j * im

    return nest(0, ())


def eval_poly(P: DiagramPoly, model, fields, tol=1e-10):
    """Dict (hbar, lambda) order -> complex value."""
    out = {}
    for d, c in P.terms.values():
        v = eval_diagram(d, model, fields, tol=tol)
        if v == 0:
            continue
        for pq, e in c.coeffs.items():
            z = e.constant_part().to_complex() * v
            if z:
                out[pq] = out.get(pq, 0) + z
    return out


# ---------------------------------------------------------------------------
# Causal factorization
# ---------------------------------------------------------------------------

class CausalReport:
    def __init__(self, branch, max_dev=None, skipped=False, note=""):
        self.branch = branch
        self.max_dev = max_dev
        self.skipped = skipped
        self.note = note

    def __repr__(self):
        if self.skipped:
            return "CausalReport(skipped: %s)" % self.note
        return "CausalReport(%s, max_dev=%g)" % (self.branch, self.max_dev)


class IncomparableSupports(ValueError):
    pass


def causal_check(F: DiagramPoly, G: DiagramPoly, model, fields_list,
                 tol=1e-8) -> CausalReport:
    """Verify time-ordered/star factorization for causally ordered supports:
    F .T G = F * G when no point of supp G is later than supp F, and
    F .T G = G * F in the flipped case."""
    sF, sG = F.support(), G.support()
    if sF == sG:
        return CausalReport(None, skipped=True,
                            note="equal supports; no causal order")
    g_before_f = not_later(sG, sF)
    f_before_g = not_later(sF, sG)
    if g_before_f and f_before_g:
        return CausalReport(None, skipped=True,
                            note="supports are simultaneous; both branches "
                                 "degenerate")
    if not g_before_f and not f_before_g:
        raise IncomparableSupports("supports are not causally ordered")
    tp = tprod(F, G)
    st = star(F, G) if g_before_f else star(G, F)
    branch = "F*G" if g_before_f else "G*F"
    dev = 0.0
    for fields in fields_list:
        a = eval_poly(tp, model, fields, tol=tol * 1e-2)
        b = eval_poly(st, model, fields, tol=tol * 1e-2)
        for k in set(a) | set(b):
            dev = max(dev, abs(a.get(k, 0) - b.get(k, 0)))
    if dev > tol:
        raise AssertionError("causal factorization violated: dev=%g" % dev)
    return CausalReport(branch, max_dev=dev)


# ---------------------------------------------------------------------------
# The free quantum BV differential
# ---------------------------------------------------------------------------

def delta_s0(F: DiagramPoly) -> DiagramPoly:
    """Classical free BV differential: replace one u~ leg by a (Pu) leg."""
    out = DiagramPoly(orders=F.orders)
    for d, c in F.terms.values():
        for i, v in enumerate(d.verts):
            if not v.au:
                continue
            sign = 1
            if sum(d.verts[k].au for k in range(i)) % 2:
                sign = -1
            verts = list(d.verts)
            verts[i] = v.replace(au=v.au - 1, p=v.p + 1)
            out._add(Diagram(verts, list(d.edges)),
                     c * Fraction(sign * v.au))
    return out


def bv_laplacian(F: DiagramPoly) -> DiagramPoly:
    """Graded BV Laplacian: delta-contraction of one u leg with one u~ leg."""
    out = DiagramPoly(orders=F.orders)
    for d, c in F.terms.values():
        for i, vi in enumerate(d.verts):
            for j, vj in enumerate(d.verts):
                count = vi.u * vj.au
                if not count:
                    continue
                # remove the legs, then fuse (or stay) at the same point
                verts = list(d.verts)
                verts[i] = verts[i].replace(u=verts[i].u - 1)
                verts[j] = verts[j].replace(au=verts[j].au - 1)
                sign = 1
                if sum(d.verts[k].au for k in range(j)) % 2:
                    sign = -1
                if j == i:
                    out._add(Diagram(verts, list(d.edges)),
                             c * Fraction(sign * count))
                else:
                    res = _merge(verts, d.edges, i, j)
                    _addsplit(out, res, c * Fraction(sign * count))
    return out


def shat0(F: DiagramPoly, closed_form=True) -> DiagramPoly:
    """Free quantum BV differential s0 = T^-1 o delta_S0 o T; the closed
    form is delta_S0 - i hbar Laplacian."""
    if closed_form:
        ihbar = FormalSeries({(1, 0): Expr.const(I)}, F.orders)
        return delta_s0(F) - bv_laplacian(F).scale(ihbar)
    return tmap_inv(delta_s0(tmap(F)))
