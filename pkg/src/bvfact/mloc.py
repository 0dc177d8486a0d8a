"""Multilocal observables: finite sums of degree-m terms, each a product of
m one-slot local integrands with a product weight, carried by a region and a
formal-series scalar.

Canonical form is S_m-symmetrized with Koszul signs, so a degree-m term and
any slot relabeling of it compare equal (up to the graded sign, which the
symmetrization absorbs).
"""

from fractions import Fraction
from itertools import permutations

from .symexpr import Expr, QI, FormalSeries
from .jetcalc import JetExpr, LagForm, evaluate_local
from .region import Region, Bump


class SupportError(ValueError):
    pass


def _perm_sign(perm, grades):
    """Koszul sign for permuting graded slots: perm maps new position ->
    old index."""
    sign = 1
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b] and grades[perm[a]] % 2 and grades[perm[b]] % 2:
                sign = -sign
    return sign


def _graded_components(expr: Expr):
    buckets = {}
    for mono, c in expr.terms.items():
        g = sum(s.grade * e for s, e in mono)
        buckets.setdefault(g, []).append((mono, c))
    return {g: Expr.from_terms(pairs) for g, pairs in buckets.items()}


class MLTerm:
    """One degree-m summand: coeff * prod_s int slot_s(jets) w_s."""

    __slots__ = ("slots", "weights", "coeff")

    def __init__(self, slots, weights, coeff):
        if len(slots) != len(weights):
            raise ValueError("slot/weight arity mismatch")
        self.slots = tuple(slots)      # JetExprs, one per slot
        self.weights = tuple(weights)  # Bumps, one per slot
        self.coeff = coeff             # FormalSeries

    @property
    def degree(self):
        return len(self.slots)

    def grades(self):
        return tuple(s.expr.homogeneous_grade() for s in self.slots)

    def key(self):
        return tuple((s.expr, id(w)) for s, w in zip(self.slots, self.weights))

    def support(self, dim=1):
        reg = Region.empty(dim)
        for w in self.weights:
            reg = reg.union(w.support)
        return reg


def _series(c, orders):
    if isinstance(c, FormalSeries):
        return c
    return FormalSeries.const(c, orders)


class MultilocalObs:
    """S_m-symmetrized multilocal observable over a region."""

    def __init__(self, terms, region: Region, orders=(3, 2), symmetrize=True):
        self.region = region
        self.orders = tuple(orders)
        self.constant = FormalSeries.const(0, self.orders)
        acc = {}

        def _add(term):
            k = term.key()
            if k in acc:
                acc[k] = (acc[k][0], acc[k][1] + term.coeff)
            else:
                acc[k] = (term, term.coeff)

        for term in terms:
            if term.degree == 0:
                self.constant = self.constant + _series(term.coeff, self.orders)
                continue
            coeff = _series(term.coeff, self.orders)
            # split non-homogeneous slots into graded components first
            pieces = [(tuple(), QI.of(1))]
            for s in term.slots:
                comps = _graded_components(s.expr)
                pieces = [(done + (Expr.from_terms(list(e.terms.items())),), c)
                          for done, c in pieces for e in comps.values()]
            for slot_exprs, _ in pieces:
                slots = tuple(JetExpr(e, term.slots[0].dim) for e in slot_exprs)
                grades = tuple(s.expr.homogeneous_grade() for s in slots)
                m = len(slots)
                if not symmetrize:
                    _add(MLTerm(slots, term.weights, coeff))
                    continue
                inv = Fraction(1, _factorial(m))
                for perm in permutations(range(m)):
                    sgn = _perm_sign(perm, grades)
                    c = coeff * (inv * sgn)
                    _add(MLTerm(tuple(slots[i] for i in perm),
                                tuple(term.weights[i] for i in perm), c))
        self.terms = [t_c[0]._replace_coeff(t_c[1]) for t_c in acc.values()
                      if not t_c[1].is_zero()]

    # -- observables -----------------------------------------------------

    def degrees(self):
        out = sorted({t.degree for t in self.terms})
        if not self.constant.is_zero():
            out = [0] + out
        return out

    def support(self):
        reg = Region.empty(self.region.dim)
        for t in self.terms:
            reg = reg.union(t.support(self.region.dim))
        return reg

    def evaluate(self, fields, tol=1e-10):
        """Dict (hbar power, lambda power) -> numeric value."""
        out = {}
        for (p, q), c in self.constant.coeffs.items():
            v = c.constant_part().to_complex()
            if v:
                out[(p, q)] = out.get((p, q), 0) + v
        for t in self.terms:
            prod = 1.0
            for s, w in zip(t.slots, t.weights):
                prod *= evaluate_local(LagForm.top(s, s.dim), w, fields, tol=tol)
            for (p, q), c in t.coeff.coeffs.items():
                v = c.constant_part().to_complex() * prod
                if v:
                    out[(p, q)] = out.get((p, q), 0) + v
        return {k: v for k, v in out.items() if v != 0}

    def scalar(self, fields, tol=1e-10):
        """Numeric value when the series is concentrated at order (0,0)."""
        vals = self.evaluate(fields, tol=tol)
        if set(vals) - {(0, 0)}:
            raise ValueError("observable has nontrivial series orders")
        return vals.get((0, 0), 0.0)

    def __eq__(self, other):
        if not isinstance(other, MultilocalObs):
            return NotImplemented
        if not (self.constant - other.constant).is_zero():
            return False
        a = {t.key(): t.coeff for t in self.terms}
        b = {t.key(): t.coeff for t in other.terms}
        if set(a) != set(b):
            return False
        return all((a[k] - b[k]).is_zero() for k in a)

    def __repr__(self):
        return "MultilocalObs(%d terms, degrees %s)" % (
            len(self.terms), self.degrees())


def _factorial(m):
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def _mlterm_replace_coeff(self, coeff):
    return MLTerm(self.slots, self.weights, coeff)


MLTerm._replace_coeff = _mlterm_replace_coeff


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def local_observable(integrand: JetExpr, weight: Bump, region=None,
                     coeff=1, orders=(3, 2)) -> MultilocalObs:
    region = region or weight.support
    return MultilocalObs([MLTerm((integrand,), (weight,), coeff)],
                         region, orders)


def constant_observable(value, region=None, dim=1, orders=(3, 2)):
    region = region or Region.empty(dim)
    return MultilocalObs([MLTerm((), (), value)], region, orders)


# ---------------------------------------------------------------------------
# Precosheaf structure
# ---------------------------------------------------------------------------

def extend(F: MultilocalObs, V: Region) -> MultilocalObs:
    """Extension along U subset V; evaluation-invariant by construction."""
    if not V.contains_region(F.region):
        raise SupportError("target region does not contain the source")
    out = MultilocalObs([], V, F.orders)
    out.terms = list(F.terms)
    out.constant = F.constant
    return out


def disjoint_product(F: MultilocalObs, G: MultilocalObs) -> MultilocalObs:
    """Product of observables with disjoint supports; degrees add."""
    if not F.region.disjoint_from(G.region):
        raise SupportError("regions overlap")
    region = F.region.union(G.region)
    terms = []
    for tf in F.terms:
        for tg in G.terms:
            terms.append(MLTerm(tf.slots + tg.slots,
                                tf.weights + tg.weights,
                                tf.coeff * tg.coeff))
    out = MultilocalObs(terms, region, F.orders)
    # constant parts multiply through
    if not F.constant.is_zero():
        for t in G.terms:
            _obs_add_term(out, MLTerm(t.slots, t.weights, F.constant * t.coeff))
    if not G.constant.is_zero():
        for t in F.terms:
            _obs_add_term(out, MLTerm(t.slots, t.weights, t.coeff * G.constant))
    out.constant = out.constant + F.constant * G.constant
    return out


def _obs_add_term(obs, term):
    extra = MultilocalObs([term], obs.region, obs.orders)
    merged = {t.key(): t for t in obs.terms}
    for t in extra.terms:
        k = t.key()
        if k in merged:
            c = merged[k].coeff + t.coeff
            if c.is_zero():
                del merged[k]
            else:
                merged[k] = t._replace_coeff(c)
        else:
            merged[k] = t
    obs.terms = list(merged.values())


def structure_map(parts, V: Region) -> MultilocalObs:
    """Prefactorization structure map: parts (observable, region), pairwise
    disjoint regions inside V; disjoint products followed by extension."""
    checked = []
    for obs, reg in parts:
        if not V.contains_region(reg):
            raise SupportError("part region not inside the target")
        if not reg.contains_region(obs.support()):
            raise SupportError("observable not supported in its region")
        for _, other in checked:
            if not reg.disjoint_from(other):
                raise SupportError("part regions overlap")
        checked.append((obs, reg))
    if not checked:
        raise ValueError("structure_map needs at least one part")
    acc = None
    for obs, reg in checked:
        cur = extend(obs, reg) if reg.contains_region(obs.region) else obs
        acc = cur if acc is None else disjoint_product(acc, cur)
    return extend(acc, V)


# ---------------------------------------------------------------------------
# Weiss decomposition
# ---------------------------------------------------------------------------

class WeissDecompositionError(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


def weiss_decompose(F: MultilocalObs, cover, max_rounds=6):
    """Split F into pieces supported (slotwise) in single cover elements.

    Returns a list of (MultilocalObs, cover index).  Uses a partition of
    unity on a refinement of the cover; the refinement is halved until every
    assignment tuple fits inside one cover element, which terminates for a
    Weiss cover at the arity of F.
    """
    from .region import partition_of_unity, is_weiss_cover

    if F.region.dim != 1:
        raise NotImplementedError("weiss_decompose is one-dimensional")
    arity = max([t.degree for t in F.terms], default=1)
    compact = F.support()
    if compact.bounds() is None:
        return [(F, 0)]
    rep = is_weiss_cover(cover, F.region, arity)
    if not rep.ok:
        raise WeissDecompositionError(
            "cover fails the Weiss condition at arity %d" % arity,
            witness=rep.witness)

    lo, hi = compact.bounds()[0]
    pieces = len(cover)
    for round_ in range(max_rounds):
        n = 4 * 2 ** round_
        step = Fraction(hi - lo, n)
        pad = step  # overlap half-steps so the small cover is open
        # overlapping refinement; overshoots the hull slightly so the closure
        # of the support is covered (weights must close up inside the region)
        small = [Region.interval(lo + k * step - pad / 2,
                                 lo + (k + 1) * step + pad / 2)
                 for k in range(n)]
        try:
            psis = partition_of_unity(small, compact)
        except Exception:
            continue
        # which cover elements contain which small intervals
        containers = [[j for j in range(pieces)
                       if cover[j].contains_region(small[k])]
                      for k in range(n)]
        assignment = _assign(F, psis, containers, small, pieces)
        if assignment is not None:
            return assignment
    # produce a witness: a tuple of small-interval midpoints with no common
    # container (should not happen for a genuine Weiss cover)
    raise WeissDecompositionError("could not refine the partition of unity "
                                  "to fit the cover", witness=None)


def _assign(F, psis, containers, small, pieces):
    from itertools import product as iproduct

    buckets = {j: [] for j in range(pieces)}
    const_done = False
    for t in F.terms:
        m = t.degree
        for combo in iproduct(range(len(psis)), repeat=m):
            common = set(containers[combo[0]])
            for k in combo[1:]:
                common &= set(containers[k])
            if not common:
                return None
            j = min(common)
            weights = tuple(psis[k] * w for k, w in zip(combo, t.weights))
            buckets[j].append(MLTerm(t.slots, weights, t.coeff))
    out = []
    for j in range(pieces):
        terms = buckets[j]
        if not terms and (const_done or F.constant.is_zero() or j != 0):
            continue
        obs = MultilocalObs(terms, F.region, F.orders, symmetrize=False)
        if j == 0 and not F.constant.is_zero():
            obs.constant = F.constant
            const_done = True
        out.append((obs, j))
    return out


# ---------------------------------------------------------------------------
# Taylor coproduct
# ---------------------------------------------------------------------------

def coproduct(alpha: JetExpr, field_names=None):
    """Finite sum alpha_(1) (x) alpha_(2) with jets split u -> u' + u''.

    Returns a list of (left: JetExpr, right: JetExpr, coeff: QI) with left
    jets renamed to "name'" and right jets to "name''".  Substituting
    (j psi, j phi) for the two groups reproduces alpha(j psi + j phi)
    exactly for polynomial integrands.
    """
    from .symexpr import Symbol

    dim = alpha.dim
    table = {}
    for s in alpha.expr.symbols():
        if s.ns == "jet" and (field_names is None or s.name in field_names):
            left = Symbol("jet", s.name + "'", s.index, s.grade)
            right = Symbol("jet", s.name + "''", s.index, s.grade)
            table[s] = Expr.sym(left) + Expr.sym(right)
    split = alpha.expr.subs(table)
    pairs = {}
    for mono, c in split.terms.items():
        lmono, rmono = [], []
        sign = 1
        odd_in_right = 0
        for s, e in mono:
            if s.ns == "jet" and s.name.endswith("''"):
                rmono.append((s, e))
                if s.grade % 2:
                    odd_in_right += e
            elif s.ns == "jet" and s.name.endswith("'"):
                lmono.append((s, e))
                if s.grade % 2 and odd_in_right % 2:
                    sign = -sign
            else:
                lmono.append((s, e))
        key = (tuple(lmono), tuple(rmono))
        cur = pairs.get(key, QI.of(0))
        pairs[key] = cur + (c if sign > 0 else QI.of(-1) * c)
    out = []
    for (lmono, rmono), c in pairs.items():
        if c == QI.of(0):
            continue
        left = JetExpr(Expr.from_terms([(lmono, QI.of(1))]), dim)
        right = JetExpr(Expr.from_terms([(rmono, QI.of(1))]), dim)
        out.append((left, right, c))
    return out


def coproduct_eval(pairs, left_subs, right_subs):
    """Recombine a coproduct by substituting jets on each side."""
    total = Expr.zero()
    for left, right, c in pairs:
        l = left.expr.subs(left_subs)
        r = right.expr.subs(right_subs)
        total = total + (l * r).map_coeff(lambda q: q * c)
    return total
