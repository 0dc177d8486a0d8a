"""Multilocal observables: extension, disjoint products, structure maps,
the coproduct, and Weiss-cover decomposition."""

import random
from fractions import Fraction

import pytest

from bvfact.symexpr import Expr, QI
from bvfact.jetcalc import JetExpr, jet, _density_value
from bvfact.region import Region, mollifier
from bvfact.mloc import (MultilocalObs, MLTerm, local_observable,
                         constant_observable, extend, disjoint_product,
                         structure_map, weiss_decompose, coproduct,
                         coproduct_eval, SupportError,
                         WeissDecompositionError)
from bvfact.numfields import Poly1D

U = JetExpr.of(jet("u", (), 0), 1)
U2 = U * U
FIELDS = {"u": Poly1D([0.3, 1.2, -0.7])}


def make_FG():
    w1 = mollifier(Fraction(1, 4), Fraction(1, 4))   # supp (0, 1/2)
    w2 = mollifier(Fraction(3, 4), Fraction(1, 8))   # supp (5/8, 7/8)
    return local_observable(U2, w1), local_observable(U, w2)


class TestExtension:
    def test_functorial(self):
        F, _ = make_FG()
        V = Region.interval(-1, 1)
        W = Region.interval(-2, 2)
        assert extend(extend(F, V), W) == extend(F, W)

    def test_evaluation_invariant(self):
        F, _ = make_FG()
        a = F.scalar(FIELDS)
        b = extend(F, Region.interval(-2, 2)).scalar(FIELDS)
        assert abs(a - b) < 1e-12


class TestProducts:
    def test_disjoint_product_factorizes(self):
        F, G = make_FG()
        P = disjoint_product(F, G)
        pa = P.scalar(FIELDS)
        pb = F.scalar(FIELDS) * G.scalar(FIELDS)
        assert abs(pa - pb) < 1e-10

    def test_overlapping_product_rejected(self):
        F, _ = make_FG()
        with pytest.raises(SupportError):
            disjoint_product(F, F)


class TestStructureMaps:
    def test_single_part_is_extension(self):
        F, _ = make_FG()
        W = Region.interval(-2, 2)
        S = structure_map([(F, Region.interval(0, Fraction(1, 2)))], W)
        assert S == extend(F, W)

    def test_relabeling_equivariance(self):
        F, G = make_FG()
        W = Region.interval(-2, 2)
        pf = (F, Region.interval(0, Fraction(1, 2)))
        pg = (G, Region.interval(Fraction(5, 8), Fraction(7, 8)))
        assert structure_map([pf, pg], W) == structure_map([pg, pf], W)

    def test_constant_observable(self):
        C = constant_observable(QI.of(Fraction(3)))
        assert C.support().is_empty()


class TestCoproduct:
    def test_square(self):
        assert len(coproduct(U2)) == 3

    def test_recombination_oracle(self):
        ux = JetExpr.of(jet("u", (1,), 0), 1)
        alpha = U * U * U * ux
        pairs = coproduct(alpha)
        subsL = {s: Expr.sym(jet("a", s.index, 0))
                 for s in (jet("u'", (), 0), jet("u'", (1,), 0))}
        subsR = {s: Expr.sym(jet("b", s.index, 0))
                 for s in (jet("u''", (), 0), jet("u''", (1,), 0))}
        lhs = coproduct_eval(pairs, subsL, subsR)
        split = {jet("u", (), 0): Expr.sym(jet("a", (), 0))
                 + Expr.sym(jet("b", (), 0)),
                 jet("u", (1,), 0): Expr.sym(jet("a", (1,), 0))
                 + Expr.sym(jet("b", (1,), 0))}
        direct = alpha.expr.subs(split)
        assert (lhs - direct).is_zero()


def symmetrized_kernel(obs, pts, fields):
    """Pointwise value of the permutation-symmetrized integrand of a
    homogeneous-degree observable at a tuple of points."""
    import itertools
    tot = 0.0
    for t in obs.terms:
        c = t.coeff.coeffs.get((0, 0))
        c = c.constant_part().to_complex() if c is not None else 0
        if not c:
            continue
        for perm in itertools.permutations(pts):
            prod = c
            for s, w, x in zip(t.slots, t.weights, perm):
                prod *= _density_value(s, x, fields, {}) * w(x)
            tot += prod
    return tot


GOOD_COVER = [Region.interval(0, Fraction(7, 10)),
              Region.interval(Fraction(3, 10), 1),
              Region.intervals([(0, Fraction(2, 5)), (Fraction(3, 5), 1)])]


class TestWeissDecomposition:
    def test_roundtrip_degree2(self):
        h1 = mollifier(Fraction(1, 3), Fraction(1, 4))
        h2 = mollifier(Fraction(2, 3), Fraction(1, 4))
        F = MultilocalObs([MLTerm((U2, U), (h1, h2), 1)],
                          Region.interval(0, 1))
        parts = weiss_decompose(F, GOOD_COVER)
        assert all(GOOD_COVER[j].contains_region(p.support())
                   for p, j in parts)
        rng = random.Random(11)
        for _ in range(5):
            pts = (rng.uniform(0, 1), rng.uniform(0, 1))
            ref = symmetrized_kernel(F, pts, FIELDS)
            got = sum(symmetrized_kernel(p, pts, FIELDS) for p, _ in parts)
            assert abs(got - ref) < 1e-10

    def test_roundtrip_degree3(self):
        # all unions of three of four overlapping intervals: Weiss at
        # arity 3, since any three points meet at most three intervals
        base = [(Fraction(0), Fraction(3, 10)),
                (Fraction(2, 10), Fraction(55, 100)),
                (Fraction(45, 100), Fraction(8, 10)),
                (Fraction(7, 10), Fraction(1))]
        import itertools
        cover3 = [Region.intervals(list(sub))
                  for sub in itertools.combinations(base, 3)]
        ws = [mollifier(Fraction(c, 6), Fraction(1, 8))
              for c in (1, 3, 5)]
        F = MultilocalObs([MLTerm((U, U, U2), tuple(ws), 1)],
                          Region.interval(0, 1))
        parts = weiss_decompose(F, cover3)
        rng = random.Random(12)
        for _ in range(3):
            pts = tuple(rng.uniform(0, 1) for _ in range(3))
            ref = symmetrized_kernel(F, pts, FIELDS)
            got = sum(symmetrized_kernel(p, pts, FIELDS) for p, _ in parts)
            assert abs(got - ref) < 1e-10

    def test_non_weiss_rejected_with_witness(self):
        h1 = mollifier(Fraction(1, 3), Fraction(1, 4))
        h2 = mollifier(Fraction(2, 3), Fraction(1, 4))
        F = MultilocalObs([MLTerm((U2, U), (h1, h2), 1)],
                          Region.interval(0, 1))
        bad = [Region.interval(0, Fraction(2, 3)),
               Region.interval(Fraction(1, 3), 1)]
        with pytest.raises(WeissDecompositionError) as ei:
            weiss_decompose(F, bad)
        assert ei.value.witness is not None
