"""Field/antifield algebra: antibracket laws, master-equation checks, gauge
fixing of the dim-2 su(2) model, and the classical differential."""

import random
from fractions import Fraction

import pytest

from bvfact.symexpr import Expr, QI
from bvfact.jetcalc import (JetExpr, jet, testfn as tfn, is_total_divergence,
                            euler_lagrange_density)
from bvfact.bvalg import (FieldContent, antibracket_density, antibracket,
                          antifield_name, AF_SUFFIX, smeared_field,
                          scalar_content, free_scalar, quartic_interaction,
                          GenLagrangian, check_cme, gauge_fix, bv_vector_field,
                          reduce_cutoff, eliminate_b, eps,
                          su2_yang_mills, su2_gauge_fixing_fermion)
from bvfact.region import Region


def rand_density(rng, content, names, tfname):
    """Random homogeneous graded density with a named cutoff factor."""
    while True:
        terms = []
        grade = None
        for _ in range(12):
            e = Expr.sym(tfn(tfname))
            for _ in range(rng.randint(1, 3)):
                nm = rng.choice(names)
                k = rng.randint(0, 2)
                e = e * Expr.sym(jet(nm, (k,) if k else (),
                                     content.grade(nm)))
            if e.is_zero():
                continue
            g = e.homogeneous_grade()
            if grade is None:
                grade = g
            if g != grade:
                continue
            c = QI(Fraction(rng.randint(-3, 3)), Fraction(rng.randint(-2, 2)))
            terms.append(e.map_coeff(lambda q, c=c: q * c))
            if len(terms) >= 3:
                break
        tot = Expr.zero()
        for t in terms:
            tot = tot + t
        if not tot.is_zero():
            return JetExpr(tot, 1), grade


CONTENT = FieldContent([("u", 0), ("c", -1)])
NAMES = ["u", "c", antifield_name("u"), antifield_name("c")]


class TestAntibracketLaws:
    def test_shifted_antisymmetry(self):
        rng = random.Random(7)
        for _ in range(10):
            F, gF = rand_density(rng, CONTENT, NAMES, "fa")
            G, gG = rand_density(rng, CONTENT, NAMES, "fb")
            sgn = (-1) ** ((gF + 1) * (gG + 1))
            lhs = antibracket_density(CONTENT, F, G) + \
                JetExpr.of(sgn, 1) * antibracket_density(CONTENT, G, F)
            assert is_total_divergence(lhs)

    def test_graded_jacobi(self):
        rng = random.Random(8)
        for _ in range(3):
            triple = [rand_density(rng, CONTENT, NAMES, n)
                      for n in ("fa", "fb", "fc")]
            j = JetExpr.const(0, 1)
            for k in range(3):
                (A, gA), (B, gB), (C, gC) = (triple[k % 3],
                                             triple[(k + 1) % 3],
                                             triple[(k + 2) % 3])
                j = j + JetExpr.of((-1) ** ((gA + 1) * (gC + 1)), 1) * \
                    antibracket_density(
                        CONTENT, A, antibracket_density(CONTENT, B, C))
            assert is_total_divergence(j)

    def test_canonical_pairing(self):
        R = Region.interval(0, 1)
        phi_f = smeared_field(scalar_content(), "u", "f", R)
        af_g = smeared_field(scalar_content(), "u" + AF_SUFFIX, "g", R)
        br = antibracket(phi_f, af_g)
        want = JetExpr.of(tfn("f"), 1) * JetExpr.of(tfn("g"), 1)
        assert (br.density - want).is_zero()

    def test_field_field_bracket_vanishes(self):
        R = Region.interval(0, 1)
        phi_f = smeared_field(scalar_content(), "u", "f", R)
        phi_g = smeared_field(scalar_content(), "u", "g", R)
        assert antibracket(phi_f, phi_g).density.is_zero()


class TestMasterEquation:
    def test_free_scalar(self):
        assert check_cme(free_scalar()).is_zero

    def test_free_plus_quartic(self):
        L = free_scalar() + quartic_interaction()
        assert check_cme(L).is_zero

    def test_yang_mills(self):
        assert check_cme(su2_yang_mills()).is_zero

    def test_gauge_fixed_yang_mills(self):
        L = su2_yang_mills()
        Psi = su2_gauge_fixing_fermion()
        assert Psi.grade() == -1
        assert check_cme(gauge_fix(L, Psi)).is_zero

    def test_gauge_fix_by_zero_is_identity(self):
        L = su2_yang_mills()
        Z = GenLagrangian(JetExpr.const(0, 2), L.content, ())
        assert (gauge_fix(L, Z).density - L.density).is_zero()


class TestClassicalDifferential:
    def test_equation_of_motion(self):
        S0 = free_scalar(omega=1)
        R = Region.interval(0, 1)
        af_g = smeared_field(scalar_content(), "u" + AF_SUFFIX, "g", R)
        q = bv_vector_field(S0, af_g)
        u = JetExpr.of(jet("u", (), 0), 1)
        utt = JetExpr.of(jet("u", (2,), 0), 1)
        g = JetExpr.of(tfn("g"), 1)
        assert (q.density + (utt + u) * g).is_zero()

    def test_nilpotent_on_battery(self):
        # Q_S^2 = 0 modulo total divergences, given the CME
        rng = random.Random(9)
        S = free_scalar() + quartic_interaction()
        R = Region.interval(0, 1)
        content = S.content
        names = ["u", antifield_name("u")]
        from bvfact.bvalg import LocalFunctional
        for _ in range(6):
            dens, _ = rand_density(rng, content, names, "g")
            F = LocalFunctional(dens, R, content)
            QF = bv_vector_field(S, F)
            QQF = bv_vector_field(S, QF)
            assert is_total_divergence(QQF.density)


class TestStructureConstants:
    def test_epsilon_antisymmetry(self):
        assert eps(1, 2, 3) == 1
        assert eps(2, 1, 3) == -1
        assert eps(1, 1, 2) == 0

    def test_jacobi_identity(self):
        # sum_k (e_ijk e_klm + e_jlk e_kim + e_lik e_kjm) = 0
        for i in range(1, 4):
            for j in range(1, 4):
                for l in range(1, 4):
                    for m in range(1, 4):
                        tot = sum(eps(i, j, k) * eps(k, l, m) +
                                  eps(j, l, k) * eps(k, i, m) +
                                  eps(l, i, k) * eps(k, j, m)
                                  for k in range(1, 4))
                        assert tot == 0
