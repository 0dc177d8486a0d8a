"""Distribution extension at desk scale: scaling degrees, subtraction-based
extensions, renormalization schemes for the two-fold time-ordered product,
and the scheme-comparison group."""

import math
import warnings
from fractions import Fraction

import pytest

from bvfact.egren import (DistKernel, theta_power, smooth_kernel,
                          feynman_power, scaling_degree, ambiguity_basis,
                          standard_cutoff, ExtendedDist, extend,
                          TimeOrder2, t2_build, tn_build, RGElement,
                          main_theorem_check, recover_delta_coefficient)
from bvfact.freeq import OscillatorModel, field_obs, tprod, eval_poly
from bvfact.region import mollifier
from bvfact.numfields import Poly1D

MODEL = OscillatorModel(omega=1)


class TestScalingDegree:
    def test_declared_values(self):
        assert scaling_degree(theta_power(1)) == 1
        assert scaling_degree(theta_power(2)) == 2
        assert scaling_degree(smooth_kernel(lambda x: math.exp(-x * x))) == 0

    def test_measured_values_snap(self):
        for kern, want in ((theta_power(1), 1), (theta_power(2), 2),
                           (smooth_kernel(lambda x: math.exp(-x * x)), 0)):
            assert scaling_degree(kern, exact=False) == Fraction(want)

    def test_feynman_powers(self):
        for m in (1, 2, 3):
            k = feynman_power(MODEL, m)
            assert scaling_degree(k) == 0


class TestAmbiguity:
    def test_dimensions(self):
        assert ambiguity_basis(smooth_kernel(lambda x: 1.0)) == []
        assert ambiguity_basis(theta_power(1)) == [(0,)]
        assert ambiguity_basis(theta_power(2)) == [(0,), (1,)]


class TestExtension:
    def test_subtraction_oracle(self):
        from scipy.integrate import quad
        f = mollifier(0, Fraction(1, 2))
        chi = standard_cutoff()
        val = extend(theta_power(1)).pair(f)
        oracle, _ = quad(lambda x: (f(x) - f(0) * chi(x)) / x, 1e-14, 1.0,
                         epsabs=1e-12, epsrel=1e-12, limit=400, points=[0.5])
        assert abs(val - oracle) < 1e-9

    def test_agrees_away_from_origin(self):
        t1 = theta_power(1)
        g = mollifier(Fraction(3, 2), Fraction(1, 4))
        assert abs(extend(t1).pair(g) - t1.pair(g)) < 1e-12

    def test_extension_preserves_degree(self):
        e = extend(theta_power(1))
        assert scaling_degree(e, exact=False) == 1

    def test_unique_case_ignores_weights(self):
        # subcritical kernels extend uniquely: two weight choices agree
        k = feynman_power(MODEL, 2)
        f = mollifier(0, Fraction(1, 2))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = ExtendedDist(k, weights={(0,): 0.0},
                             chi=standard_cutoff()).pair(f)
            b = ExtendedDist(k, weights={(0,): 5.0},
                             chi=standard_cutoff()).pair(f)
        assert abs(a - b) < 1e-12

    def test_weight_difference_is_delta_combination(self):
        t2 = theta_power(2)
        chi = standard_cutoff()
        f = mollifier(0, Fraction(1, 2))
        A = ExtendedDist(t2, weights={(0,): 2.5, (1,): 1.25}, chi=chi)
        B = ExtendedDist(t2, weights={}, chi=chi)
        diff = A.pair(f) - B.pair(f)
        want = 2.5 * f(0) - 1.25 * f.deriv(0, 1)
        assert abs(diff - want) < 1e-12


class TestTimeOrder2:
    def test_minimal_scheme_is_naive_oracle(self):
        T = TimeOrder2(MODEL)
        f = mollifier(Fraction(1, 2), Fraction(1, 2))
        g = mollifier(Fraction(3, 4), Fraction(1, 4))
        F = field_obs(f, power=2)
        G = field_obs(g, power=2)
        assert T.apply(F, G) == tprod(F, G)

    def test_symmetric(self):
        T = TimeOrder2(MODEL, shifts={1: 0.2})
        F = field_obs(mollifier(0, Fraction(1, 2)))
        G = field_obs(mollifier(Fraction(1, 4), Fraction(1, 4)))
        assert T.apply(F, G) == T.apply(G, F)

    def test_t2_build_dispatch(self):
        F = field_obs(mollifier(0, Fraction(1, 2)), power=2)
        G = field_obs(mollifier(Fraction(1, 4), Fraction(1, 4)), power=2)
        assert t2_build(F, G, None, MODEL) == tprod(F, G)
        assert t2_build(F, G, {1: 0.1}, MODEL) != tprod(F, G)

    def test_tn_induction_contract(self):
        with pytest.raises(NotImplementedError):
            tn_build(3)


class TestRenormalizationGroup:
    SHIFT = 0.37

    def make_schemes(self):
        return TimeOrder2(MODEL), TimeOrder2(MODEL, shifts={1: self.SHIFT})

    def test_main_theorem(self):
        T, T2 = self.make_schemes()
        battery = [field_obs(mollifier(Fraction(c), Fraction(1, 4)), power=p)
                   for c, p in [(-2, 1), (0, 2), (2, 1), (0, 1)]]
        fields = [{"u": Poly1D([0.4, 0.15, -0.1])}]
        Z, rep = main_theorem_check(T, T2, battery, fields=fields, tol=1e-8)
        assert rep["ok"]
        assert rep["z_of_zero_is_zero"]
        assert rep["scheme_transport"]
        assert rep["diagonal_support_dev"] <= 1e-8
        assert rep["hammerstein_dev"] <= 1e-8

    def test_counterterm_recovery(self):
        T, T2 = self.make_schemes()
        f = mollifier(0, Fraction(1, 2))
        g = mollifier(Fraction(1, 4), Fraction(1, 4))
        c_hat = recover_delta_coefficient(T, T2, f, g)
        assert abs(c_hat - self.SHIFT) < 1e-8

    def test_composition_adds_shifts(self):
        a = RGElement.identity()
        T, T2 = self.make_schemes()
        z = RGElement(z2=lambda F, G: T2.apply(F, G) - T.apply(F, G),
                      shifts={1: self.SHIFT})
        comp = z.compose(a)
        assert comp.shifts == {1: self.SHIFT}
        comp2 = z.compose(z)
        assert comp2.shifts == {1: 2 * self.SHIFT}
