"""Jet-space calculus: total derivatives, the form complex, Euler-Lagrange
operators, divergence primitives, and local-functional evaluation."""

import random
from fractions import Fraction

import pytest

from bvfact.symexpr import Expr, QI
from bvfact.jetcalc import (jet, JetExpr, LagForm, total_derivative,
                            horizontal_diff, euler_lagrange,
                            euler_lagrange_density, is_total_divergence,
                            homotopy_primitive, NotClosedError,
                            ExactnessDefect, evaluate_local, parse_jetexpr,
                            jetexpr_to_text)
from bvfact.region import mollifier
from bvfact.numfields import Poly1D


def random_jetexpr(rng, dim=1, nterm=3, maxdeg=3, maxord=2, grades=None):
    names = list(grades or {"u": 0, "v": 0})
    e = Expr.zero()
    for _ in range(nterm):
        coeff = QI(Fraction(rng.randint(-4, 4)), Fraction(rng.randint(-2, 2)))
        m = Expr.const(coeff)
        for _ in range(rng.randint(1, maxdeg)):
            nm = rng.choice(names)
            counts = [rng.randint(0, maxord) for _ in range(dim)]
            while counts and counts[-1] == 0:
                counts.pop()
            m = m * Expr.sym(jet(nm, tuple(counts),
                                 (grades or {}).get(nm, 0)))
        e = e + m
    return JetExpr(e, dim)


class TestTotalDerivative:
    def test_leibniz_even(self):
        rng = random.Random(0)
        for _ in range(20):
            f = random_jetexpr(rng)
            g = random_jetexpr(rng)
            lhs = total_derivative(f * g, 0)
            rhs = total_derivative(f, 0) * g + f * total_derivative(g, 0)
            assert (lhs - rhs).is_zero()

    def test_leibniz_odd(self):
        c1 = JetExpr.of(jet("c1", (), -1), 1)
        c2 = JetExpr.of(jet("c2", (), -1), 1)
        lhs = total_derivative(c1 * c2, 0)
        rhs = total_derivative(c1, 0) * c2 + c1 * total_derivative(c2, 0)
        assert (lhs - rhs).is_zero()

    def test_commutativity_dim2(self):
        rng = random.Random(1)
        for _ in range(30):
            f = random_jetexpr(rng, dim=2)
            a = total_derivative(total_derivative(f, 0), 1)
            b = total_derivative(total_derivative(f, 1), 0)
            assert (a - b).is_zero()


class TestFormComplex:
    def test_d_squared_zero(self):
        rng = random.Random(2)
        for _ in range(30):
            om = LagForm(0, 2, {(): random_jetexpr(rng, dim=2)})
            dd = horizontal_diff(horizontal_diff(om))
            assert dd.is_zero()

    def test_euler_lagrange_kills_divergences(self):
        rng = random.Random(3)
        for _ in range(30):
            f = random_jetexpr(rng)
            div = LagForm.top(total_derivative(f, 0), 1)
            els = euler_lagrange(div)
            assert all(v.is_zero() for v in els.values())

    def test_harmonic_oscillator_equation(self):
        ut = JetExpr.of(jet("u", (1,), 0), 1)
        u = JetExpr.of(jet("u", (), 0), 1)
        L = JetExpr.of(Fraction(1, 2), 1) * (ut * ut - u * u)
        el = euler_lagrange_density(L)[("u", 0)]
        utt = JetExpr.of(jet("u", (2,), 0), 1)
        assert (el + (utt + u)).is_zero()


class TestHomotopyPrimitive:
    def test_primitives_of_divergences(self):
        rng = random.Random(4)
        for _ in range(25):
            f = random_jetexpr(rng, nterm=2, maxdeg=2, grades={"u": 0})
            omega = LagForm.top(total_derivative(f, 0), 1)
            eta, obstruction = homotopy_primitive(omega)
            assert not obstruction
            d_eta = total_derivative(eta.component(()), 0)
            assert (d_eta.expr - omega.component((0,)).expr).is_zero()

    def test_constant_obstruction(self):
        omega = LagForm(0, 1, {(): JetExpr.const(QI(Fraction(5, 2)), 1)})
        eta, obstruction = homotopy_primitive(omega)
        assert obstruction == QI(Fraction(5, 2))
        assert eta.is_zero()

    def test_nonexact_top_form_reports_defect(self):
        u = JetExpr.of(jet("u", (), 0), 1)
        with pytest.raises(ExactnessDefect):
            homotopy_primitive(LagForm.top(u * u, 1))

    def test_nonclosed_rejected(self):
        u = JetExpr.of(jet("u", (), 0), 1)
        with pytest.raises(NotClosedError):
            homotopy_primitive(LagForm(0, 1, {(): u}))


class TestIsTotalDivergence:
    def test_accepts_divergence(self):
        rng = random.Random(5)
        for _ in range(10):
            f = random_jetexpr(rng)
            assert is_total_divergence(total_derivative(f, 0))

    def test_rejects_mass_term(self):
        u = JetExpr.of(jet("u", (), 0), 1)
        assert not is_total_divergence(u * u)


class TestEvaluateLocal:
    def test_polynomial_oracle(self):
        # int (u^2 + u') w with u(t) = t on supp w = (0,1)
        from scipy.integrate import quad
        u = JetExpr.of(jet("u", (), 0), 1)
        ut = JetExpr.of(jet("u", (1,), 0), 1)
        w = mollifier(Fraction(1, 2), Fraction(1, 2))
        got = evaluate_local(LagForm.top(u * u + ut, 1), w,
                             {"u": Poly1D([0.0, 1.0])})
        want, _ = quad(lambda t: (t * t + 1) * w(t), 0, 1,
                       epsabs=1e-12, epsrel=1e-12)
        assert abs(got - want) < 1e-10


class TestTextRoundtrip:
    def test_parse_and_print(self):
        for text in ("u^2 + u.d[1]", "1/2*u*u.d[1] - u", "u*v - v*u"):
            je = parse_jetexpr(text)
            je2 = parse_jetexpr(jetexpr_to_text(je))
            assert (je - je2).is_zero()
