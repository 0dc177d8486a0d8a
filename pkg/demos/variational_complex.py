"""Jets, Euler-Lagrange operators, and exact divergences.

A Lagrangian density is a polynomial in a field's jet (its derivatives up to
some finite order).  This script builds the harmonic-oscillator density,
derives its equation of motion, and then shows that total derivatives are
invisible to the Euler-Lagrange operator -- and can be integrated back up
exactly with the homotopy primitive.
"""

from fractions import Fraction

from bvfact.jetcalc import (jet, JetExpr, LagForm, total_derivative,
                            euler_lagrange_density, homotopy_primitive,
                            jetexpr_to_text)

# the oscillator density L = (u'^2 - u^2) / 2
u = JetExpr.of(jet("u", (), 0), 1)
ut = JetExpr.of(jet("u", (1,), 0), 1)
L = JetExpr.of(Fraction(1, 2), 1) * (ut * ut - u * u)
print("density:      ", jetexpr_to_text(L))

el = euler_lagrange_density(L)[("u", 0)]
print("EL derivative:", jetexpr_to_text(el), "   (= -(u'' + u))")

# a total derivative has vanishing EL derivative ...
f = u * u * ut
div = total_derivative(f, 0)
el_div = euler_lagrange_density(div)[("u", 0)]
print("E(D_t[u^2 u']) =", jetexpr_to_text(el_div) or "0")

# ... and the homotopy primitive recovers an antiderivative exactly
eta, obstruction = homotopy_primitive(LagForm.top(div, 1))
print("primitive of the divergence:", jetexpr_to_text(eta.component(())))
print("obstruction:", obstruction)

# constants are the one obstruction to exactness on a star-shaped domain
const = LagForm(0, 1, {(): JetExpr.const(Fraction(3, 4), 1)})
_, obs = homotopy_primitive(const)
print("constant form obstruction:", obs)
