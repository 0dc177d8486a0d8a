"""The free quantum oscillator: propagators, the star product, and causal
factorization.

All six two-point kernels of the omega = 1 oscillator are linear
combinations of each other; the Wightman function weights the star product
and the Feynman propagator weights time ordering.  When two observables
have causally ordered supports the time-ordered product collapses to the
star product -- the seed of the causal construction of interacting fields.
"""

from fractions import Fraction

from bvfact.freeq import (OscillatorModel, green, green_defect, field_obs,
                          star, tprod, peierls, eval_poly, causal_check)
from bvfact.region import mollifier
from bvfact.numfields import Poly1D, Harmonic1D

model = OscillatorModel(omega=1)

print("kernels at tau = 0.7:")
for kind in ("retarded", "advanced", "pauli-jordan", "wightman",
             "symmetric", "feynman"):
    print("  %-12s %s" % (kind, green(model, kind).value(0.7)))

f = mollifier(Fraction(1, 2), Fraction(1, 2))    # support (0, 1)
g = mollifier(Fraction(5, 2), Fraction(1, 2))    # support (2, 3)
print("weak Green defect of the retarded propagator:",
      green_defect(model, f, mollifier(Fraction(1, 2), Fraction(1, 4))))

# the star commutator is i*hbar times the Peierls bracket
Ff, Gg = field_obs(f), field_obs(g)
comm = eval_poly(star(Ff, Gg) - star(Gg, Ff), model, {"u": Poly1D([1.0])})
pb = eval_poly(peierls(Ff, Gg), model, {"u": Poly1D([1.0])})
print("star commutator (hbar^1):", comm[(1, 0)])
print("i * Peierls bracket:     ", 1j * pb[(0, 0)])

# causal factorization: supp g is entirely later than the early bump
later = field_obs(g, power=2)
earlier = field_obs(mollifier(Fraction(1, 2), Fraction(1, 4)), power=2)
fields = [{"u": Poly1D([0.7, 0.3])}, {"u": Harmonic1D(1.0, 0.5, 0.2)}]
print("T(later, earlier) vs star:",
      causal_check(later, earlier, model, fields))
print("T(earlier, later) vs star (flipped):",
      causal_check(earlier, later, model, fields))
