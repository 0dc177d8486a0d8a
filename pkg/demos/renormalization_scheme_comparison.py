"""Extending singular kernels and comparing renormalization schemes.

theta(x)/x is not integrable against test functions supported at the
origin; its scaling degree (here 1) says exactly how many subtractions are
needed, and how large the ambiguity of the extension is (delta derivatives
of order < sd - dim + 1).  Two renormalized time-ordering schemes differ by
a counterterm, and the scheme-comparison machinery recovers the injected
coefficient numerically.
"""

import math
from fractions import Fraction

from bvfact.egren import (theta_power, smooth_kernel, scaling_degree,
                          ambiguity_basis, extend, TimeOrder2,
                          main_theorem_check, recover_delta_coefficient)
from bvfact.freeq import OscillatorModel, field_obs
from bvfact.region import mollifier
from bvfact.numfields import Poly1D

for k, label in ((theta_power(1), "theta(x)/x"),
                 (theta_power(2), "theta(x)/x^2"),
                 (smooth_kernel(lambda x: math.exp(-x * x)), "exp(-x^2)")):
    print("%-14s scaling degree %s, ambiguity basis %s"
          % (label, scaling_degree(k, exact=False), ambiguity_basis(k)))

f = mollifier(0, Fraction(1, 2))
print("extension of theta(x)/x paired with a bump at 0:",
      extend(theta_power(1)).pair(f))

# two schemes differing by 0.37 * delta at the single-contraction kernel
model = OscillatorModel(omega=1)
T = TimeOrder2(model)
T2 = TimeOrder2(model, shifts={1: 0.37})
battery = [field_obs(mollifier(Fraction(c), Fraction(1, 4)), power=p)
           for c, p in [(-2, 1), (0, 2), (2, 1), (0, 1)]]
Z, report = main_theorem_check(T, T2, battery,
                               fields=[{"u": Poly1D([0.4, 0.15, -0.1])}])
print("scheme comparison report:")
for key, val in sorted(report.items()):
    print("  %-28s %s" % (key, val))

c_hat = recover_delta_coefficient(T, T2, mollifier(0, Fraction(1, 2)),
                                  mollifier(Fraction(1, 4), Fraction(1, 4)))
print("recovered counterterm coefficient: %.12f (injected 0.37)"
      % abs(c_hat))
