"""Closed-form sampled fields for numeric evaluation of functionals.

A field sample is any object with ``jet(pt, mu) -> float`` returning the
partial derivative of multi-index mu at the point (pt is a scalar in dim 1,
a tuple in dim 2).
"""

from __future__ import annotations

import math

import numpy as np


class Poly1D:
    """Polynomial field sum c_k t^k."""

    def __init__(self, coeffs):
        self.coeffs = [float(c) for c in coeffs]

    def jet(self, t, mu):
        k = mu[0] if mu else 0
        t = float(t)
        out = 0.0
        for j, c in enumerate(self.coeffs):
            if j >= k:
                out += c * math.perm(j, k) * t ** (j - k)
        return out


class Harmonic1D:
    """a*cos(w t) + b*sin(w t)."""

    def __init__(self, a=1.0, b=0.0, w=1.0):
        self.a, self.b, self.w = float(a), float(b), float(w)

    def jet(self, t, mu):
        k = mu[0] if mu else 0
        a, b = self.a, self.b
        for _ in range(k):
            a, b = b * self.w, -a * self.w
        return a * math.cos(self.w * t) + b * math.sin(self.w * t)


class Gaussian1D:
    """a*exp(-s(t-c)^2), derivatives via Hermite recursion."""

    def __init__(self, a=1.0, s=1.0, c=0.0):
        self.a, self.s, self.c = float(a), float(s), float(c)

    def jet(self, t, mu):
        k = mu[0] if mu else 0
        x = float(t) - self.c
        # derivative polynomials: p_{k+1} = p_k' - 2 s x p_k
        p = [self.a]
        for _ in range(k):
            q = [0.0] * (len(p) + 1)
            for j, c in enumerate(p):
                if j >= 1:
                    q[j - 1] += j * c
                q[j + 1] += -2 * self.s * c
            p = q
        val = sum(c * x ** j for j, c in enumerate(p))
        return val * math.exp(-self.s * x * x)


class BumpField:
    """Adapter: a region.Bump used as a dim-1 field sample."""

    def __init__(self, bump):
        self.bump = bump

    def jet(self, t, mu):
        k = mu[0] if mu else 0
        return self.bump.deriv(t, k)


class Separable2D:
    """Product f(t) g(x) of two dim-1 samples."""

    def __init__(self, f, g):
        self.f, self.g = f, g

    def jet(self, pt, mu):
        t, x = pt
        mu = tuple(mu) + (0, 0)
        return self.f.jet(t, (mu[0],)) * self.g.jet(x, (mu[1],))


class Sum2D:
    def __init__(self, *parts):
        self.parts = parts

    def jet(self, pt, mu):
        return sum(p.jet(pt, mu) for p in self.parts)


def zero_field():
    return Poly1D([])
