"""Symbolic-numeric kernel for perturbative BV field theory on flat models:
jet-space variational calculus, antibracket/master equations, region algebra
with Weiss covers, multilocal observables, free-theory star and time-ordered
products, Epstein-Glaser extension, and the quantum BV layer."""

__version__ = "0.1.0"
