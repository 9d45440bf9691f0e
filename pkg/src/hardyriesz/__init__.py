"""Numerical toolkit for semigroup kernels, Riesz transforms, admissible
coverings, atomic decompositions and Hardy-norm equivalence checks on
Euclidean product domains."""

__version__ = "0.1.0"
