"""Verification engine for the complex-particle model: charts, the
Laplace-Beltrami operator, its spectrum, classical dynamics, the constraint
algebra and its operator realization."""

__version__ = "0.1.0"
