"""Numerical lab for one-dimensional thermoviscoelastic phase-transition dynamics
with capillarity: traveling-wave backgrounds, an IMEX perturbation solver,
energy monitoring and decay analysis."""

__version__ = "0.1.0"
