"""Transient SI epidemics on graphs.

Closed-form upper bounds on the mean-field SI dynamics, exact stochastic
simulation, reliability quantities (hazards, survival, residual life), and
targeted vaccination policies.
"""
from ._backend import NAME as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
