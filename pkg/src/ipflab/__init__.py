"""Numerical laboratory for entropy path functionals of controlled
diffusions, extremal-segment optimal control, eigenvalue cooperation
chains, and the hierarchical information network they generate."""

from . import (control, diagnostics, diffusion, eigenchain, entropy, errors,
               identification, invariants, network)

__version__ = "0.1.0"

__all__ = ["control", "diagnostics", "diffusion", "eigenchain", "entropy",
           "errors", "identification", "invariants", "network"]
