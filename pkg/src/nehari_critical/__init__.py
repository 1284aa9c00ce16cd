"""Least-energy solutions of critical Schrodinger systems with grouped
mixed couplings on a ball in R^4.

Submodules:

* :mod:`algebra` - decompositions, coupling matrices, f_max, dominance tests
* :mod:`bubbles` - Aubin-Talenti bubbles, levels l_h, overlap integrals
* :mod:`discretization` - conforming radial P1 grid, lambda_1, Sobolev quotient
* :mod:`functional` - norms, energy, gradient, group Gram matrix, Nehari residuals
* :mod:`nehari` - Nehari projection and constrained minimization
* :mod:`estimates` - thresholds, cutoff-bubble competitors, hypothesis checks
* :mod:`cli` - batch front end
"""

from . import algebra, bubbles, discretization, estimates, functional, nehari
from .errors import HypothesisError, NehariError, NumericalError
from .functional import ProblemSpec

__version__ = "0.1.0"

__all__ = [
    "algebra",
    "bubbles",
    "discretization",
    "estimates",
    "functional",
    "nehari",
    "HypothesisError",
    "NehariError",
    "NumericalError",
    "ProblemSpec",
]
