"""Experience rating of insurance claim counts under mixed Poisson models.

Two mixing laws for the latent claim intensity are supported: the classical
gamma (negative binomial counts) and the heavy-tailed inverse gamma
(Bessel-K counts with a power-law tail).
"""

from .core import ConvergenceError, DomainError, MomentSummary
from .poisson import PoissonParams
from .poisson_gamma import GammaMixParams
from .poisson_inv_gamma import InvGammaMixParams

__all__ = [
    "ConvergenceError",
    "DomainError",
    "GammaMixParams",
    "InvGammaMixParams",
    "MomentSummary",
    "PoissonParams",
]
