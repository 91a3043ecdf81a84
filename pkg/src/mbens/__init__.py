"""Muttalib-Borodin ensembles with classical weights.

Normalisations, biorthogonal polynomials and norms, correlation kernels
and a Metropolis sampler for the Laguerre, Jacobi and Jacobi-prime weights
on the half-line and their even full-line counterparts.
"""

from .biortho import MonicPoly, NormSequence, biortho_poly, h_k, p_poly, q_poly
from .kernel import KernelSpec, build_kernel, correlation, kernel_eval, kernel_trace, verify_biortho
from .norms import selberg, z_ensemble, z_mb, z_mb_fullline
from .sampler import linear_statistic, log_target, run_chain
from .specfun import DomainError, SignedLogReal, gamma_ratio, log_gamma
from .weights import (
    EnsembleSpec,
    GenCauchy,
    GenGaussian,
    GenSymJacobi,
    Jacobi,
    JacobiPrime,
    Laguerre,
)

__version__ = "0.1.0"

__all__ = [
    "MonicPoly",
    "NormSequence",
    "biortho_poly",
    "h_k",
    "p_poly",
    "q_poly",
    "KernelSpec",
    "build_kernel",
    "correlation",
    "kernel_eval",
    "kernel_trace",
    "verify_biortho",
    "selberg",
    "z_ensemble",
    "z_mb",
    "z_mb_fullline",
    "linear_statistic",
    "log_target",
    "run_chain",
    "DomainError",
    "SignedLogReal",
    "gamma_ratio",
    "log_gamma",
    "EnsembleSpec",
    "GenCauchy",
    "GenGaussian",
    "GenSymJacobi",
    "Jacobi",
    "JacobiPrime",
    "Laguerre",
]
