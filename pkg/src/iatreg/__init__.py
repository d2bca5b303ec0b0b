"""Iterated Arnoldi-Tikhonov regularization for large ill-posed systems."""

__version__ = "0.1.0"

from .operator import DenseOperator, IdentityOperator, LinearOperator, as_operator
from .krylov import ArnoldiDecomposition, arnoldi
from .spectral import HessenbergSVD, d_metric, decompose, estimate_h, projector_residual_norm
from .selection import (
    RuleInapplicable,
    SelectionResult,
    SelectionRule,
    discrepancy_phi,
    rhs_for,
    select_alpha,
)
from .solver import (
    IatSolution,
    ProjectedProblem,
    iat_solve,
    it_filter_coeffs,
    it_recurrence_coeffs,
)
from .problems import (
    NoisyInstance,
    TestProblem,
    add_noise,
    make_blur,
    make_phillips,
    make_problem,
    make_shaw,
    relative_error,
)
from .estimator import IteratedArnoldiTikhonov

__all__ = [
    "ArnoldiDecomposition",
    "DenseOperator",
    "HessenbergSVD",
    "IatSolution",
    "IdentityOperator",
    "IteratedArnoldiTikhonov",
    "LinearOperator",
    "NoisyInstance",
    "ProjectedProblem",
    "RuleInapplicable",
    "SelectionResult",
    "SelectionRule",
    "TestProblem",
    "add_noise",
    "arnoldi",
    "as_operator",
    "d_metric",
    "decompose",
    "discrepancy_phi",
    "estimate_h",
    "iat_solve",
    "it_filter_coeffs",
    "it_recurrence_coeffs",
    "make_blur",
    "make_phillips",
    "make_problem",
    "make_shaw",
    "projector_residual_norm",
    "relative_error",
    "rhs_for",
    "select_alpha",
]
