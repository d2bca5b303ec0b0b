"""scikit-learn style estimator wrapping the iterated Arnoldi-Tikhonov solve.

The operator plays the role of the design matrix: ``fit(T, y_delta)``
computes a regularized solution of ``T x = y_delta`` and stores it in
``coef_``, and ``predict(T)`` returns ``T @ coef_``.  ``T`` may be a
square array or any :class:`~iatreg.operator.LinearOperator`.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive_float, check_positive_int, check_vector
from .operator import as_operator
from .selection import RULES, SelectionRule
from .solver import ProjectedProblem


class IteratedArnoldiTikhonov(RegressorMixin, BaseEstimator):
    """Iterated Tikhonov regularization on an Arnoldi-projected problem.

    Parameters
    ----------
    n_steps : int, default=10
        Number of Arnoldi steps (Krylov dimension).
    n_iter : int, default=1
        Number of iterated-Tikhonov steps; 1 is standard Tikhonov.
    alpha : float or None, default=None
        Fixed regularization parameter. When None, ``rule`` selects it.
    rule : {"R1", "R2"}, default="R1"
        Discrepancy-type parameter rule used when ``alpha`` is None. R1
        targets ``tau * noise_level**2``; R2 targets ``(x_norm * h +
        noise_level)**2`` with ``h`` a bound on the Krylov truncation gap.
    noise_level : float or None
        Noise norm ``||y - y_delta||``; required when ``alpha`` is None.
    tau : float, default=1.0
    x_norm : float or None
        Norm of the sought solution, needed by R2.
    h_bound : float or None
        Truncation-gap bound for R2; estimated by power iteration if None.
    breakdown_tol, rank_tol : float
        Relative tolerances for Arnoldi breakdown and numerical rank.

    Attributes
    ----------
    coef_ : ndarray of shape (n,)
        Regularized solution.
    alpha_ : float
    n_steps_ : int
        Completed Arnoldi steps (smaller than ``n_steps`` on breakdown).
    breakdown_ : bool
    selection_ : SelectionResult or None
    h_ : float or None
        Truncation-gap bound used by R2.
    projection_ : ProjectedProblem
    n_features_in_ : int
    """

    def __init__(self, n_steps=10, n_iter=1, alpha=None, rule="R1", noise_level=None,
                 tau=1.0, x_norm=None, h_bound=None, breakdown_tol=1e-12, rank_tol=1e-12):
        self.n_steps = n_steps
        self.n_iter = n_iter
        self.alpha = alpha
        self.rule = rule
        self.noise_level = noise_level
        self.tau = tau
        self.x_norm = x_norm
        self.h_bound = h_bound
        self.breakdown_tol = breakdown_tol
        self.rank_tol = rank_tol

    def fit(self, X, y):
        op = as_operator(X)
        y = check_vector(y, op.n, "y")
        if not np.any(y):
            raise ValueError("y must be nonzero")
        n_steps = check_positive_int(self.n_steps, "n_steps")
        n_iter = check_positive_int(self.n_iter, "n_iter")

        proj = ProjectedProblem(op, y, n_steps, self.breakdown_tol, self.rank_tol)
        self.selection_ = None
        self.h_ = None
        if self.alpha is not None:
            alpha = check_positive_float(self.alpha, "alpha")
        else:
            if self.rule not in RULES:
                raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")
            if self.noise_level is None:
                raise ValueError("noise_level is required when alpha is None")
            delta = check_positive_float(self.noise_level, "noise_level")
            if self.rule == "R2":
                if self.x_norm is None:
                    raise ValueError("rule R2 requires x_norm")
                self.h_ = proj.h if self.h_bound is None else float(self.h_bound)
                rule = SelectionRule("R2", self.tau, self.x_norm, self.h_)
            else:
                rule = SelectionRule("R1", self.tau)
            self.selection_ = proj.select(rule, n_iter, delta)
            alpha = self.selection_.alpha

        sol = proj.solve(alpha, n_iter)
        self.coef_ = sol.x
        self.alpha_ = sol.alpha
        self.n_steps_ = proj.decomposition.m
        self.breakdown_ = proj.decomposition.breakdown
        self.projection_ = proj
        self.n_features_in_ = op.n
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        op = as_operator(X)
        if op.n != self.n_features_in_:
            raise ValueError(
                f"operator has dimension {op.n}, estimator was fitted with {self.n_features_in_}"
            )
        return op.apply(self.coef_)

    def discrepancy(self, X, y):
        """Residual norm ``||X coef_ - y||``."""
        return float(np.linalg.norm(self.predict(X) - check_vector(y, self.n_features_in_, "y")))
