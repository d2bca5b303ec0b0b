"""Iterated Arnoldi-Tikhonov solves.

The iterate after ``i`` iterated-Tikhonov steps on the projected problem
``min ||H z - V^T y||`` is written in the right singular basis of ``H`` as

    z = S c,   c_j = (1 - (alpha / (sigma_j^2 + alpha))^i) * (U^T y)_j / sigma_j,

and lifted to the full space by ``x = V_m z``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._validation import check_positive_float, check_positive_int, check_vector
from .krylov import arnoldi
from .operator import as_operator
from .selection import (
    SelectionRule,
    discrepancy_phi,
    rhs_for,
    select_alpha,
)
from .spectral import (
    DEFAULT_H_ITERS,
    DEFAULT_H_SAFETY,
    DEFAULT_H_SEED,
    DEFAULT_RANK_TOL,
    decompose,
    estimate_h,
)

__all__ = [
    "IatSolution",
    "ProjectedProblem",
    "it_filter_coeffs",
    "it_recurrence_coeffs",
    "iat_solve",
]


def it_filter_coeffs(sigma, uty, alpha, i):
    """Iterated-Tikhonov coefficients in the right singular basis.

    Parameters
    ----------
    sigma : array_like, (m,)
        Singular values; zero entries get a zero coefficient.
    uty : array_like, (>= m,)
        ``U^T y``; only the first ``m`` entries are used.
    alpha : float
    i : int

    Returns
    -------
    ndarray, (m,)
    """
    alpha = check_positive_float(alpha, "alpha")
    i = check_positive_int(i, "i")
    sigma = np.asarray(sigma, dtype=np.float64)
    uty = np.asarray(uty, dtype=np.float64)[: sigma.shape[0]]
    c = np.zeros_like(sigma)
    pos = sigma > 0
    s = sigma[pos]
    # 1 - (alpha/(s^2+alpha))^i without cancellation for s^2 << alpha
    gain = -np.expm1(-i * np.log1p(s**2 / alpha))
    c[pos] = gain * uty[pos] / s
    return c


def it_recurrence_coeffs(H, y_proj, alpha, i):
    """Same iterate as the filter form, by ``i`` explicit Tikhonov steps.

    ``z_k = z_{k-1} + (H^T H + alpha I)^{-1} H^T (y - H z_{k-1})``, ``z_0 = 0``.
    Kept as an independent cross-check of :func:`it_filter_coeffs`.
    """
    alpha = check_positive_float(alpha, "alpha")
    i = check_positive_int(i, "i")
    H = np.asarray(H, dtype=np.float64)
    y_proj = np.asarray(y_proj, dtype=np.float64)
    M = H.T @ H + alpha * np.eye(H.shape[1])
    z = np.zeros(H.shape[1])
    for _ in range(i):
        z = z + np.linalg.solve(M, H.T @ (y_proj - H @ z))
    return z


@dataclass
class IatSolution:
    z: np.ndarray
    x: np.ndarray
    alpha: float
    iterations: int
    ell: int
    rule_used: str
    diagnostics: dict = field(default_factory=dict)


class ProjectedProblem:
    """Arnoldi projection of ``T x = y_delta`` shared across many solves.

    The decomposition and its SVD do not depend on ``alpha`` or ``i``, so a
    single instance serves a whole parameter sweep.  Instances are not
    mutated after construction apart from the lazily cached ``h``.
    """

    def __init__(self, op, y_delta, ell, breakdown_tol=1e-12, rank_tol=DEFAULT_RANK_TOL):
        self.op = as_operator(op)
        self.y_delta = check_vector(y_delta, self.op.n, "y_delta")
        self.ell = check_positive_int(ell, "ell")
        self.decomposition = arnoldi(self.op, self.y_delta, self.ell, breakdown_tol)
        self.y_proj = self.decomposition.project(self.y_delta)
        self.svd = decompose(self.decomposition.H, self.y_proj, rank_tol)

    @cached_property
    def h(self):
        """Default-parameter truncation-gap bound, computed once."""
        return self.estimate_h()

    def estimate_h(self, iters=DEFAULT_H_ITERS, safety=DEFAULT_H_SAFETY, seed=DEFAULT_H_SEED):
        return estimate_h(self.op, self.decomposition, iters, safety, seed)

    def coefficients(self, alpha, i):
        c = it_filter_coeffs(self.svd.sigma, self.svd.uty, alpha, i)
        c[self.svd.q :] = 0.0
        return self.svd.S @ c

    def select(self, rule, i, delta):
        """Solve the discrepancy equation for ``rule`` (a :class:`SelectionRule`)."""
        return select_alpha(self.svd, i, rhs_for(rule, delta), rule=rule.kind)

    def solve(self, alpha, i, rule_used="manual", **diagnostics):
        z = self.coefficients(alpha, i)
        x = self.decomposition.basis @ z
        diag = {"q": self.svd.q, "phi": discrepancy_phi(self.svd, i, alpha)}
        diag.update(diagnostics)
        return IatSolution(z, x, float(alpha), int(i), self.decomposition.m, rule_used, diag)


def iat_solve(op, y_delta, ell, i, alpha=None, rule=None, delta=None, tau=1.0,
              x_true_norm=None, h_ell=None, breakdown_tol=1e-12,
              rank_tol=DEFAULT_RANK_TOL):
    """Iterated Arnoldi-Tikhonov solution of ``T x = y_delta``.

    Exactly one of ``alpha`` (manual parameter) or ``rule`` must be given.

    Parameters
    ----------
    op : LinearOperator or array_like
    y_delta : array_like, (n,)
    ell : int
        Number of Arnoldi steps.
    i : int
        Number of iterated-Tikhonov steps.
    alpha : float, optional
    rule : {"R1", "R2"} or SelectionRule, optional
    delta : float, optional
        Noise norm ``||y - y_delta||``; required in rule mode.
    tau : float
        Safety factor of rule R1.
    x_true_norm : float, optional
        Norm of the sought solution; required by rule R2.
    h_ell : float, optional
        Bound on the truncation gap for R2; estimated when omitted.

    Returns
    -------
    IatSolution

    Raises
    ------
    RuleInapplicable
        If the selected rule has no positive root.
    """
    if (alpha is None) == (rule is None):
        raise ValueError("give exactly one of alpha or rule")
    i = check_positive_int(i, "i")
    y_delta = check_vector(y_delta, name="y_delta")
    if not np.any(y_delta):
        raise ValueError("y_delta must be nonzero")
    proj = ProjectedProblem(op, y_delta, ell, breakdown_tol, rank_tol)
    if alpha is not None:
        return proj.solve(check_positive_float(alpha, "alpha"), i)

    if delta is None or delta <= 0:
        raise ValueError("rule-based selection needs a positive noise norm delta")
    if not isinstance(rule, SelectionRule):
        if rule == "R2" and h_ell is None:
            h_ell = proj.h
        rule = SelectionRule(rule, tau=tau, x_true_norm=x_true_norm, h_ell=h_ell)
    sel = proj.select(rule, i, delta)
    return proj.solve(
        sel.alpha, i, rule_used=rule.kind, rhs=sel.rhs, residual=sel.residual,
        h_ell=rule.h_ell,
    )
