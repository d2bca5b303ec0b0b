"""Discrepancy-type choice of the regularization parameter.

For ``i`` iterated-Tikhonov steps the projected discrepancy function is

    phi(alpha) = sum_j y_hat_j^2 * (alpha / (sigma_j^2 + alpha))^(2i+1),

summed over the ``q`` nonzero singular values.  It increases strictly
from 0 (``alpha -> 0``) to ``||y_hat||^2`` (``alpha -> inf``), so
``phi(alpha) = rhs`` has a unique root whenever ``0 < rhs < ||y_hat||^2``.

Two right-hand sides are supported:

* ``R1``: ``tau * delta^2``;
* ``R2``: ``(||x_true|| * h + delta)^2``, where ``h`` bounds the
  Krylov truncation gap ``||T - T V V^T||``.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_positive_float, check_positive_int

__all__ = [
    "RULES",
    "RuleInapplicable",
    "SelectionRule",
    "SelectionResult",
    "discrepancy_phi",
    "select_alpha",
    "rhs_for",
]

RULES = ("R1", "R2")

_MAX_EXPANSIONS = 600
_MAX_BISECTIONS = 200
_RESIDUAL_RTOL = 1e-10


class RuleInapplicable(ValueError):
    """The parameter equation has no positive root.

    Attributes
    ----------
    reason : str
        Machine-readable code, ``rhs_exceeds_projection`` or ``zero_rank``.
    rhs, y_hat_norm2 : float
    """

    def __init__(self, reason, rhs, y_hat_norm2, rule=None):
        self.reason = reason
        self.rhs = float(rhs)
        self.y_hat_norm2 = float(y_hat_norm2)
        self.rule = rule
        super().__init__(
            f"{rule or 'rule'} inapplicable ({reason}): rhs={self.rhs:.6e}, "
            f"||y_hat||^2={self.y_hat_norm2:.6e}"
        )


@dataclass(frozen=True)
class SelectionRule:
    kind: str = "R1"
    tau: float = 1.0
    x_true_norm: float = None
    h_ell: float = None

    def __post_init__(self):
        if self.kind not in RULES:
            raise ValueError(f"unknown rule {self.kind!r}; expected one of {RULES}")
        check_positive_float(self.tau, "tau")
        if self.kind == "R2":
            if self.x_true_norm is None or self.h_ell is None:
                raise ValueError("rule R2 needs x_true_norm and h_ell")
            check_positive_float(self.x_true_norm, "x_true_norm")
            check_positive_float(self.h_ell, "h_ell", allow_zero=True)


@dataclass(frozen=True)
class SelectionResult:
    alpha: float
    rhs: float
    residual: float
    bracket: tuple
    iterations: int


def rhs_for(rule, delta):
    """Target value of the discrepancy equation for ``rule``."""
    delta = check_positive_float(delta, "delta")
    if rule.kind == "R1":
        return rule.tau * delta**2
    return (rule.x_true_norm * rule.h_ell + delta) ** 2


def _damping(sigma, alpha, power):
    # (alpha / (sigma^2 + alpha))^power, stable for tiny sigma^2 / alpha.
    return np.exp(-power * np.log1p(sigma**2 / alpha))


def discrepancy_phi(svd, i, alpha):
    """Evaluate the projected discrepancy function at ``alpha``."""
    i = check_positive_int(i, "i")
    alpha = check_positive_float(alpha, "alpha")
    q = svd.q
    if q == 0:
        return 0.0
    yh = svd.y_hat[:q]
    return float(np.sum(yh**2 * _damping(svd.sigma[:q], alpha, 2 * i + 1)))


def select_alpha(svd, i, rhs, rule=None):
    """Solve ``discrepancy_phi(svd, i, alpha) == rhs`` for ``alpha > 0``.

    The root is bracketed by stepping a factor 10 at a time from
    ``sigma_1^2``, then refined by bisection on ``log(alpha)`` until
    ``|phi(alpha) - rhs| <= 1e-10 * rhs`` or the bracket can no longer be
    split in floating point.

    Raises
    ------
    RuleInapplicable
        If ``q == 0`` or ``rhs >= ||y_hat||^2`` (the root would sit at
        infinity).
    ValueError
        If ``rhs <= 0``.
    """
    i = check_positive_int(i, "i")
    rhs = float(rhs)
    if not rhs > 0.0 or not math.isfinite(rhs):
        raise ValueError(f"rhs must be positive and finite, got {rhs}")
    sup = svd.y_hat_norm2
    if svd.q == 0:
        raise RuleInapplicable("zero_rank", rhs, sup, rule)
    if rhs >= sup:
        raise RuleInapplicable("rhs_exceeds_projection", rhs, sup, rule)

    def f(log_alpha):
        return discrepancy_phi(svd, i, math.exp(log_alpha)) - rhs

    tol = _RESIDUAL_RTOL * rhs
    x0 = math.log(svd.sigma[0] ** 2)
    step = math.log(10.0)
    lo = hi = x0
    f0 = f(x0)
    its = 0
    if abs(f0) <= tol:
        a = math.exp(x0)
        return SelectionResult(a, rhs, abs(f0), (a, a), 0)
    if f0 < 0:
        while True:
            lo, hi = hi, hi + step
            its += 1
            if f(hi) >= 0:
                break
            if its >= _MAX_EXPANSIONS:
                raise RuntimeError("failed to bracket the root from below")
    else:
        while True:
            hi, lo = lo, lo - step
            its += 1
            if f(lo) <= 0:
                break
            if its >= _MAX_EXPANSIONS:
                raise RuntimeError("failed to bracket the root from above")

    flo, fhi = f(lo), f(hi)
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break  # bracket exhausted at floating-point resolution
        fm = f(mid)
        its += 1
        if abs(fm) <= tol:
            a = math.exp(mid)
            return SelectionResult(a, rhs, abs(fm), (math.exp(lo), math.exp(hi)), its)
        if fm < 0:
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    best, res = (lo, -flo) if -flo <= fhi else (hi, fhi)
    return SelectionResult(math.exp(best), rhs, res, (math.exp(lo), math.exp(hi)), its)
