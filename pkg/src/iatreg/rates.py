"""Convergence-rate experiments for source-condition solutions.

A solution of the form ``x = (T^T T)^nu w`` is synthesized, noisy data
are generated for a decreasing sequence of noise levels, and for each
level the Krylov dimension is chosen so that the truncation-gap bound
``h`` is comparable to the noise norm.  The slope of ``log(error)``
against ``log(delta)`` is then compared with ``2i / (2i + 1)``.
"""

from dataclasses import dataclass, field
import time

import numpy as np

from ._validation import check_positive_float, check_positive_int, check_vector
from .krylov import ArnoldiDecomposition, arnoldi
from .problems import TestProblem, add_noise, relative_error
from .selection import RuleInapplicable, SelectionRule
from .solver import ProjectedProblem
from .spectral import estimate_h

__all__ = [
    "RateExperimentConfig",
    "RatePoint",
    "RateResult",
    "make_source_solution",
    "source_problem",
    "theoretical_slope",
    "match_ell",
    "measure_rate",
]

# "h comparable to delta" is taken to mean delta / 3 <= h <= 3 delta.
H_MATCH_FACTOR = 3.0


def make_source_solution(op, nu, w):
    """``(T^T T)^nu w`` for integer ``nu`` in {0, 1}."""
    if nu not in (0, 1):
        raise ValueError(f"nu must be 0 or 1, got {nu}")
    w = check_vector(w, op.n, "w")
    if not np.any(w):
        raise ValueError("w must be nonzero")
    if nu == 0:
        return w.copy()
    return op.apply_adjoint(op.apply(w))


def source_problem(problem, nu, rho=1.0):
    """Replace ``problem.x_true`` by a source-condition solution.

    The generator ``w`` is the original true solution rescaled to norm
    ``rho``.
    """
    rho = check_positive_float(rho, "rho")
    w = problem.x_true * (rho / np.linalg.norm(problem.x_true))
    x = make_source_solution(problem.operator, nu, w)
    x.setflags(write=False)
    y = problem.operator.apply(x)
    y.setflags(write=False)
    return TestProblem(problem.operator, x, y, f"{problem.name}-nu{nu}", problem.n)


def theoretical_slope(i):
    return 2.0 * i / (2.0 * i + 1.0)


@dataclass(frozen=True)
class RateExperimentConfig:
    problem: TestProblem
    nu: int = 1
    rho: float = 1.0
    i: int = 1
    deltas: tuple = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
    seed: int = 11
    ell_cap: int = None

    def __post_init__(self):
        if self.nu not in (0, 1):
            raise ValueError(f"nu must be 0 or 1, got {self.nu}")
        check_positive_int(self.i, "i")
        d = np.asarray(self.deltas, dtype=float)
        if d.size == 0 or np.any(d <= 0) or np.any(np.diff(d) >= 0):
            raise ValueError("deltas must be positive and strictly decreasing")


@dataclass
class RatePoint:
    xi: float
    delta: float
    ell: int = None
    h_ell: float = None
    alpha: float = None
    rel_err: float = None
    reason: str = ""
    wall_ms: float = 0.0

    @property
    def ok(self):
        return not self.reason


@dataclass
class RateResult:
    points: list = field(default_factory=list)
    slope_fit: float = float("nan")
    slope_theory: float = float("nan")
    i: int = 1
    nu: int = 1


def match_ell(op, y_delta, delta, cap):
    """Smallest Krylov dimension with ``h <= 3 delta``.

    Returns ``(ell, h, ok)``; ``ok`` is False when no dimension up to
    ``cap`` brings ``h`` below ``3 delta`` or when the first one that does
    overshoots below ``delta / 3``.
    """
    decomp = arnoldi(op, y_delta, cap)
    h = float("inf")
    for ell in range(1, decomp.m + 1):
        prefix = _prefix(decomp, ell)
        h = estimate_h(op, prefix)
        if h <= H_MATCH_FACTOR * delta:
            return ell, h, h >= delta / H_MATCH_FACTOR
    return decomp.m, h, False


def _prefix(decomp, ell):
    # An l-step Arnoldi run is the leading block of any longer run.
    if ell == decomp.m:
        return decomp
    return ArnoldiDecomposition(
        V=decomp.V[:, : ell + 1], H=decomp.H[: ell + 1, :ell],
        requested_steps=ell, completed_steps=ell, breakdown=False,
    )


def measure_rate(cfg):
    """Run the noise sweep of ``cfg`` and fit the empirical rate exponent.

    ``cfg.deltas`` are relative noise levels; the absolute noise norm
    ``delta = xi * ||y||`` is what ``h`` is matched against and what the
    slope is fitted over.
    """
    prob = source_problem(cfg.problem, cfg.nu, cfg.rho)
    cap = cfg.ell_cap or max(1, prob.n // 2)
    rule = SelectionRule("R1")
    points = []
    for xi in cfg.deltas:
        t0 = time.perf_counter()
        noisy = add_noise(prob, xi, cfg.seed)
        pt = RatePoint(xi=float(xi), delta=noisy.delta)
        ell, h, ok = match_ell(prob.operator, noisy.y_delta, noisy.delta, cap)
        pt.ell, pt.h_ell = ell, h
        if not ok:
            pt.reason = "h_ell_unmatched"
        else:
            proj = ProjectedProblem(prob.operator, noisy.y_delta, ell)
            try:
                sel = proj.select(rule, cfg.i, noisy.delta)
            except RuleInapplicable as exc:
                pt.reason = exc.reason
            else:
                pt.alpha = sel.alpha
                pt.rel_err = relative_error(prob.x_true, proj.solve(sel.alpha, cfg.i).x)
        pt.wall_ms = 1e3 * (time.perf_counter() - t0)
        points.append(pt)

    good = [p for p in points if p.ok]
    slope = float("nan")
    if len(good) >= 2:
        slope = float(np.polyfit(np.log([p.delta for p in good]),
                                 np.log([p.rel_err for p in good]), 1)[0])
    return RateResult(points, slope, theoretical_slope(cfg.i), cfg.i, cfg.nu)
