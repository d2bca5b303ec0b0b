"""SVD of the projected Hessenberg matrix and quantities derived from it.

The orthogonal projector onto the range of the Arnoldi approximation
``T V_m V_m^T`` is ``R = V U_q U_q^T V^T``, where ``U_q`` holds the leading
``q`` left singular vectors of ``H``.  It is never formed; every action
goes through ``V`` and ``U``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_float, check_positive_int, check_vector

__all__ = [
    "HessenbergSVD",
    "decompose",
    "projector_residual_norm",
    "estimate_h",
    "deflated_norm_dense",
    "d_metric",
    "gamma_metric_dense",
]

DEFAULT_RANK_TOL = 1e-12
DEFAULT_H_ITERS = 50
DEFAULT_H_SAFETY = 1.05
DEFAULT_H_SEED = 20240415


@dataclass(frozen=True)
class HessenbergSVD:
    """Full SVD ``H = U diag(sigma) S^T`` plus the projected data.

    Attributes
    ----------
    U : ndarray, (k, k)
    S : ndarray, (m, m)
    sigma : ndarray, (m,)
        Nonincreasing singular values.
    q : int
        Numerical rank, the number of ``sigma > rank_tol * sigma[0]``.
    uty : ndarray, (k,)
        ``U^T y_proj``.
    y_hat : ndarray, (k,)
        ``uty`` with entries past ``q`` set to zero.
    """

    U: np.ndarray
    S: np.ndarray
    sigma: np.ndarray
    q: int
    uty: np.ndarray
    y_hat: np.ndarray

    @property
    def y_hat_norm2(self):
        """``||y_hat||^2 = ||R y||^2``, the supremum of the discrepancy."""
        return float(self.y_hat @ self.y_hat)


def decompose(H, y_proj, rank_tol=DEFAULT_RANK_TOL):
    """SVD of a Hessenberg matrix and the projected right-hand side.

    ``H`` may be rectangular ``(m+1) x m`` or square ``m x m`` (breakdown);
    ``y_proj`` is ``V^T y_delta`` with matching length.
    """
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] not in (H.shape[1], H.shape[1] + 1):
        raise ValueError(f"H must be (m+1) x m or m x m, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("H contains non-finite entries")
    y_proj = check_vector(y_proj, H.shape[0], "y_proj")
    rank_tol = check_positive_float(rank_tol, "rank_tol", allow_zero=True)

    U, sigma, St = np.linalg.svd(H, full_matrices=True)
    smax = sigma[0] if sigma.size else 0.0
    q = int(np.count_nonzero(sigma > rank_tol * smax)) if smax > 0 else 0
    uty = U.T @ y_proj
    y_hat = uty.copy()
    y_hat[q:] = 0.0
    return HessenbergSVD(U=U, S=St.T, sigma=sigma, q=q, uty=uty, y_hat=y_hat)


def projector_residual_norm(decomp, svd, v):
    """``||(I - R) v||`` computed from ``V`` and ``U`` only."""
    v = check_vector(v, decomp.V.shape[0], "v")
    if svd.U.shape[0] != decomp.V.shape[1]:
        raise ValueError("SVD and Arnoldi decomposition have inconsistent shapes")
    V, Uq = decomp.V, svd.U[:, : svd.q]
    # Split v into its part outside span(V) and its coordinates inside;
    # differencing vectors avoids the cancellation in ||v||^2 - ||Rv||^2.
    coords = V.T @ v
    outside = v - V @ coords
    inside = coords - Uq @ (Uq.T @ coords)
    return float(np.hypot(np.linalg.norm(outside), np.linalg.norm(inside)))


def estimate_h(op, decomp=None, iters=DEFAULT_H_ITERS, safety=DEFAULT_H_SAFETY,
               seed=DEFAULT_H_SEED):
    """Estimate an upper bound ``h`` on ``||T - T V_m V_m^T||_2``.

    Power iteration on ``M^T M`` with ``M = T (I - V_m V_m^T)``, started from
    a fixed-seed Gaussian vector; the square root of the largest Rayleigh
    quotient seen is inflated by ``safety``.  ``decomp=None`` (or an empty
    basis) estimates ``safety * ||T||``.
    """
    iters = check_positive_int(iters, "iters")
    safety = float(safety)
    if safety < 1.0:
        raise ValueError(f"safety must be >= 1, got {safety}")
    n = op.n
    Vm = np.zeros((n, 0)) if decomp is None else decomp.basis
    if Vm.shape[1] >= n:
        return 0.0

    def deflate(v):
        return v - Vm @ (Vm.T @ v)

    rng = np.random.default_rng(seed)
    v = deflate(rng.standard_normal(n))
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    v /= nv
    best = 0.0
    for _ in range(iters):
        w = deflate(op.apply_adjoint(op.apply(v)))
        lam = float(v @ w)
        best = max(best, lam)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
    return safety * float(np.sqrt(best))


def deflated_norm_dense(T, V):
    """Dense oracle for ``||T (I - V V^T)||_2``; small problems only."""
    T = np.asarray(T, dtype=np.float64)
    P = np.eye(T.shape[1]) - V @ V.T
    return float(np.linalg.norm(T @ P, 2))


def d_metric(op, decomp, svd, x_true):
    """Relative defect ``||(R T - T V_m V_m^T) x|| / ||x||``.

    It vanishes exactly when ``R T x = T V_m V_m^T x``, i.e. when the
    true solution is compatible with the Krylov projection.
    """
    x_true = check_vector(x_true, op.n, "x_true")
    nx = np.linalg.norm(x_true)
    if nx == 0.0:
        raise ValueError("x_true must be nonzero")
    V, H, m = decomp.V, decomp.H, decomp.m
    Uq = svd.U[:, : svd.q]
    # Both terms live in span(V): compare their coordinates.
    a = Uq @ (Uq.T @ (V.T @ op.apply(x_true)))
    b = H @ (V[:, :m].T @ x_true)
    return float(np.linalg.norm(a - b) / nx)


def gamma_metric_dense(T, decomp, svd):
    """Dense diagnostic ``||(I - R) T||_2``; small problems only."""
    T = np.asarray(T, dtype=np.float64)
    W = decomp.V @ svd.U[:, : svd.q]
    return float(np.linalg.norm(T - W @ (W.T @ T), 2))
