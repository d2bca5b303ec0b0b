"""Arnoldi process with classical Gram-Schmidt reorthogonalization."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_float, check_positive_int, check_vector
from .operator import as_operator

__all__ = ["ArnoldiDecomposition", "arnoldi"]


@dataclass(frozen=True)
class ArnoldiDecomposition:
    """Result of ``m`` Arnoldi steps, ``T V[:, :m] = V H``.

    Without breakdown ``V`` is ``n x (m+1)`` and ``H`` is ``(m+1) x m``.
    On breakdown the Krylov space is invariant: ``V`` is ``n x m`` and ``H``
    is square ``m x m``.
    """

    V: np.ndarray
    H: np.ndarray
    requested_steps: int
    completed_steps: int
    breakdown: bool

    @property
    def m(self):
        return self.completed_steps

    @property
    def basis(self):
        """The first ``m`` basis vectors, spanning the solution subspace."""
        return self.V[:, : self.completed_steps]

    def project(self, v):
        """Coordinates ``V^T v`` of ``v`` in the full basis."""
        return self.V.T @ v


def arnoldi(op, b, steps, breakdown_tol=1e-12):
    """Run ``steps`` Arnoldi iterations on ``op`` from the start vector ``b``.

    Parameters
    ----------
    op : LinearOperator or array_like
        Square operator ``T``.
    b : array_like of shape (n,)
        Start vector; ``V[:, 0] = b / ||b||``.
    steps : int
        Number of requested steps ``l``, ``1 <= l <= n``.
    breakdown_tol : float
        Relative breakdown threshold. Step ``j`` breaks down when the
        orthogonalized residual satisfies ``||w|| <= breakdown_tol * ||H||_2``
        where ``H`` is the Hessenberg block computed so far.

    Returns
    -------
    ArnoldiDecomposition

    Notes
    -----
    Each new direction is orthogonalized twice by classical Gram-Schmidt.
    With ``steps == n`` the last step always terminates in breakdown form,
    since ``R^n`` has no room for an ``(n+1)``-th basis vector.
    """
    op = as_operator(op)
    n = op.n
    b = check_vector(b, n, "b")
    steps = check_positive_int(steps, "steps")
    if steps > n:
        raise ValueError(f"steps ({steps}) must not exceed the dimension ({n})")
    breakdown_tol = check_positive_float(breakdown_tol, "breakdown_tol", allow_zero=True)
    beta = np.linalg.norm(b)
    if beta == 0.0:
        raise ValueError("start vector must be nonzero")

    V = np.zeros((n, steps + 1))
    H = np.zeros((steps + 1, steps))
    V[:, 0] = b / beta
    for j in range(steps):
        w = op.apply(V[:, j])
        Vj = V[:, : j + 1]
        h = Vj.T @ w
        w = w - Vj @ h
        h2 = Vj.T @ w
        w = w - Vj @ h2
        H[: j + 1, j] = h + h2
        hnext = np.linalg.norm(w)
        if _is_breakdown(hnext, H[: j + 1, : j + 1], breakdown_tol) or j + 1 == n:
            m = j + 1
            return ArnoldiDecomposition(
                V=_frozen(V[:, :m]),
                H=_frozen(H[:m, :m]),
                requested_steps=steps,
                completed_steps=m,
                breakdown=True,
            )
        H[j + 1, j] = hnext
        V[:, j + 1] = w / hnext
    return ArnoldiDecomposition(
        V=_frozen(V), H=_frozen(H), requested_steps=steps,
        completed_steps=steps, breakdown=False,
    )


def _is_breakdown(hnext, Hblock, tol):
    if hnext == 0.0:
        return True
    # ||H||_F bounds ||H||_2 from above; only pay for the exact norm when close.
    if hnext > tol * np.linalg.norm(Hblock):
        return False
    return hnext <= tol * np.linalg.norm(Hblock, 2)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a
