"""Square matrix-free linear operators.

Every solver in the package talks to the forward model only through
:class:`LinearOperator`: a pair of callables computing ``T @ x`` and
``T.T @ y`` for a square ``n x n`` map.
"""

import numpy as np

from ._validation import check_vector

__all__ = [
    "LinearOperator",
    "DenseOperator",
    "IdentityOperator",
    "as_operator",
    "apply",
    "apply_adjoint",
]


class LinearOperator:
    """Square linear operator defined by forward and adjoint callables.

    Parameters
    ----------
    n : int
        Dimension; the operator maps ``R^n`` to ``R^n``.
    matvec : callable
        ``x -> T @ x``.
    rmatvec : callable
        ``y -> T.T @ y``.
    label : str
        Short identifier used in reports.
    """

    def __init__(self, n, matvec, rmatvec, label="operator"):
        if int(n) < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        self.n = int(n)
        self._matvec = matvec
        self._rmatvec = rmatvec
        self.label = label

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def dim_in(self):
        return self.n

    @property
    def dim_out(self):
        return self.n

    def apply(self, x):
        """Return ``T @ x``; rejects wrong lengths and non-finite input."""
        x = check_vector(x, self.n, "x")
        return np.asarray(self._matvec(x), dtype=np.float64)

    def apply_adjoint(self, y):
        """Return ``T.T @ y``; rejects wrong lengths and non-finite input."""
        y = check_vector(y, self.n, "y")
        return np.asarray(self._rmatvec(y), dtype=np.float64)

    def __matmul__(self, x):
        return self.apply(x)

    def norm_estimate(self, iters=30, seed=0):
        """Power-iteration estimate of the spectral norm ``||T||_2``."""
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.n)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(iters):
            w = self._rmatvec(self._matvec(v))
            lam = float(v @ w)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                return 0.0
            v = w / nw
        return float(np.sqrt(max(lam, 0.0)))

    def todense(self):
        """Materialize the operator column by column. Meant for small ``n``."""
        cols = [self._matvec(e) for e in np.eye(self.n)]
        return np.column_stack(cols)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, label={self.label!r})"


class DenseOperator(LinearOperator):
    """Adapter around an explicit ``n x n`` array.

    The entries are stored as a C-contiguous (row-major) float64 copy.
    """

    def __init__(self, entries, label="dense"):
        A = np.ascontiguousarray(entries, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("matrix contains non-finite entries")
        A.setflags(write=False)
        self.entries = A
        super().__init__(A.shape[0], A.dot, A.T.dot, label=label)

    def todense(self):
        return self.entries.copy()


class IdentityOperator(LinearOperator):
    def __init__(self, n, label="identity"):
        super().__init__(n, np.copy, np.copy, label=label)


def as_operator(obj, label=None):
    """Wrap ``obj`` as a :class:`LinearOperator`.

    Accepts an existing :class:`LinearOperator`, a square array-like, or
    anything exposing ``shape``, ``matvec`` and ``rmatvec`` (for instance a
    ``scipy.sparse.linalg.LinearOperator``).
    """
    if isinstance(obj, LinearOperator):
        return obj
    if hasattr(obj, "matvec") and hasattr(obj, "rmatvec") and hasattr(obj, "shape"):
        m, n = obj.shape
        if m != n:
            raise ValueError(f"operator must be square, got shape {obj.shape}")
        return LinearOperator(
            n,
            lambda x: np.ravel(obj.matvec(x)),
            lambda y: np.ravel(obj.rmatvec(y)),
            label=label or type(obj).__name__,
        )
    return DenseOperator(obj, label=label or "dense")


def apply(op, x):
    return op.apply(x)


def apply_adjoint(op, y):
    return op.apply_adjoint(y)
