"""Benchmark problems, the noise model and error metrics.

Three discretized first-kind problems are provided: the Phillips and Shaw
Fredholm equations and a separable Gaussian image blur.  Each generator
returns a :class:`TestProblem` whose right-hand side is computed from the
operator, so ``y_clean == op @ x_true`` up to rounding.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import toeplitz

from ._validation import check_positive_float, check_positive_int, check_vector
from .operator import DenseOperator, LinearOperator

__all__ = [
    "PROBLEM_NAMES",
    "NOISE_GENERATOR",
    "TestProblem",
    "NoisyInstance",
    "make_phillips",
    "make_shaw",
    "make_blur",
    "make_problem",
    "add_noise",
    "relative_error",
    "phillips_solution",
    "phillips_rhs",
    "shaw_solution",
    "blur_test_image",
    "write_pgm",
]

PROBLEM_NAMES = ("phillips", "shaw", "blur")
NOISE_GENERATOR = "numpy.PCG64/standard_normal"

# Gaussian mixture constants of the classical shaw test solution.
_SHAW_A1, _SHAW_C1, _SHAW_T1 = 2.0, 6.0, 0.8
_SHAW_A2, _SHAW_C2, _SHAW_T2 = 1.0, 2.0, -0.5


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TestProblem:
    """A discretized linear problem with known solution.

    Attributes
    ----------
    operator : LinearOperator
    x_true : ndarray of shape (n,)
    y_clean : ndarray of shape (n,)
        Noise-free data, ``operator @ x_true``.
    name : str
    n : int
        Length of ``x_true`` (``n_pixels ** 2`` for blur).
    """

    __test__ = False  # not a pytest class

    operator: LinearOperator
    x_true: np.ndarray
    y_clean: np.ndarray
    name: str
    n: int


@dataclass(frozen=True)
class NoisyInstance:
    problem: TestProblem
    y_delta: np.ndarray
    delta: float
    xi: float
    seed: int
    generator: str = NOISE_GENERATOR


def _finish(op, x_true, name):
    x_true = _frozen(x_true)
    if not np.any(x_true):
        raise ValueError(f"{name}: true solution is identically zero")
    y_clean = _frozen(op.apply(x_true))
    return TestProblem(op, x_true, y_clean, name, op.n)


# Phillips ------------------------------------------------------------------

def phillips_solution(t):
    """``1 + cos(pi t / 3)`` on ``|t| < 3``, zero elsewhere."""
    t = np.asarray(t, dtype=np.float64)
    return np.where(np.abs(t) < 3.0, 1.0 + np.cos(np.pi * t / 3.0), 0.0)


def phillips_rhs(s):
    """Closed-form right-hand side of the Phillips equation on [-6, 6]."""
    s = np.asarray(s, dtype=np.float64)
    a = np.abs(s)
    return (6.0 - a) * (1.0 + 0.5 * np.cos(np.pi * s / 3.0)) + (
        9.0 / (2.0 * np.pi)
    ) * np.sin(np.pi * a / 3.0)


def phillips_nodes(n):
    return np.linspace(-6.0, 6.0, n)


def make_phillips(n):
    """Nystrom discretization of the Phillips equation.

    Composite trapezoidal rule on ``n`` equispaced nodes of [-6, 6]; the
    quadrature weights are folded into the columns, ``T[j, k] = w_k x(s_j -
    t_k)``.
    """
    n = check_positive_int(n, "n", minimum=3)
    t = phillips_nodes(n)
    h = 12.0 / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    T = phillips_solution(t[:, None] - t[None, :]) * w[None, :]
    op = DenseOperator(T, label="phillips")
    return _finish(op, phillips_solution(t), "phillips")


# Shaw ----------------------------------------------------------------------

def shaw_nodes(n):
    h = np.pi / n
    return -np.pi / 2 + (np.arange(n) + 0.5) * h


def shaw_solution(t):
    t = np.asarray(t, dtype=np.float64)
    return _SHAW_A1 * np.exp(-_SHAW_C1 * (t - _SHAW_T1) ** 2) + _SHAW_A2 * np.exp(
        -_SHAW_C2 * (t - _SHAW_T2) ** 2
    )


def shaw_kernel(s, t):
    """``(cos s + cos t)^2 (sin u / u)^2`` with ``u = pi (sin s + sin t)``."""
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    # np.sinc(z) = sin(pi z) / (pi z), so the u -> 0 limit is handled there.
    return (np.cos(s) + np.cos(t)) ** 2 * np.sinc(np.sin(s) + np.sin(t)) ** 2


def make_shaw(n):
    """Midpoint-rule discretization of the Shaw equation on [-pi/2, pi/2]."""
    n = check_positive_int(n, "n", minimum=3)
    if n % 2:
        raise ValueError(f"shaw requires an even n, got {n}")
    t = shaw_nodes(n)
    T = shaw_kernel(t[:, None], t[None, :]) * (np.pi / n)
    op = DenseOperator(T, label="shaw")
    return _finish(op, shaw_solution(t), "shaw")


# Blur ----------------------------------------------------------------------

def _mround(v):
    # MATLAB-style rounding (half away from zero) for positive values.
    return int(math.floor(v + 0.5))


def blur_test_image(n):
    """Deterministic ``n x n`` test image of overlapping geometric shapes.

    Two nested ellipses, a triangle and a cross, with intensities 1 to 4.
    """
    n = check_positive_int(n, "n")
    n2, n3, n6, n12 = _mround(n / 2), _mround(n / 3), _mround(n / 6), _mround(n / 12)
    canvas = np.zeros((2 * n + 4, 2 * n + 4))

    def ellipse(radius2):
        i = np.arange(1, n6 + 1)[:, None] / max(n6, 1)
        j = np.arange(1, n3 + 1)[None, :] / max(n3, 1)
        q = ((i**2 + j**2) < radius2).astype(float)
        q = np.hstack([q[:, ::-1], q])
        return np.vstack([q[::-1, :], q])

    big = ellipse(1.0)
    canvas[2 : 2 + 2 * n6, n3 - 1 : n3 - 1 + 2 * n3] = big
    small = ellipse(0.6)
    canvas[n6 : 3 * n6, n3 - 1 : n3 - 1 + 2 * n3] += 2 * small
    canvas[canvas == 3] = 2

    tri = np.triu(np.ones((n3, n3)))
    canvas[n3 + n12 : n3 + n12 + n3, 1 : 1 + n3] = 3 * tri

    m = 2 * n6 + 1
    cross = np.zeros((m, m))
    cross[n6, :] = 1
    cross[:, n6] = 1
    canvas[n2 + n12 : n2 + n12 + m, n2 : n2 + m] = 4 * cross
    return canvas[:n, :n].copy()


def blur_psf_matrix(n, band, sigma):
    """Banded symmetric Toeplitz factor of the separable Gaussian blur."""
    z = np.zeros(n)
    j = np.arange(band)
    z[:band] = np.exp(-(j**2) / (2.0 * sigma**2))
    return toeplitz(z)


def make_blur(n, band=3, sigma=0.7):
    """Gaussian image blur acting on row-major flattened ``n x n`` images.

    The operator is ``x -> vec(A X A^T) / (2 pi sigma^2)`` with ``A`` from
    :func:`blur_psf_matrix`; it is symmetric and never formed explicitly.
    """
    n = check_positive_int(n, "n")
    band = check_positive_int(band, "band")
    sigma = check_positive_float(sigma, "sigma")
    if band > n:
        raise ValueError(f"band ({band}) must not exceed n ({n})")
    A = blur_psf_matrix(n, band, sigma)
    A.setflags(write=False)
    scale = 1.0 / (2.0 * np.pi * sigma**2)

    def matvec(x):
        X = x.reshape(n, n)
        return (scale * (A @ X @ A.T)).ravel()

    op = LinearOperator(n * n, matvec, matvec, label="blur")
    return _finish(op, blur_test_image(n).ravel(), "blur")


def make_problem(name, n, **kwargs):
    """Dispatch on a problem name (``phillips``, ``shaw`` or ``blur``).

    For blur, ``n`` is the image side length.
    """
    builders = {"phillips": make_phillips, "shaw": make_shaw, "blur": make_blur}
    try:
        builder = builders[name]
    except KeyError:
        raise ValueError(
            f"unknown problem {name!r}; expected one of {PROBLEM_NAMES}"
        ) from None
    return builder(n, **kwargs)


# Noise and errors ----------------------------------------------------------

def add_noise(problem, xi, seed=0):
    """Add white Gaussian noise of norm exactly ``xi * ||y_clean||``.

    The noise direction is drawn from ``numpy.random.default_rng(seed)``.
    A zero draw (probability zero) is retried on up to three fresh
    substreams before giving up.
    """
    xi = check_positive_float(xi, "xi", allow_zero=True)
    seed = check_positive_int(seed, "seed", minimum=0)
    y = problem.y_clean
    ynorm = np.linalg.norm(y)
    if xi == 0.0:
        return NoisyInstance(problem, _frozen(y), 0.0, 0.0, seed)
    if ynorm == 0.0:
        raise ValueError("cannot scale relative noise: y_clean is zero")
    delta = xi * ynorm
    for attempt in range(4):
        rng = np.random.default_rng(seed if attempt == 0 else [seed, attempt])
        e = rng.standard_normal(y.shape[0])
        enorm = np.linalg.norm(e)
        if enorm > 0.0:
            break
    else:
        raise RuntimeError("noise generator produced only zero vectors")
    y_delta = y + (delta / enorm) * e
    return NoisyInstance(problem, _frozen(y_delta), float(delta), xi, seed)


def relative_error(x_true, x):
    """``||x_true - x|| / ||x_true||``."""
    x_true = check_vector(x_true, name="x_true")
    x = check_vector(x, x_true.shape[0], name="x")
    nt = np.linalg.norm(x_true)
    if nt == 0.0:
        raise ValueError("x_true must be nonzero")
    return float(np.linalg.norm(x_true - x) / nt)


def write_pgm(path, image):
    """Write a 2-D array as an ASCII PGM (P2, maxval 255, row-major).

    Values are linearly rescaled from ``[min, max]`` to ``[0, 255]``.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    lo, hi = float(img.min()), float(img.max())
    span = hi - lo if hi > lo else 1.0
    pix = np.clip(np.rint(255.0 * (img - lo) / span), 0, 255).astype(int)
    rows, cols = pix.shape
    lines = ["P2", f"{cols} {rows}", "255"]
    lines += [" ".join(str(v) for v in row) for row in pix]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
