import numpy as np
import pytest

from iatreg.krylov import arnoldi
from iatreg.operator import DenseOperator, IdentityOperator


def _relation_defect(T, d):
    m = d.m
    return np.linalg.norm(T @ d.V[:, :m] - d.V @ d.H)


def test_identity_breaks_down_at_once():
    d = arnoldi(IdentityOperator(3), [1.0, 0.0, 0.0], 3)
    assert d.breakdown and d.m == 1
    np.testing.assert_array_equal(d.H, [[1.0]])
    np.testing.assert_array_equal(d.V, [[1.0], [0.0], [0.0]])


def test_two_by_two_hand_case():
    d = arnoldi(np.diag([1.0, 2.0]), [1.0, 1.0], 1)
    assert not d.breakdown
    np.testing.assert_allclose(d.H, [[1.5], [0.5]], rtol=1e-15)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(d.V, [[s, -s], [s, s]], rtol=1e-15)


def test_eigenvector_start_breaks_down():
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    T = Q @ np.diag(np.arange(1.0, 9.0)) @ Q.T
    d = arnoldi(T, 5 * Q[:, 2], 6)
    assert d.breakdown and d.m == 1
    assert d.H[0, 0] == pytest.approx(3.0, rel=1e-13)


def test_invariant_subspace_breakdown_square_form():
    rng = np.random.default_rng(4)
    T = np.zeros((10, 10))
    T[:4, :4] = rng.standard_normal((4, 4))
    T[4:, 4:] = rng.standard_normal((6, 6))
    b = np.r_[rng.standard_normal(4), np.zeros(6)]
    d = arnoldi(T, b, 8)
    assert d.breakdown and d.m == 4
    assert d.H.shape == (4, 4) and d.V.shape == (10, 4)
    assert _relation_defect(T, d) <= 1e-12 * np.linalg.norm(T)
    # the exact solution of T x = b lies in the Krylov space
    x = np.linalg.solve(T, b)
    z = np.linalg.solve(d.H, d.project(b))
    np.testing.assert_allclose(d.basis @ z, x, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("ell", [1, 5, 20, 49])
def test_random_relation_and_orthonormality(ell):
    rng = np.random.default_rng(ell)
    T = rng.standard_normal((50, 50))
    d = arnoldi(T, rng.standard_normal(50), ell)
    assert not d.breakdown
    assert d.H.shape == (ell + 1, ell)
    assert np.allclose(np.tril(d.H, -2), 0.0)
    assert _relation_defect(T, d) <= 1e-12 * np.linalg.norm(T, 2)
    assert np.linalg.norm(d.V.T @ d.V - np.eye(ell + 1)) <= 1e-13


def test_full_dimension_forces_breakdown():
    rng = np.random.default_rng(5)
    T = rng.standard_normal((12, 12))
    d = arnoldi(T, rng.standard_normal(12), 12)
    assert d.breakdown and d.m == 12 and d.H.shape == (12, 12)
    np.testing.assert_allclose(d.V @ d.H @ d.V.T, T, atol=1e-12)


def test_shift_invariance():
    rng = np.random.default_rng(6)
    T = rng.standard_normal((30, 30))
    b = rng.standard_normal(30)
    d0 = arnoldi(T, b, 10)
    d1 = arnoldi(T + 2.5 * np.eye(30), b, 10)
    np.testing.assert_allclose(d1.V, d0.V, atol=1e-10)
    shifted = d0.H.copy()
    shifted[np.arange(10), np.arange(10)] += 2.5
    np.testing.assert_allclose(d1.H, shifted, atol=1e-10)


def test_scaling_of_start_vector_is_irrelevant():
    rng = np.random.default_rng(8)
    T = rng.standard_normal((20, 20))
    b = rng.standard_normal(20)
    d0, d1 = arnoldi(T, b, 6), arnoldi(T, 1e3 * b, 6)
    np.testing.assert_allclose(d0.V, d1.V, atol=1e-13)
    np.testing.assert_allclose(d0.H, d1.H, atol=1e-12)


@pytest.mark.parametrize("name", ["phillips", "shaw", "blur"])
@pytest.mark.parametrize("ell", [1, 5, 20])
def test_benchmarks_relation(small_problems, name, ell):
    inst = small_problems[name]
    op = inst.problem.operator
    d = arnoldi(op, inst.y_delta, ell)
    AV = np.column_stack([op.apply(d.V[:, j]) for j in range(d.m)])
    assert np.linalg.norm(AV - d.V @ d.H) <= 1e-10 * op.norm_estimate()
    assert np.linalg.norm(d.V.T @ d.V - np.eye(d.V.shape[1])) <= 1e-12


def test_outputs_are_readonly():
    d = arnoldi(np.diag([1.0, 2.0, 3.0]), [1.0, 1.0, 1.0], 2)
    with pytest.raises(ValueError):
        d.V[0, 0] = 0.0
    with pytest.raises(ValueError):
        d.H[0, 0] = 0.0


def test_argument_validation():
    op = DenseOperator(np.eye(3))
    with pytest.raises(ValueError, match="exceed"):
        arnoldi(op, [1.0, 0.0, 0.0], 4)
    with pytest.raises(ValueError, match="nonzero"):
        arnoldi(op, np.zeros(3), 1)
    with pytest.raises(ValueError):
        arnoldi(op, [1.0, 0.0, 0.0], 0)
    with pytest.raises(ValueError):
        arnoldi(op, [1.0, np.nan, 0.0], 1)
