import math

import numpy as np
import pytest

from iatreg.operator import DenseOperator
from iatreg.problems import (
    TestProblem,
    add_noise,
    blur_psf_matrix,
    blur_test_image,
    make_blur,
    make_phillips,
    make_problem,
    make_shaw,
    phillips_nodes,
    phillips_rhs,
    phillips_solution,
    relative_error,
    shaw_kernel,
    shaw_solution,
    write_pgm,
)


def test_phillips_solution_values():
    assert phillips_solution(0.0) == 2.0
    assert phillips_solution(3.0) == 0.0
    assert phillips_solution(-3.0) == 0.0
    assert np.all(phillips_solution([3.5, -4.0, 6.0]) == 0.0)


def test_phillips_rhs_at_zero():
    assert phillips_rhs(0.0) == pytest.approx(9.0, abs=1e-15)


def test_phillips_rhs_matches_quadrature():
    # independent check of the closed form by adaptive quadrature
    from scipy.integrate import quad

    for s in (-5.1, -1.7, 0.4, 2.9, 4.4):
        val, _ = quad(
            lambda t: phillips_solution(s - t) * phillips_solution(t),
            -6, 6, points=[-3, 3, s - 3, s + 3], epsabs=1e-13, limit=200,
        )
        assert phillips_rhs(s) == pytest.approx(val, abs=1e-10)


def _phillips_forward_error(n):
    p = make_phillips(n)
    return np.max(np.abs(p.y_clean - phillips_rhs(phillips_nodes(n))))


def test_phillips_second_order_consistency():
    ns = np.array([100, 200, 400, 800])
    errs = np.array([_phillips_forward_error(n) for n in ns])
    # bound calibrated at n = 100: C = err(100) * 100^2
    C = errs[0] * ns[0] ** 2
    assert np.all(errs <= C * ns.astype(float) ** -2 * (1 + 1e-12))
    slope = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    # at least second order; the even integrand actually gives ~4
    assert slope >= 1.8


def test_phillips_n200_bound():
    C = _phillips_forward_error(100) * 100**2
    assert _phillips_forward_error(200) <= C * 200.0**-2


def test_phillips_structure():
    n = 9
    p = make_phillips(n)
    T = p.operator.entries
    s = phillips_nodes(n)
    w = np.full(n, 12.0 / (n - 1))
    w[[0, -1]] *= 0.5
    expected = phillips_solution(s[:, None] - s[None, :]) * w[None, :]
    np.testing.assert_allclose(T, expected, rtol=1e-15)
    # half weights at the ends break the symmetry of the kernel
    assert not np.allclose(T, T.T)


def test_shaw_solution_value():
    assert shaw_solution(0.8) == pytest.approx(2 + math.exp(-2 * 1.3**2), rel=1e-14)
    assert shaw_solution(0.8) == pytest.approx(2.03405, abs=5e-6)


def test_shaw_kernel_removable_singularity():
    s = np.array([0.3, -1.1])
    np.testing.assert_allclose(shaw_kernel(s, -s), (2 * np.cos(s)) ** 2)


def test_shaw_kernel_formula():
    s, t = 0.4, 0.9
    u = np.pi * (np.sin(s) + np.sin(t))
    assert shaw_kernel(s, t) == pytest.approx((np.cos(s) + np.cos(t)) ** 2 * (np.sin(u) / u) ** 2)


def test_shaw_nonsingular(shaw1000):
    sv = np.linalg.svd(shaw1000.operator.entries, compute_uv=False)
    assert sv[-1] > 0
    assert sv[0] / sv[-1] > 1e15


def test_shaw_requires_even():
    with pytest.raises(ValueError):
        make_shaw(7)


@pytest.mark.parametrize("bad", [0, 1, 2])
def test_small_n_rejected(bad):
    with pytest.raises(ValueError):
        make_phillips(bad)


def test_blur_symmetric(rng):
    op = make_blur(12).operator
    for _ in range(5):
        y = rng.standard_normal(op.n)
        np.testing.assert_allclose(op.apply_adjoint(y), op.apply(y), atol=1e-12)


def test_blur_band_one_is_scaled_identity(rng):
    sigma = 0.9
    op = make_blur(5, band=1, sigma=sigma).operator
    x = rng.standard_normal(25)
    np.testing.assert_allclose(op.apply(x), x / (2 * np.pi * sigma**2), rtol=1e-15)


def _conv_oracle(img, band, sigma):
    # brute-force 2-D convolution with the truncated Gaussian PSF, zero boundary
    n = img.shape[0]
    out = np.zeros_like(img)
    for r in range(n):
        for c in range(n):
            acc = 0.0
            for dr in range(-band + 1, band):
                for dc in range(-band + 1, band):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < n and 0 <= cc < n:
                        acc += np.exp(-(dr**2 + dc**2) / (2 * sigma**2)) * img[rr, cc]
            out[r, c] = acc / (2 * np.pi * sigma**2)
    return out


def test_blur_constant_image_interior():
    band, sigma = 3, 0.7
    op = make_blur(6, band, sigma).operator
    out = op.apply(np.ones(36)).reshape(6, 6)
    oracle = _conv_oracle(np.ones((6, 6)), band, sigma)
    np.testing.assert_allclose(out, oracle, rtol=1e-13)
    s = sum(np.exp(-(j**2) / (2 * sigma**2)) for j in range(-band + 1, band))
    assert out[2, 2] == pytest.approx(s**2 / (2 * np.pi * sigma**2), rel=1e-14)


def test_blur_matches_kronecker(rng):
    n, band, sigma = 6, 3, 0.7
    A = blur_psf_matrix(n, band, sigma)
    dense = np.kron(A, A) / (2 * np.pi * sigma**2)
    op = make_blur(n, band, sigma).operator
    for _ in range(5):
        x = rng.standard_normal(n * n)
        np.testing.assert_allclose(op.apply(x), dense @ x, atol=1e-12)
    img = rng.standard_normal((n, n))
    np.testing.assert_allclose(op.apply(img.ravel()).reshape(n, n),
                               _conv_oracle(img, band, sigma), atol=1e-12)


def test_blur_parameter_validation():
    with pytest.raises(ValueError):
        make_blur(4, band=5)
    with pytest.raises(ValueError):
        make_blur(4, sigma=0.0)


def test_blur_image_deterministic():
    a, b = blur_test_image(30), blur_test_image(30)
    assert np.array_equal(a, b)
    assert set(np.unique(a)) <= {0.0, 1.0, 2.0, 3.0, 4.0}
    assert a.any()


@pytest.mark.parametrize("name, n", [("phillips", 50), ("shaw", 50), ("blur", 8)])
def test_problem_invariants(name, n):
    p = make_problem(name, n)
    assert p.name == name
    assert np.any(p.x_true)
    resid = np.linalg.norm(p.y_clean - p.operator.apply(p.x_true))
    assert resid <= 1e-12 * np.linalg.norm(p.y_clean)


def test_unknown_problem():
    with pytest.raises(ValueError, match="unknown problem"):
        make_problem("heat", 10)


def _tiny_problem(y):
    y = np.asarray(y, dtype=float)
    return TestProblem(DenseOperator(np.eye(len(y))), y, y, "tiny", len(y))


def test_noise_zero_level():
    p = make_phillips(20)
    inst = add_noise(p, 0.0, 3)
    assert np.array_equal(inst.y_delta, p.y_clean)
    assert inst.delta == 0.0


def test_noise_scaling_hand_case():
    inst = add_noise(_tiny_problem([3.0, 4.0]), 0.1, 0)
    assert inst.delta == pytest.approx(0.5, rel=1e-15)
    assert np.linalg.norm(inst.y_delta - [3.0, 4.0]) == pytest.approx(0.5, rel=1e-14)


def test_noise_deterministic():
    p = make_shaw(40)
    a, b = add_noise(p, 0.01, 11), add_noise(p, 0.01, 11)
    assert a.y_delta.tobytes() == b.y_delta.tobytes()
    assert not np.array_equal(a.y_delta, add_noise(p, 0.01, 12).y_delta)


@pytest.mark.parametrize("name, n", [("phillips", 200), ("shaw", 200), ("blur", 12)])
@pytest.mark.parametrize("xi", [1e-3, 1e-2, 1e-1])
def test_noise_scaling_exact(name, n, xi):
    p = make_problem(name, n)
    inst = add_noise(p, xi, 5)
    ny = np.linalg.norm(p.y_clean)
    assert abs(np.linalg.norm(inst.y_delta - p.y_clean) - xi * ny) <= 1e-14 * ny
    assert inst.delta == pytest.approx(xi * ny, rel=1e-15)


def test_noise_on_zero_data_rejected():
    with pytest.raises(ValueError):
        add_noise(_tiny_problem([0.0, 0.0]), 0.1, 0)


def test_relative_error_cases():
    assert relative_error([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert relative_error([1.0, 2.0], [0.0, 0.0]) == 1.0
    assert relative_error([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError):
        relative_error([0.0, 0.0], [1.0, 1.0])


def test_write_pgm(tmp_path):
    path = tmp_path / "img.pgm"
    write_pgm(path, np.array([[0.0, 1.0], [2.0, 4.0]]))
    lines = path.read_text().splitlines()
    assert lines[:3] == ["P2", "2 2", "255"]
    assert lines[3:] == ["0 64", "128 255"]
