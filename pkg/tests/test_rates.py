import numpy as np
import pytest

from iatreg.operator import DenseOperator
from iatreg.problems import add_noise, make_phillips
from iatreg.rates import (
    RateExperimentConfig,
    make_source_solution,
    match_ell,
    measure_rate,
    source_problem,
    theoretical_slope,
)
from iatreg.spectral import estimate_h
from iatreg.krylov import arnoldi


def test_source_solution_hand_case():
    op = DenseOperator([[2.0, 0.0], [1.0, 1.0]])
    w = np.array([1.0, -1.0])
    np.testing.assert_array_equal(make_source_solution(op, 0, w), w)
    # T^T T = [[5, 1], [1, 1]]
    np.testing.assert_allclose(make_source_solution(op, 1, w), [4.0, 0.0])
    with pytest.raises(ValueError):
        make_source_solution(op, 2, w)
    with pytest.raises(ValueError):
        make_source_solution(op, 1, [0.0, 0.0])


def test_source_problem_consistency():
    p = make_phillips(80)
    sp = source_problem(p, 1, rho=2.0)
    T = p.operator.entries
    w = p.x_true * 2.0 / np.linalg.norm(p.x_true)
    np.testing.assert_allclose(sp.x_true, T.T @ (T @ w), rtol=1e-13)
    np.testing.assert_allclose(sp.y_clean, T @ sp.x_true, rtol=1e-13)
    assert sp.name == "phillips-nu1"


@pytest.mark.parametrize("i, expected", [(1, 2 / 3), (2, 0.8), (10, 20 / 21)])
def test_theoretical_slope(i, expected):
    assert theoretical_slope(i) == pytest.approx(expected)


def test_config_validation():
    p = make_phillips(20)
    with pytest.raises(ValueError):
        RateExperimentConfig(p, nu=2)
    with pytest.raises(ValueError):
        RateExperimentConfig(p, deltas=(1e-3, 1e-2))
    with pytest.raises(ValueError):
        RateExperimentConfig(p, deltas=())
    with pytest.raises(ValueError):
        RateExperimentConfig(p, i=0)


def test_match_ell_is_first_admissible_prefix():
    p = source_problem(make_phillips(200), 1)
    inst = add_noise(p, 1e-2, 11)
    ell, h, ok = match_ell(p.operator, inst.y_delta, inst.delta, 40)
    assert ok
    assert inst.delta / 3 <= h <= 3 * inst.delta
    # the prefix estimate equals a fresh Arnoldi run of that length
    assert h == pytest.approx(estimate_h(p.operator, arnoldi(p.operator, inst.y_delta, ell)),
                              rel=1e-10)
    if ell > 1:
        shorter = arnoldi(p.operator, inst.y_delta, ell - 1)
        assert estimate_h(p.operator, shorter) > 3 * inst.delta


def test_match_ell_reports_failure():
    p = source_problem(make_phillips(200), 1)
    inst = add_noise(p, 1e-4, 11)
    ell, h, ok = match_ell(p.operator, inst.y_delta, inst.delta, 3)
    assert not ok and ell == 3 and h > 3 * inst.delta


def test_measure_rate_small():
    cfg = RateExperimentConfig(make_phillips(200), deltas=(1e-2, 3e-3, 1e-3), ell_cap=60)
    res = measure_rate(cfg)
    assert len(res.points) == 3
    assert res.slope_theory == pytest.approx(2 / 3)
    good = [p for p in res.points if p.ok]
    assert len(good) >= 2
    assert all(p.alpha > 0 and p.rel_err > 0 for p in good)
    assert all(p.reason in ("", "h_ell_unmatched", "rhs_exceeds_projection") for p in res.points)
    assert np.isfinite(res.slope_fit)
    # deterministic
    res2 = measure_rate(cfg)
    assert [p.rel_err for p in res.points] == [p.rel_err for p in res2.points]
