import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.stats import norm

from pqspin.errors import AccuracyError, ParameterError, StatisticalPowerError
from pqspin.oracle import (
    GridSpec,
    binned_conditional,
    conditional_from_grid,
    joint_density_grid,
    monte_carlo_conditional,
    total_mass,
)
from pqspin.pqs import predict_three_pulse, predict_two_pulse
from pqspin.validation import check_tuple, oracle_check

GRID = GridSpec()
HALF_SD = math.sqrt(0.5)


def test_uncoupled_density_factorizes():
    m = np.array([-1.3, 0.0, 0.4, 2.2])
    dens = joint_density_grid((0, 0, 0), GRID, m, m[::-1], 0.5 * m)
    ref = norm.pdf(m, 0, HALF_SD) * norm.pdf(m[::-1], 0, HALF_SD) * norm.pdf(0.5 * m, 0, HALF_SD)
    np.testing.assert_allclose(dens, ref, rtol=1e-10)


def test_outcome_covariance():
    m = np.linspace(-7, 7, 141)
    dens = joint_density_grid((1, 1, 0), GridSpec(8, 801), m[:, None], m[None, :], 0.0) / norm.pdf(0, 0, HALF_SD)
    z = trapezoid(trapezoid(dens, m, axis=1), m)
    e11 = trapezoid(trapezoid(dens * m[:, None] ** 2, m, axis=1), m) / z
    e12 = trapezoid(trapezoid(dens * m[:, None] * m[None, :], m, axis=1), m) / z
    e22 = trapezoid(trapezoid(dens * m[None, :] ** 2, m, axis=1), m) / z
    assert z == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose([[e11, e12], [e12, e22]], [[1.0, 0.5], [0.5, 1.0]], atol=1e-6)


@pytest.mark.parametrize("kappas", [(0, 0, 0), (1, 1, 1), (2, 0.5, 2), (0.5, 2, 0)])
def test_normalization(kappas):
    assert total_mass(kappas, GRID) == pytest.approx(1.0, abs=1e-6)


@given(st.tuples(*[st.floats(0, 2)] * 3), st.tuples(*[st.floats(-6, 6)] * 3))
def test_density_non_negative(kappas, m):
    assert joint_density_grid(kappas, GRID, *m) >= 0.0


def test_conditional_examples():
    g = conditional_from_grid((1, 1, 1), GRID, 1.0, 1.0)
    assert g.variance == pytest.approx(2 / 3, abs=1e-6)
    assert g.mean == pytest.approx(2 / 3, abs=1e-6)
    g = conditional_from_grid((2, 1, 1), GRID, 1.0, -1.0)
    assert g.mean == pytest.approx(1 / 6, abs=1e-6)
    for k1, k2, m1 in [(0.5, 1.0, 0.8), (2.0, 2.0, -1.1), (0.0, 1.0, 2.0)]:
        g = conditional_from_grid((k1, k2, 0.0), GRID, m1, 0.0)
        two = predict_two_pulse(k1, k2, m1)
        assert g.variance == pytest.approx(two.variance, rel=1e-6)
        assert g.mean == pytest.approx(two.mean, rel=1e-6, abs=1e-12)


@settings(max_examples=20)
@given(st.tuples(*[st.sampled_from([0.0, 0.5, 1.0, 2.0])] * 3), st.floats(-2, 2), st.floats(-2, 2))
def test_grid_converged(kappas, m1, m3):
    coarse = conditional_from_grid(kappas, GRID, m1, m3)
    fine = conditional_from_grid(kappas, GRID.refined(), m1, m3)
    assert abs(coarse.mean - fine.mean) < 1e-7
    assert abs(coarse.variance - fine.variance) < 1e-7
    exact = predict_three_pulse(*kappas, m1, m3)
    assert fine.variance == pytest.approx(exact.variance, rel=1e-6)


def test_grid_refuses_unresolved_posteriors():
    with pytest.raises(AccuracyError):
        conditional_from_grid((60.0, 1.0, 0.0), GRID, 0.0, 0.0)
    with pytest.raises(AccuracyError):
        conditional_from_grid((1.0, 1.0, 0.0), GRID, 40.0, 0.0)


def test_grid_spec_validation():
    with pytest.raises(ParameterError):
        GridSpec(half_width=4)
    with pytest.raises(ParameterError):
        GridSpec(points=1000)


@pytest.mark.parametrize("kappas, expected, tol", [((1, 1, 1), 2 / 3, 0.002), ((0, 1, 0), 1.0, 0.003)])
def test_monte_carlo_examples(kappas, expected, tol):
    assert monte_carlo_conditional(kappas, 1_000_000, seed=3).variance == pytest.approx(expected, abs=tol)


def test_monte_carlo_is_reproducible_across_threads():
    a = monte_carlo_conditional((1, 0.5, 2), 50_000, seed=77, threads=1)
    b = monte_carlo_conditional((1, 0.5, 2), 50_000, seed=77, threads=4)
    assert a.variance == b.variance
    assert np.array_equal(a.coef, b.coef) and np.array_equal(a.coef_stderr, b.coef_stderr)


def test_monte_carlo_power_floor():
    with pytest.raises(StatisticalPowerError):
        monte_carlo_conditional((1, 1, 1), 9_999, seed=0)


def test_binned_cross_check():
    pred, count = binned_conditional((1, 1, 1), 2_000_000, seed=4, m1=0.5, m3=-0.2, window=0.1)
    exact = predict_three_pulse(1, 1, 1, 0.5, -0.2)
    se_mean = math.sqrt(exact.variance / count)
    assert abs(pred.mean - exact.mean) < 4 * se_mean
    assert pred.variance == pytest.approx(exact.variance, rel=0.05)


def test_report_rows():
    row = check_tuple((1.0, 1.0, 1.0), 100_000, seed=1)
    assert row["analytic_variance"] == pytest.approx(0.666667, abs=1e-6)
    assert row["grid_pass"] and all(m["grid_pass"] for m in row["means"])
    row = check_tuple((0.0, 1.0, 0.0), 1_000_000, seed=2)
    assert row["analytic_variance"] == 1.0
    assert row["grid_variance"] == pytest.approx(1.0, abs=1e-9)
    assert row["mc_variance"] == pytest.approx(1.0, abs=0.003)


def test_report_shape():
    report = oracle_check((0.0, 1.0), n_traj=20_000, seed=5, mean_pairs=2, kappa3_values=(0.0,))
    assert len(report["rows"]) == 4
    assert all(len(r["means"]) == 2 for r in report["rows"])
    assert report["n_fail"] == sum(not r["pass"] for r in report["rows"])
