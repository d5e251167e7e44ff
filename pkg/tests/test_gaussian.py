import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from pqspin.errors import ConfigurationError, ParameterError
from pqspin.gaussian import (
    EnsembleConfig,
    GaussianState,
    MeasurementModel,
    backaction_kick,
    decay_fraction,
    filter_update,
    loss_channel,
    make_css,
    measure,
    rotate,
    sample_outcome,
)
from reference import two_mode_measure
from strategies import angles, betas, kappas, outcomes, physical_states

VACUUM = GaussianState(np.zeros(2), np.diag([0.5, 0.5]))


@pytest.mark.parametrize("thermal, var", [(1.0, 0.5), (1.06, 0.53), (1.25, 0.625)])
def test_css_variance(thermal, var):
    css = make_css(EnsembleConfig(thermal_factor=thermal))
    assert_allclose(css.cov, np.diag([var, var]), rtol=1e-15)
    assert_allclose(css.mean, 0.0)


def test_rotate_examples():
    s = GaussianState(np.array([0.3, -1.2]), np.diag([0.1, 2.5]))
    assert_allclose(rotate(s, 0.0).cov, s.cov, atol=0)
    assert_allclose(rotate(s, 2 * math.pi).cov, s.cov, atol=1e-12)
    q = rotate(s, math.pi / 2)
    assert_allclose(q.cov, np.diag([2.5, 0.1]), atol=1e-15)
    assert_allclose(q.mean, [1.2, 0.3], atol=1e-15)


def test_filter_unit_coupling():
    for m in (-3.0, 0.0, 0.7):
        assert filter_update(VACUUM, MeasurementModel(1.0), m).var_p == pytest.approx(0.25, rel=1e-15)


def test_filter_against_grid_bayes():
    # brute-force posterior on a p grid, prior N(0, 1/2), likelihood N(m; 2p, 1/2)
    p = np.linspace(-6, 6, 120001)
    w = np.exp(-p ** 2) * np.exp(-((1.0 - 2 * p) ** 2))
    w /= trapezoid(w, p)
    mu = trapezoid(p * w, p)
    var = trapezoid((p - mu) ** 2 * w, p)
    post = filter_update(VACUUM, MeasurementModel(2.0), 1.0)
    assert post.mean[1] == pytest.approx(mu, abs=1e-9)
    assert post.var_p == pytest.approx(var, abs=1e-9)
    assert (post.mean[1], post.var_p) == pytest.approx((0.4, 0.1), rel=1e-14)


def test_zero_coupling_is_identity():
    s = GaussianState(np.array([0.2, 0.4]), np.array([[0.7, 0.1], [0.1, 0.6]]))
    m = MeasurementModel(0.0)
    assert filter_update(s, m, 123.0) is s
    assert backaction_kick(s, m) is s


def test_kick_examples():
    m = MeasurementModel(1.0)
    assert_allclose(backaction_kick(VACUUM, m).cov, np.diag([1.0, 0.5]))
    twice = backaction_kick(backaction_kick(VACUUM, m), m)
    assert twice.var_x == pytest.approx(1.5)
    assert twice.det() >= 0.25
    # same two kicks as two light modes coupled in sequence
    ref = VACUUM
    for _ in range(2):
        ref = GaussianState(np.zeros(2), two_mode_measure(ref.cov, 1.0))
    assert_allclose(measure(measure(VACUUM, m, 0.0), m, 0.0).cov, ref.cov, rtol=1e-13)


def test_loss_examples():
    assert loss_channel(VACUUM, 0.0) is VACUUM
    full = loss_channel(GaussianState(np.array([3.0, -1.0]), np.diag([0.1, 4.0])), 1.0, 0.5)
    assert_allclose(full.cov, np.diag([0.5, 0.5]))
    assert_allclose(full.mean, 0.0)
    half = loss_channel(GaussianState(np.zeros(2), np.diag([0.1, 0.1])), 0.5, 0.5)
    assert_allclose(half.cov, np.diag([0.3, 0.3]))


@pytest.mark.parametrize("beta", [-0.1, 1.1, math.nan])
def test_loss_rejects_bad_beta(beta):
    with pytest.raises(ParameterError):
        loss_channel(VACUUM, beta)


def test_bad_inputs():
    with pytest.raises(ParameterError):
        MeasurementModel(-1.0)
    with pytest.raises(ParameterError):
        MeasurementModel(1.0, shot_variance=0.1)
    with pytest.raises(ConfigurationError):
        EnsembleConfig(thermal_factor=0.9)
    with pytest.raises(ParameterError):
        GaussianState(np.zeros(3), np.eye(2))
    with pytest.raises(ParameterError):
        decay_fraction(-1.0, 1.0)


def test_state_is_immutable():
    s = make_css(EnsembleConfig())
    with pytest.raises(ValueError):
        s.cov[0, 0] = 2.0


def test_perfectly_squeezed_prior_stays_squeezed():
    s = GaussianState(np.zeros(2), np.diag([1e9, 0.0]))
    assert filter_update(s, MeasurementModel(1.3), 0.4).var_p == 0.0


@pytest.mark.parametrize("kappa, expected", [(1.0, 1.0), (0.0, 0.5)])
def test_outcome_variance(kappa, expected):
    rng = np.random.default_rng(11)
    batch = GaussianState(np.zeros((2, 1_000_000)), VACUUM.cov)
    m, _ = sample_outcome(batch, MeasurementModel(kappa), rng)
    assert m.var() == pytest.approx(expected, rel=0.01)


def test_sample_replay():
    a = sample_outcome(VACUUM, MeasurementModel(1.0), np.random.default_rng(5))
    b = sample_outcome(VACUUM, MeasurementModel(1.0), np.random.default_rng(5))
    assert a[0] == b[0]
    assert np.array_equal(a[1].mean, b[1].mean) and np.array_equal(a[1].cov, b[1].cov)


def test_sequential_prediction_matches_truth_sampling():
    rng = np.random.default_rng(2024)
    n, k1, k2 = 1_000_000, 1.3, 0.8
    p = rng.normal(0, math.sqrt(0.5), n)
    m1 = k1 * p + rng.normal(0, math.sqrt(0.5), n)
    m2 = k2 * p + rng.normal(0, math.sqrt(0.5), n)
    post = filter_update(GaussianState(np.zeros((2, n)), VACUUM.cov), MeasurementModel(k1), m1)
    resid = m2 - k2 * post.mean[1]
    expected = k2 * k2 * post.var_p + 0.5
    se = expected * math.sqrt(2 / (n - 1))
    assert abs(resid.var(ddof=1) - expected) < 3 * se


@given(physical_states(), kappas, outcomes)
def test_measure_matches_two_mode_model(state, kappa, m):
    assert_allclose(measure(state, MeasurementModel(kappa), m).cov, two_mode_measure(state.cov, kappa),
                    rtol=1e-10, atol=1e-12)


@given(physical_states(), st.lists(st.tuples(st.sampled_from("rmkl"), kappas, angles, betas), max_size=12))
def test_chains_stay_physical(state, ops):
    for op, k, theta, beta in ops:
        if op == "r":
            state = rotate(state, theta)
        elif op == "m":
            state = measure(state, MeasurementModel(k), theta)
        elif op == "k":
            state = backaction_kick(state, MeasurementModel(k))
        else:
            state = loss_channel(state, beta, 0.5 + k)
        assert state.is_valid(heisenberg=True)


@given(physical_states(), st.lists(kappas, min_size=1, max_size=6), outcomes)
def test_bare_conditioning_keeps_psd(state, ks, m):
    for k in ks:
        state = filter_update(state, MeasurementModel(k), m)
        assert state.is_valid(heisenberg=False)


@given(physical_states(), kappas, kappas)
def test_conditioning_monotone_in_kappa(state, k1, k2):
    lo, hi = sorted((k1, k2))
    assert filter_update(state, MeasurementModel(hi), 0.0).var_p <= filter_update(state, MeasurementModel(lo), 0.0).var_p + 1e-15


@given(physical_states(), kappas, kappas)
def test_information_additivity(state, k1, k2):
    two = filter_update(filter_update(state, MeasurementModel(k1), 0.0), MeasurementModel(k2), 0.0)
    one = filter_update(state, MeasurementModel(math.hypot(k1, k2)), 0.0)
    assert two.var_p == pytest.approx(one.var_p, rel=1e-12)
    assert_allclose(two.cov, one.cov, rtol=1e-12, atol=1e-14 * np.abs(state.cov).max())


@given(physical_states(), angles)
def test_rotation_invariants(state, theta):
    r = rotate(state, theta)
    assert r.det() == pytest.approx(state.det(), rel=1e-12)
    assert np.linalg.norm(r.mean) == pytest.approx(np.linalg.norm(state.mean), rel=1e-12, abs=1e-300)


@given(physical_states(), st.floats(1e-6, 1 - 1e-6), st.floats(0.5, 2.0))
def test_loss_contracts_towards_reset(state, beta, reset):
    out = loss_channel(state, beta, reset)
    target = reset * np.eye(2)
    assert_allclose(np.abs(out.cov - target), (1 - beta) * np.abs(state.cov - target), rtol=1e-12, atol=1e-15)
