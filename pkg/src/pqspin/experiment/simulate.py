"""Two- and three-pulse squeezing experiments.

Every trajectory carries its true ``p_A`` alongside the filter. The forward
filter and backward effect are the gaussian-core / pqs operations applied to a
batch of conditional means. Conditional variances are then estimated the way
an experimentalist would: by least-squares regression across trajectories of
the verification target on the record summaries (filter mean, and for three
pulses the backward weighted mean). For jointly Gaussian data that residual
variance is exact in expectation, so the regression also checks the filter.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from ..errors import ConfigurationError, StatisticalPowerError
from ..gaussian import (
    VACUUM_VARIANCE,
    EnsembleConfig,
    GaussianState,
    MeasurementModel,
    loss_channel,
    make_css,
    measure,
)
from ..parallel import block_sizes, block_streams, ordered_map
from ..pqs import effect_absorb, effect_backpropagate_loss, effect_flat
from .config import DecoherenceConfig, SequenceConfig
from .metrics import SqueezingMetrics, metrics_from_variance
from .schedule import DEFAULT_MAX_SUBSTEPS, Schedule, build_schedule

MIN_TRAJECTORIES = 10_000
DEFAULT_BATCHES = 10


def _check(seq: SequenceConfig, n_traj: int | None):
    if seq.tau2 <= 0:
        raise ConfigurationError("tau2 must be positive to evaluate squeezing", "tau2")
    if n_traj is not None and n_traj < MIN_TRAJECTORIES:
        raise StatisticalPowerError(f"need at least {MIN_TRAJECTORIES} trajectories, got {n_traj}")


def _reset_variance(ens: EnsembleConfig) -> float:
    # decoherence relaxes the transverse spin back to the pumped-state noise level
    return ens.thermal_factor * VACUUM_VARIANCE


def _forward_covariance(schedule: Schedule, ens: EnsembleConfig) -> GaussianState:
    state = make_css(ens)
    reset = _reset_variance(ens)
    for step in schedule.before:
        if step.kappa2 > 0:
            state = measure(state, MeasurementModel.from_kappa2(step.kappa2), 0.0)
        state = loss_channel(state, step.beta, reset)
    return state


def _backward_precision(schedule: Schedule, ens: EnsembleConfig) -> float:
    effect = effect_flat()
    reset = _reset_variance(ens)
    for step in reversed(schedule.after):
        effect = effect_backpropagate_loss(effect, step.beta, reset)
        if step.kappa2 > 0:
            effect = effect_absorb(effect, MeasurementModel.from_kappa2(step.kappa2), 0.0)
    return effect.precision


def predicted_variance(schedule: Schedule, ens: EnsembleConfig) -> float:
    """Closed-form ``Var(p_A | records)`` at verification, normalized to ``J_x(0)``."""
    state = _forward_covariance(schedule, ens)
    lam = _backward_precision(schedule, ens)
    vp = state.var_p
    return vp if lam == 0 else 1.0 / (1.0 / vp + lam)


def predict_metrics(seq: SequenceConfig, dec: DecoherenceConfig, ens: EnsembleConfig,
                    three_pulse: bool | None = None, max_substeps: int = DEFAULT_MAX_SUBSTEPS) -> SqueezingMetrics:
    """Noiseless metrics from the filter/smoother covariance alone."""
    _check(seq, None)
    if three_pulse is None:
        three_pulse = seq.tau3 > 0
    schedule = build_schedule(seq, dec, three_pulse, max_substeps)
    v = predicted_variance(schedule, ens)
    outcome = VACUUM_VARIANCE + schedule.verify_kappa2 * v
    return metrics_from_variance(v, schedule.jx_ratio, ens, predicted=v, outcome_variance=outcome)


def _advance_truth(p, step, reset, rng):
    if step.beta == 0:
        return p
    return math.sqrt(1 - step.beta) * p + math.sqrt(step.beta * reset) * rng.standard_normal(p.shape)


def _simulate_block(schedule: Schedule, ens: EnsembleConfig, n: int, rng: np.random.Generator):
    reset = _reset_variance(ens)
    shot_sd = math.sqrt(VACUUM_VARIANCE)
    css = make_css(ens)
    p = math.sqrt(css.var_p) * rng.standard_normal(n)
    state = GaussianState(np.zeros((2, n)), css.cov)

    for step in schedule.before:
        if step.kappa2 > 0:
            model = MeasurementModel.from_kappa2(step.kappa2)
            m = model.kappa * p + shot_sd * rng.standard_normal(n)
            state = measure(state, model, m)
        state = loss_channel(state, step.beta, reset)
        p = _advance_truth(p, step, reset, rng)

    target = p.copy()
    m2 = math.sqrt(schedule.verify_kappa2) * p + shot_sd * rng.standard_normal(n)
    features = [np.ones(n), state.mean[1]]

    if schedule.after:
        outcomes = []
        for step in schedule.after:
            m = None
            if step.kappa2 > 0:
                m = math.sqrt(step.kappa2) * p + shot_sd * rng.standard_normal(n)
            outcomes.append(m)
            p = _advance_truth(p, step, reset, rng)
        effect = effect_flat()
        for step, m in zip(reversed(schedule.after), reversed(outcomes)):
            effect = effect_backpropagate_loss(effect, step.beta, reset)
            if m is not None:
                effect = effect_absorb(effect, MeasurementModel.from_kappa2(step.kappa2), m)
        weighted = effect.weighted_mean if np.ndim(effect.weighted_mean) else np.zeros(n)
        features.append(weighted)

    x = np.column_stack(features)
    y = np.column_stack([target, m2])
    return x.T @ x, x.T @ y, y.T @ y, n


def _residual_variances(xtx, xty, yty, n):
    # rank-aware: with no coupling the filter-mean regressor is identically zero
    coef, _, rank, _ = np.linalg.lstsq(xtx, xty, rcond=None)
    rss = np.diag(yty - xty.T @ coef)
    return rss / (n - rank)


def simulate(seq: SequenceConfig, dec: DecoherenceConfig, ens: EnsembleConfig, n_traj: int, seed: int,
             three_pulse: bool, threads: int | None = None, n_batches: int = DEFAULT_BATCHES,
             max_substeps: int = DEFAULT_MAX_SUBSTEPS) -> SqueezingMetrics:
    schedule = build_schedule(seq, dec, three_pulse, max_substeps)
    jobs = list(zip(block_sizes(n_traj, n_batches), block_streams(seed, n_batches)))
    stats = ordered_map(lambda job: _simulate_block(schedule, ens, job[0], job[1]), jobs, threads)

    pooled = [stats[0][i] for i in range(4)]
    for s in stats[1:]:
        pooled = [acc + part for acc, part in zip(pooled, s)]
    var_target, var_outcome = _residual_variances(*pooled)
    per_batch = np.array([_residual_variances(*s)[0] for s in stats])
    stderr = float(per_batch.std(ddof=1) / math.sqrt(n_batches))
    return metrics_from_variance(
        float(var_target), schedule.jx_ratio, ens,
        stderr=stderr,
        outcome_variance=float(var_outcome),
        predicted=predicted_variance(schedule, ens),
        n_traj=int(pooled[3]),
    )


def run_two_pulse(seq: SequenceConfig, dec: DecoherenceConfig, ens: EnsembleConfig, n_traj: int, seed: int,
                  threads: int | None = None, **kwargs) -> SqueezingMetrics:
    """Squeezing pulse, gap, verification. Any ``tau3`` on ``seq`` is ignored."""
    _check(seq, n_traj)
    seq = dataclasses.replace(seq, tau3=0.0)
    return simulate(seq, dec, ens, n_traj, seed, three_pulse=False, threads=threads, **kwargs)


def run_three_pulse(seq: SequenceConfig, dec: DecoherenceConfig, ens: EnsembleConfig, n_traj: int, seed: int,
                    threads: int | None = None, **kwargs) -> SqueezingMetrics:
    """Two-pulse chain plus a later probe train folded in by retrodiction."""
    _check(seq, n_traj)
    if seq.tau3 <= 0:
        raise ConfigurationError("tau3 must be positive for the three-pulse scheme", "tau3")
    return simulate(seq, dec, ens, n_traj, seed, three_pulse=True, threads=threads, **kwargs)

