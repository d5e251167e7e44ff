"""Stroboscopic back-action evasion in the lab frame.

The spin precesses at the Larmor frequency while the probe always reads the
lab-frame ``p_A`` and kicks the lab-frame ``x_A``.

Window models for the stroboscopic case:

``discrete``
    each strobe window is one Gaussian measurement at its centre; sub-window
    precession is ignored.
``sliced``
    each window is cut into slices no wider than ``max_slice_angle`` of
    precession, so a finite duty factor leaks some back-action into the
    measured rotating-frame quadrature.

Continuous probing has no windows and is always sliced; it measures both
rotating-frame quadratures and kicks both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, StatisticalPowerError
from ..gaussian import (
    VACUUM_VARIANCE,
    EnsembleConfig,
    GaussianState,
    MeasurementModel,
    make_css,
    measure,
    rotate,
    rotation_matrix,
)
from ..parallel import block_sizes, block_streams, ordered_map
from .config import SequenceConfig

DEFAULT_SLICE_ANGLE = math.pi / 64
WINDOW_MODELS = ("discrete", "sliced")
MIN_DEMO_TRAJECTORIES = 100


@dataclass(frozen=True)
class BAETrace:
    """Rotating-frame ``p_A`` conditional variance after each strobe period."""

    continuous: bool
    duty_factor: float
    time: np.ndarray
    kappa2: np.ndarray
    variance: np.ndarray  # from the filter covariance
    mc_variance: np.ndarray  # residual variance of truth minus filter mean
    ideal: np.ndarray  # single-quadrature QND filter at the same integrated kappa^2

    @property
    def final_excess(self) -> float:
        """Relative excess of the final variance over the ideal QND value."""
        return float(self.variance[-1] / self.ideal[-1] - 1.0)


def _slice_plan(seq: SequenceConfig, continuous: bool, max_slice_angle: float, window_model: str = "discrete"):
    spacing_angle = 2 * math.pi / seq.strobe_multiplier
    duty = 1.0 if continuous else seq.duty_factor
    window = duty * spacing_angle
    if window > math.pi * (1 + 1e-12):
        raise ConfigurationError("strobe window exceeds half a Larmor period", "duty_factor")
    if window_model == "discrete" and not continuous:
        n_slices = 1
    else:
        n_slices = max(1, math.ceil(window / max_slice_angle - 1e-12))
    d = window / n_slices
    # rotation after each slice; the last one carries the dark part of the period
    steps = [d] * (n_slices - 1) + [spacing_angle - window + d]
    first = -0.5 * window + 0.5 * d
    return duty, first, steps


def _rotating_p_var(cov, theta):
    r = rotation_matrix(-theta)
    return float((r @ cov @ r.T)[1, 1])


def _run_block(n_strobes, first, steps, model, ens, n, rng):
    css = make_css(ens)
    shot_sd = math.sqrt(model.shot_variance)
    kick_sd = model.kappa * math.sqrt(VACUUM_VARIANCE)
    truth = math.sqrt(css.var_p) * rng.standard_normal((2, n))
    state = GaussianState(np.zeros((2, n)), css.cov)
    theta = first
    state = rotate(state, first)
    truth = rotation_matrix(first) @ truth
    err = np.empty(n_strobes)
    for k in range(n_strobes):
        for angle in steps:
            m = model.kappa * truth[1] + shot_sd * rng.standard_normal(n)
            truth[0] += kick_sd * rng.standard_normal(n)
            state = measure(state, model, m)
            r = rotation_matrix(angle)
            truth = r @ truth
            state = rotate(state, angle)
            theta += angle
        back = rotation_matrix(-theta)[1]
        resid = back @ truth - back @ state.mean
        err[k] = resid @ resid
    return err, n


def strobe_bae_demo(seq: SequenceConfig, continuous: bool = False, n_traj: int = 2000, seed: int = 0,
                    ens: EnsembleConfig | None = None, max_slice_angle: float = DEFAULT_SLICE_ANGLE,
                    threads: int | None = None, n_blocks: int = 4, window_model: str = "discrete") -> BAETrace:
    """Probe for ``seq.tau1`` with total coupling ``seq.kappa_rate * seq.tau1``."""
    if window_model not in WINDOW_MODELS:
        raise ConfigurationError(f"window_model must be one of {WINDOW_MODELS}", "window_model")
    if n_traj < MIN_DEMO_TRAJECTORIES:
        raise StatisticalPowerError(f"need at least {MIN_DEMO_TRAJECTORIES} trajectories")
    ens = ens or EnsembleConfig(thermal_factor=1.0)
    n_strobes = seq.n_strobes(seq.tau1)
    if n_strobes == 0:
        raise ConfigurationError("tau1 must span at least one strobe", "tau1")
    duty, first, steps = _slice_plan(seq, continuous, max_slice_angle, window_model)
    kappa2_total = seq.kappa2(seq.tau1)
    model = MeasurementModel.from_kappa2(kappa2_total / (n_strobes * len(steps)))

    # covariance trace is shared by every trajectory
    state = rotate(make_css(ens), first)
    theta = first
    variance = np.empty(n_strobes)
    for k in range(n_strobes):
        for angle in steps:
            state = rotate(measure(state, model, 0.0), angle)
            theta += angle
        variance[k] = _rotating_p_var(state.cov, theta)

    jobs = list(zip(block_sizes(n_traj, n_blocks), block_streams(seed, n_blocks)))
    parts = ordered_map(lambda job: _run_block(n_strobes, first, steps, model, ens, job[0], job[1]),
                        jobs, threads)
    sq = sum(p[0] for p in parts)
    mc_variance = sq / sum(p[1] for p in parts)

    kappa2 = kappa2_total * np.arange(1, n_strobes + 1) / n_strobes
    v0 = make_css(ens).var_p
    ideal = v0 / (1 + kappa2 * v0 / VACUUM_VARIANCE)
    time = np.arange(1, n_strobes + 1) * seq.strobe_spacing
    return BAETrace(continuous, duty, time, kappa2, variance, mc_variance, ideal)


def bae_pair(seq: SequenceConfig, n_traj: int = 2000, seed: int = 0, **kwargs):
    """Stroboscopic and continuous traces at the same integrated coupling."""
    strobe = strobe_bae_demo(seq, False, n_traj, seed, **kwargs)
    cont = strobe_bae_demo(seq, True, n_traj, seed, **kwargs)
    return strobe, cont
