"""Forward filter, backward effect and their combination (past quantum state).

The effect operator of later measurements is diagonal in ``p_A`` and Gaussian,
so it is carried as a likelihood in information form: a precision and a
precision-weighted mean. Zero precision is the flat effect (identity operator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .gaussian import VACUUM_VARIANCE, GaussianState, MeasurementModel

# above this loss fraction the backward map is treated as total erasure
BETA_DEGENERATE = 1.0 - 1e-9


@dataclass(frozen=True)
class EffectState:
    precision: float = 0.0
    weighted_mean: float | np.ndarray = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.precision) and self.precision >= 0):
            raise ParameterError(f"effect precision must be finite and >= 0, got {self.precision}")
        if not np.all(np.isfinite(self.weighted_mean)):
            raise ParameterError("effect weighted_mean must be finite")

    @property
    def is_flat(self) -> bool:
        return self.precision == 0.0

    @property
    def mean(self):
        """Peak of the likelihood in ``p_A``; undefined (nan) for the flat effect."""
        if self.is_flat:
            return math.nan
        return self.weighted_mean / self.precision

    @property
    def variance(self) -> float:
        return math.inf if self.is_flat else 1.0 / self.precision


@dataclass(frozen=True)
class OutcomePrediction:
    mean: float | np.ndarray
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ParameterError("outcome variance must be positive")


def effect_flat() -> EffectState:
    return EffectState(0.0, 0.0)


def effect_absorb(effect: EffectState, model: MeasurementModel, outcome) -> EffectState:
    s = model.shot_variance
    k = model.kappa
    if np.ndim(outcome) == 0:
        weighted = effect.weighted_mean + k * float(outcome) / s
    else:
        weighted = effect.weighted_mean + k * np.asarray(outcome, dtype=float) / s
    return EffectState(effect.precision + k * k / s, weighted)


def effect_backpropagate_loss(effect: EffectState, beta: float, reset_variance: float = VACUUM_VARIANCE) -> EffectState:
    """Pull an effect back through ``p' = sqrt(1-beta) p + noise(beta * reset_variance)``.

    As a function of the earlier ``p`` the likelihood has variance
    ``(1/lam + beta R) / (1 - beta)`` and peak ``mu / sqrt(1 - beta)``. Written in
    information form this needs no division by ``1 - beta``, and ``beta -> 1``
    correctly erases the effect.
    """
    if not 0.0 <= beta <= 1.0:
        raise ParameterError(f"beta must lie in [0, 1], got {beta}")
    if beta == 0.0 or effect.is_flat:
        return effect
    if beta >= BETA_DEGENERATE:
        return effect_flat()
    lam = effect.precision
    shrink = 1.0 + lam * beta * reset_variance
    keep = 1.0 - beta
    return EffectState(keep * lam / shrink, math.sqrt(keep) * effect.weighted_mean / shrink)


def retrodict(filter_state: GaussianState, effect: EffectState):
    """Mean and variance of ``p_A`` given the past (``filter_state``) and future (``effect``)."""
    vp = filter_state.var_p
    mu = filter_state.mean[1]
    if effect.is_flat:
        return mu, vp
    if vp == 0.0:
        return mu, 0.0
    var = 1.0 / (1.0 / vp + effect.precision)
    return var * (mu / vp + effect.weighted_mean), var


def predict_outcome(filter_state: GaussianState, model: MeasurementModel, effect: EffectState | None = None) -> OutcomePrediction:
    """Law of the next outcome from the filter alone or combined with a later effect."""
    if effect is None:
        mu, var = filter_state.mean[1], filter_state.var_p
    else:
        mu, var = retrodict(filter_state, effect)
    return OutcomePrediction(model.kappa * mu, model.shot_variance + model.kappa ** 2 * var)


# Closed forms for an ideal coherent-spin-state prior and coherent probe.
# Operand order is shared so that kappa3 = 0 reduces bit-for-bit.


def predict_two_pulse(kappa1: float, kappa2: float, m1: float) -> OutcomePrediction:
    denom = 1.0 + kappa1 * kappa1
    mean = kappa2 * (kappa1 * m1) / denom
    variance = 0.5 + 0.5 * (kappa2 * kappa2) / denom
    return OutcomePrediction(mean, variance)


def predict_three_pulse(kappa1: float, kappa2: float, kappa3: float, m1: float, m3: float) -> OutcomePrediction:
    denom = 1.0 + kappa1 * kappa1 + kappa3 * kappa3
    mean = kappa2 * (kappa1 * m1 + kappa3 * m3) / denom
    variance = 0.5 + 0.5 * (kappa2 * kappa2) / denom
    return OutcomePrediction(mean, variance)
