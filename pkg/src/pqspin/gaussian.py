"""Gaussian state of the collective spin oscillator and the channels acting on it.

Quadratures follow the Holstein-Primakoff convention ``x_A = J_y / sqrt(J_x)``,
``p_A = J_z / sqrt(J_x)``, so the coherent spin state has variance 1/2 in each.
The probe measures ``p_A``; its back-action lands on ``x_A``.

A state may carry a batch of conditional means with shape ``(2, n)`` that share
one covariance. Linear-Gaussian filtering keeps the covariance independent of
the measurement record, so this is how whole trajectory ensembles are pushed
through the same operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ParameterError

VACUUM_VARIANCE = 0.5
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-9
HEISENBERG_TOL = 1e-9


@dataclass(frozen=True)
class EnsembleConfig:
    """Atomic ensemble parameters.

    ``thermal_factor`` is the ratio of the initial transverse variance to that of
    an ideal coherent spin state; imperfect optical pumping makes it exceed one.
    """

    atom_count: float = 1.87e11
    spin_per_atom: float = 2.0
    polarization: float = 1.0
    thermal_factor: float = 1.06

    def __post_init__(self):
        if not self.atom_count > 0:
            raise ConfigurationError("atom_count must be positive", "atom_count")
        if not self.spin_per_atom > 0:
            raise ConfigurationError("spin_per_atom must be positive", "spin_per_atom")
        if not 0.0 <= self.polarization <= 1.0:
            raise ConfigurationError("polarization must lie in [0, 1]", "polarization")
        if not self.thermal_factor >= 1.0:
            raise ConfigurationError("thermal_factor must be >= 1", "thermal_factor")

    @property
    def mean_spin(self) -> float:
        """Macroscopic spin ``J_x`` in units of hbar."""
        return self.polarization * self.atom_count * self.spin_per_atom


@dataclass(frozen=True)
class MeasurementModel:
    """One integrated probe pulse: outcome ``m = kappa * p_A + n``, ``Var(n) = shot_variance``."""

    kappa: float
    shot_variance: float = VACUUM_VARIANCE

    def __post_init__(self):
        if not self.kappa >= 0:
            raise ParameterError(f"kappa must be non-negative, got {self.kappa}")
        if not self.shot_variance >= VACUUM_VARIANCE:
            raise ParameterError("shot_variance cannot fall below the coherent-state value 1/2")

    @classmethod
    def from_kappa2(cls, kappa2: float, shot_variance: float = VACUUM_VARIANCE) -> "MeasurementModel":
        return cls(math.sqrt(kappa2), shot_variance)


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray = field(repr=True)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.shape[0] != 2 or mean.ndim > 2:
            raise ParameterError(f"mean must have shape (2,) or (2, n), got {mean.shape}")
        if cov.shape != (2, 2):
            raise ParameterError(f"cov must be 2x2, got {cov.shape}")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def var_x(self) -> float:
        return float(self.cov[0, 0])

    @property
    def var_p(self) -> float:
        return float(self.cov[1, 1])

    def det(self) -> float:
        return float(np.linalg.det(self.cov))

    def is_valid(self, heisenberg: bool = True) -> bool:
        """Symmetric, positive semidefinite and (optionally) above the uncertainty bound."""
        c = self.cov
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(self.mean)):
            return False
        if abs(c[0, 1] - c[1, 0]) > SYMMETRY_TOL:
            return False
        if np.linalg.eigvalsh(c).min() < -PSD_TOL:
            return False
        if heisenberg and self.det() < 0.25 - HEISENBERG_TOL:
            return False
        return True


def _symmetrize(cov):
    return 0.5 * (cov + cov.T)


def make_css(config: EnsembleConfig) -> GaussianState:
    v = config.thermal_factor * VACUUM_VARIANCE
    return GaussianState(np.zeros(2), np.diag([v, v]))


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotate(state: GaussianState, theta: float) -> GaussianState:
    if not math.isfinite(theta):
        raise ParameterError("rotation angle must be finite")
    r = rotation_matrix(theta)
    return GaussianState(r @ state.mean, _symmetrize(r @ state.cov @ r.T))


def filter_update(state: GaussianState, model: MeasurementModel, outcome) -> GaussianState:
    """Condition on a homodyne outcome ``m = kappa p_A + noise``.

    Joint-Gaussian conditioning with observation row ``(0, kappa)``. ``outcome``
    may be a scalar or an array matching a batched mean. Back-action is not
    applied here; see :func:`backaction_kick`.
    """
    k = model.kappa
    if k == 0.0:
        return state
    cov = state.cov
    innovation_var = k * k * cov[1, 1] + model.shot_variance
    gain = k * cov[:, 1] / innovation_var
    residual = np.asarray(outcome, dtype=float) - k * state.mean[1]
    if state.mean.ndim == 2:
        mean = state.mean + gain[:, None] * residual
    else:
        mean = state.mean + gain * residual
    new_cov = cov - k * np.outer(gain, cov[1, :])
    return GaussianState(mean, _symmetrize(new_cov))


def sample_outcome(state: GaussianState, model: MeasurementModel, rng: np.random.Generator):
    """Draw ``m`` from the predictive law and return it with the conditioned state."""
    mu = model.kappa * state.mean[1]
    sd = math.sqrt(model.kappa ** 2 * state.cov[1, 1] + model.shot_variance)
    m = mu + sd * rng.standard_normal(np.shape(mu))
    if np.ndim(m) == 0:
        m = float(m)
    return m, filter_update(state, model, m)


def backaction_kick(state: GaussianState, model: MeasurementModel) -> GaussianState:
    """Add the probe's ``p_L`` noise to ``x_A``; ``p_A`` is untouched."""
    if model.kappa == 0.0:
        return state
    cov = np.array(state.cov)
    cov[0, 0] += model.kappa ** 2 * VACUUM_VARIANCE
    return GaussianState(state.mean, cov)


def measure(state: GaussianState, model: MeasurementModel, outcome) -> GaussianState:
    """Conditioning plus back-action: the physical effect of one QND pulse."""
    return backaction_kick(filter_update(state, model, outcome), model)


def loss_channel(state: GaussianState, beta: float, reset_variance: float = VACUUM_VARIANCE) -> GaussianState:
    """Attenuate by ``1 - beta`` and mix in isotropic noise of variance ``reset_variance``."""
    if not 0.0 <= beta <= 1.0:
        raise ParameterError(f"beta must lie in [0, 1], got {beta}")
    if beta == 0.0:
        return state
    keep = 1.0 - beta
    mean = math.sqrt(keep) * state.mean
    cov = keep * state.cov + beta * reset_variance * np.eye(2)
    return GaussianState(mean, cov)


def decay_fraction(rate: float, duration: float) -> float:
    """Loss fraction ``1 - exp(-rate * duration)`` for a transverse decoherence rate."""
    if rate < 0 or duration < 0:
        raise ParameterError("rate and duration must be non-negative")
    return -math.expm1(-rate * duration)
