"""Brute-force evaluators of the three-measurement outcome law.

The measurement operators are all diagonal in ``p_A``, so the joint probability
of three outcomes reduces to a one-dimensional integral over the eigenvalue
``a`` of ``p_A``::

    Pr(m1, m2, m3) = int da prior(a) prod_i |psi(m_i - kappa_i a)|^2

with ``|psi(m)|^2 = exp(-m^2) / sqrt(pi)``. Nothing here uses the closed-form
filter or smoother; these routines exist to check them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, ParameterError, StatisticalPowerError
from .parallel import block_sizes, block_streams, ordered_map
from .pqs import OutcomePrediction

MASS_TOL = 1e-6
EDGE_TOL = 1e-9  # tail beyond ~6.4 sd; moment error far below 1e-6
MIN_TRAJECTORIES = 10_000
_trapz = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class GridSpec:
    """Quadrature grid over ``a``; ``half_width`` is in prior standard deviations."""

    half_width: float = 8.0
    points: int = 2001

    def __post_init__(self):
        if self.half_width < 6:
            raise ParameterError("grid half_width must be at least 6 standard deviations")
        if self.points < 401 or self.points % 2 == 0:
            raise ParameterError("grid points must be an odd count >= 401")

    def refined(self) -> "GridSpec":
        return GridSpec(self.half_width, 2 * self.points - 1)


@dataclass(frozen=True)
class JointSample:
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    a: np.ndarray


def _psi2(m):
    return np.exp(-np.square(m)) / math.sqrt(math.pi)


def _prior_grid(grid: GridSpec, thermal_factor: float):
    sigma = math.sqrt(0.5 * thermal_factor)
    a = np.linspace(-grid.half_width * sigma, grid.half_width * sigma, grid.points)
    prior = np.exp(-0.5 * (a / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    defect = abs(_trapz(prior, a) - 1.0)
    if defect > MASS_TOL:
        raise AccuracyError(f"prior mass defect {defect:.2e} exceeds {MASS_TOL:g}")
    return a, prior


def joint_density_grid(kappas, grid: GridSpec, m1, m2, m3, thermal_factor: float = 1.0):
    """Joint outcome density at ``(m1, m2, m3)``; outcome arguments broadcast."""
    k1, k2, k3 = kappas
    a, prior = _prior_grid(grid, thermal_factor)
    m1, m2, m3 = (np.asarray(m, dtype=float)[..., None] for m in (m1, m2, m3))
    integrand = prior * _psi2(m1 - k1 * a) * _psi2(m2 - k2 * a) * _psi2(m3 - k3 * a)
    out = _trapz(integrand, a, axis=-1)
    return float(out) if out.ndim == 0 else out


def total_mass(kappas, grid: GridSpec, thermal_factor: float = 1.0, m_points: int = 4001) -> float:
    """Integral of the joint density over all three outcomes.

    For fixed ``a`` the integrand factorizes, so each outcome integral is done on
    its own 1-D grid before the final integral over ``a``.
    """
    a, prior = _prior_grid(grid, thermal_factor)
    weight = prior.copy()
    for k in kappas:
        lo, hi = min(k * a[0], k * a[-1]) - 10.0, max(k * a[0], k * a[-1]) + 10.0
        m = np.linspace(lo, hi, m_points)
        weight *= _trapz(_psi2(m[None, :] - k * a[:, None]), m, axis=1)
    return float(_trapz(weight, a))


def _posterior_moments(a, w):
    z = _trapz(w, a)
    mean = _trapz(a * w, a) / z
    var = _trapz((a - mean) ** 2 * w, a) / z
    return mean, var


def conditional_from_grid(kappas, grid: GridSpec, m1: float, m3: float, thermal_factor: float = 1.0) -> OutcomePrediction:
    """Mean and variance of ``Pr(m2 | m1, m3)`` by quadrature over ``a`` and ``m2``."""
    k1, k2, k3 = kappas
    a, prior = _prior_grid(grid, thermal_factor)
    w = prior * _psi2(m1 - k1 * a) * _psi2(m3 - k3 * a)
    if not w.max() > 0:
        raise AccuracyError("posterior over a underflows on the grid")
    a_mean, a_var = _posterior_moments(a, w)
    step = a[1] - a[0]
    if math.sqrt(a_var) < 4 * step:
        raise AccuracyError("posterior over a is narrower than the grid resolves")
    if max(w[0], w[-1]) > EDGE_TOL * w.max():
        raise AccuracyError("posterior over a is truncated at the grid edge")

    # the m2 grid is placed from grid-derived moments only
    center = k2 * a_mean
    spread = math.sqrt(0.5 + k2 * k2 * a_var)
    m2 = np.linspace(center - 12 * spread, center + 12 * spread, grid.points)
    dens = _trapz(w[None, :] * _psi2(m2[:, None] - k2 * a[None, :]), a, axis=1)
    norm = _trapz(dens, m2)
    mean = _trapz(m2 * dens, m2) / norm
    var = _trapz((m2 - mean) ** 2 * dens, m2) / norm
    return OutcomePrediction(float(mean), float(var))


def sample_joint(kappas, n: int, rng: np.random.Generator, thermal_factor: float = 1.0) -> JointSample:
    k1, k2, k3 = kappas
    a = rng.normal(0.0, math.sqrt(0.5 * thermal_factor), n)
    noise = rng.normal(0.0, math.sqrt(0.5), (3, n))
    return JointSample(k1 * a + noise[0], k2 * a + noise[1], k3 * a + noise[2], a)


@dataclass(frozen=True)
class MonteCarloConditional:
    """Least-squares fit ``m2 ~ c0 + c1 m1 + c3 m3`` with delete-one-block jackknife errors (100 blocks by default)."""

    variance: float
    variance_stderr: float
    coef: np.ndarray
    coef_stderr: np.ndarray
    n_traj: int
    replicate_coef: np.ndarray = field(repr=False)

    def predict(self, m1: float, m3: float) -> tuple[OutcomePrediction, float]:
        """Conditional law at ``(m1, m3)`` and the standard error of its mean."""
        x = np.array([1.0, m1, m3])
        mean = float(self.coef @ x)
        reps = self.replicate_coef @ x
        b = len(reps)
        se = math.sqrt((b - 1) / b * np.sum((reps - reps.mean()) ** 2))
        return OutcomePrediction(mean, self.variance), se


def _regression_stats(kappas, n, rng, thermal_factor):
    s = sample_joint(kappas, n, rng, thermal_factor)
    x = np.column_stack([np.ones(n), s.m1, s.m3])
    return x.T @ x, x.T @ s.m2, float(s.m2 @ s.m2), n


def _solve(xtx, xty, yty, n):
    coef = np.linalg.solve(xtx, xty)
    rss = yty - coef @ xty
    return coef, rss / (n - xtx.shape[0])


def monte_carlo_conditional(kappas, n_traj: int, seed: int, thermal_factor: float = 1.0,
                            n_blocks: int = 100, threads: int | None = None) -> MonteCarloConditional:
    if n_traj < MIN_TRAJECTORIES:
        raise StatisticalPowerError(f"need at least {MIN_TRAJECTORIES} trajectories, got {n_traj}")
    jobs = list(zip(block_sizes(n_traj, n_blocks), block_streams(seed, n_blocks)))
    stats = ordered_map(lambda job: _regression_stats(kappas, job[0], job[1], thermal_factor), jobs, threads)

    xtx = sum(s[0] for s in stats)
    xty = sum(s[1] for s in stats)
    yty = sum(s[2] for s in stats)
    n = sum(s[3] for s in stats)
    coef, var = _solve(xtx, xty, yty, n)

    rep_coef = np.empty((n_blocks, 3))
    rep_var = np.empty(n_blocks)
    for i, (bxtx, bxty, byty, bn) in enumerate(stats):
        rep_coef[i], rep_var[i] = _solve(xtx - bxtx, xty - bxty, yty - byty, n - bn)
    scale = (n_blocks - 1) / n_blocks
    var_se = math.sqrt(scale * np.sum((rep_var - rep_var.mean()) ** 2))
    coef_se = np.sqrt(scale * np.sum((rep_coef - rep_coef.mean(axis=0)) ** 2, axis=0))
    return MonteCarloConditional(float(var), var_se, coef, coef_se, n, rep_coef)


def binned_conditional(kappas, n_traj: int, seed: int, m1: float, m3: float,
                       window: float = 0.05, thermal_factor: float = 1.0) -> tuple[OutcomePrediction, int]:
    """Cross-check: sample moments of ``m2`` among trajectories whose ``m1, m3`` fall in a small box."""
    if n_traj < MIN_TRAJECTORIES:
        raise StatisticalPowerError(f"need at least {MIN_TRAJECTORIES} trajectories, got {n_traj}")
    s = sample_joint(kappas, n_traj, block_streams(seed, 1)[0], thermal_factor)
    sel = (np.abs(s.m1 - m1) < window) & (np.abs(s.m3 - m3) < window)
    count = int(sel.sum())
    if count < 100:
        raise StatisticalPowerError(f"only {count} trajectories fell in the conditioning box")
    return OutcomePrediction(float(s.m2[sel].mean()), float(s.m2[sel].var(ddof=1))), count
