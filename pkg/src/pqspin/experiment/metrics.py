from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ParameterError
from ..gaussian import VACUUM_VARIANCE, EnsembleConfig

DB = 10.0 / math.log(10.0)


def to_db(ratio: float) -> float:
    """``-10 log10(ratio)``: positive when ``ratio < 1``."""
    return -10.0 * math.log10(ratio)


@dataclass(frozen=True)
class SqueezingMetrics:
    """Squeezing figures at the verification pulse.

    ``conditional_variance`` is in Holstein-Primakoff units referred to the mean
    spin at verification time. Stderr fields are zero for noiseless
    (closed-form) evaluations.
    """

    conditional_variance: float
    noise_reduction_db: float
    wineland_xi2: float
    wineland_db: float
    angular_variance: float
    conditional_variance_stderr: float = 0.0
    wineland_xi2_stderr: float = 0.0
    wineland_db_stderr: float = 0.0
    outcome_variance: float = math.nan
    predicted_conditional_variance: float = math.nan
    jx_ratio: float = 1.0
    n_traj: int = 0

    def as_row(self) -> dict:
        return {
            "wineland_db": self.wineland_db,
            "wineland_db_stderr": self.wineland_db_stderr,
            "wineland_xi2": self.wineland_xi2,
            "wineland_xi2_stderr": self.wineland_xi2_stderr,
            "noise_reduction_db": self.noise_reduction_db,
            "conditional_variance": self.conditional_variance,
            "conditional_variance_stderr": self.conditional_variance_stderr,
            "predicted_conditional_variance": self.predicted_conditional_variance,
            "outcome_variance": self.outcome_variance,
            "angular_variance": self.angular_variance,
            "jx_ratio": self.jx_ratio,
        }


def wineland_xi2(conditional_variance: float, ens: EnsembleConfig, jx_initial: float | None = None,
                 jx_at_verification: float | None = None) -> float:
    """Wineland parameter ``2 J_x(0) Var(J_z) / J_x(t)^2``.

    ``conditional_variance`` is in quadrature units at verification time, so
    ``Var(J_z) = conditional_variance * J_x(t)``.
    """
    jx0 = ens.mean_spin if jx_initial is None else jx_initial
    jxt = jx0 if jx_at_verification is None else jx_at_verification
    if not (jx0 > 0 and jxt > 0):
        raise ParameterError("mean spin must be positive")
    var_jz = conditional_variance * jxt
    return 2.0 * jx0 * var_jz / (jxt * jxt)


def angular_variance(conditional_variance: float, jx_at_verification: float) -> float:
    """``Var(J_z) / J_x^2`` in rad^2."""
    if not jx_at_verification > 0:
        raise ParameterError("mean spin must be positive")
    return conditional_variance / jx_at_verification


def metrics_from_variance(fixed_variance: float, jx_ratio: float, ens: EnsembleConfig, *,
                          stderr: float = 0.0, outcome_variance: float = math.nan,
                          predicted: float | None = None, n_traj: int = 0) -> SqueezingMetrics:
    """Build metrics from ``Var(p_A)`` normalized to the initial mean spin.

    The simulation keeps quadratures normalized to ``J_x(0)`` so that the probe
    coupling stays fixed while the mean spin decays; this converts back.
    """
    if not fixed_variance > 0:
        raise ParameterError(f"conditional variance must be positive, got {fixed_variance}")
    jx0 = ens.mean_spin
    jxt = jx0 * jx_ratio
    cond = fixed_variance / jx_ratio
    cond_se = stderr / jx_ratio
    xi2 = wineland_xi2(cond, ens, jx0, jxt)
    rel = stderr / fixed_variance
    pred = math.nan if predicted is None else predicted / jx_ratio
    return SqueezingMetrics(
        conditional_variance=cond,
        noise_reduction_db=to_db(cond / VACUUM_VARIANCE),
        wineland_xi2=xi2,
        wineland_db=to_db(xi2),
        angular_variance=angular_variance(cond, jxt),
        conditional_variance_stderr=cond_se,
        wineland_xi2_stderr=xi2 * rel,
        wineland_db_stderr=DB * rel,
        outcome_variance=outcome_variance,
        predicted_conditional_variance=pred,
        jx_ratio=jx_ratio,
        n_traj=n_traj,
    )
