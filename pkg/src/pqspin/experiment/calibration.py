"""Fit the coupling rate and depumping coefficient to a two-pulse anchor.

The fit uses the closed-form (noiseless) metrics. Two conditions pin the two
free parameters: the two-pulse Wineland squeezing must peak at ``target_tau1``
(zero slope there) and reach ``target_db`` at that peak. The transverse and
dark decoherence rates are inputs, not fit parameters.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from ..errors import ConfigurationError
from ..gaussian import EnsembleConfig
from .config import DecoherenceConfig, SequenceConfig
from .schedule import DEFAULT_MAX_SUBSTEPS
from .simulate import predict_metrics

SLOPE_STEP = 1e-6


@dataclass(frozen=True)
class CalibrationResult:
    kappa_rate: float
    depumping_per_kappa2: float
    optimum_tau1: float
    optimum_db: float
    noise_reduction_db: float
    cost: float

    def apply(self, seq: SequenceConfig, dec: DecoherenceConfig):
        return (
            dataclasses.replace(seq, kappa_rate=self.kappa_rate),
            dataclasses.replace(dec, depumping_per_kappa2=self.depumping_per_kappa2),
        )


def two_pulse_db(tau1, seq, dec, ens, max_substeps=DEFAULT_MAX_SUBSTEPS) -> float:
    s = dataclasses.replace(seq, tau1=tau1, tau3=0.0)
    return predict_metrics(s, dec, ens, three_pulse=False, max_substeps=max_substeps).wineland_db


def best_two_pulse(seq, dec, ens, bounds=(1e-5, 10e-3), max_substeps=DEFAULT_MAX_SUBSTEPS):
    """``(tau1, wineland_db)`` at the two-pulse optimum."""
    res = minimize_scalar(lambda t: -two_pulse_db(t, seq, dec, ens, max_substeps),
                          bounds=bounds, method="bounded", options={"xatol": 1e-8})
    return float(res.x), float(-res.fun)


def calibrate(seq: SequenceConfig, dec: DecoherenceConfig, ens: EnsembleConfig,
              target_tau1: float = 1.23e-3, target_db: float = 2.3,
              max_substeps: int = DEFAULT_MAX_SUBSTEPS) -> CalibrationResult:
    def residuals(logp):
        rate, eta = np.exp(logp)
        s = dataclasses.replace(seq, kappa_rate=rate)
        d = dataclasses.replace(dec, depumping_per_kappa2=eta)
        hi = two_pulse_db(target_tau1 + SLOPE_STEP, s, d, ens, max_substeps)
        lo = two_pulse_db(target_tau1 - SLOPE_STEP, s, d, ens, max_substeps)
        mid = two_pulse_db(target_tau1, s, d, ens, max_substeps)
        slope_db_per_ms = (hi - lo) / (2 * SLOPE_STEP) * 1e-3
        return [slope_db_per_ms, mid - target_db]

    # start from the decoherence-free estimate: kappa^2 ~ 3 at the target
    start = np.log([3.0 / target_tau1, 0.1])
    fit = least_squares(residuals, start, xtol=1e-12, ftol=1e-12)
    rate, eta = (float(v) for v in np.exp(fit.x))
    s = dataclasses.replace(seq, kappa_rate=rate)
    d = dataclasses.replace(dec, depumping_per_kappa2=eta)
    tau_opt, db_opt = best_two_pulse(s, d, ens, max_substeps=max_substeps)
    if abs(tau_opt - target_tau1) > 0.05 * target_tau1 or abs(db_opt - target_db) > 0.05:
        raise ConfigurationError(
            f"calibration did not converge: optimum {db_opt:.3f} dB at {tau_opt * 1e3:.3f} ms",
            "calibration",
        )
    nr = predict_metrics(dataclasses.replace(s, tau1=tau_opt, tau3=0.0), d, ens, three_pulse=False,
                         max_substeps=max_substeps).noise_reduction_db
    return CalibrationResult(rate, eta, tau_opt, db_opt, nr, float(2 * fit.cost))
