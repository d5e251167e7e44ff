from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ConfigurationError


@dataclass(frozen=True)
class SequenceConfig:
    """Probe pulse sequence. Durations in seconds, ``larmor_frequency`` in rad/s.

    ``kappa_rate`` sets the coupling budget, ``kappa^2(tau) = kappa_rate * tau``.
    Strobes repeat every ``2 pi / (strobe_multiplier * larmor_frequency)``, half
    a Larmor period for the default multiplier of 2.
    """

    tau1: float = 1.23e-3
    tau2: float = 37e-6
    tau3: float = 0.0
    gap: float = 0.3e-3
    larmor_frequency: float = 2 * math.pi * 500e3
    duty_factor: float = 0.14
    kappa_rate: float = 1000.0
    strobe_multiplier: float = 2.0

    def __post_init__(self):
        for name in ("tau1", "tau2", "tau3", "gap"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigurationError(f"{name} must be a non-negative duration, got {value}", name)
        if not self.larmor_frequency > 0:
            raise ConfigurationError("larmor_frequency must be positive", "larmor_frequency")
        if not 0 < self.duty_factor <= 1:
            raise ConfigurationError(f"duty_factor must lie in (0, 1], got {self.duty_factor}", "duty_factor")
        if not self.kappa_rate >= 0:
            raise ConfigurationError("kappa_rate must be non-negative", "kappa_rate")
        if not self.strobe_multiplier > 0:
            raise ConfigurationError("strobe_multiplier must be positive", "strobe_multiplier")
        if self.strobe_window > 0.5 * self.larmor_period * (1 + 1e-12):
            raise ConfigurationError("strobe window exceeds half a Larmor period", "duty_factor")

    @property
    def larmor_period(self) -> float:
        return 2 * math.pi / self.larmor_frequency

    @property
    def strobe_spacing(self) -> float:
        return self.larmor_period / self.strobe_multiplier

    @property
    def strobe_window(self) -> float:
        return self.duty_factor * self.strobe_spacing

    def n_strobes(self, duration: float) -> int:
        if duration <= 0:
            return 0
        return max(1, round(duration / self.strobe_spacing))

    def kappa2(self, duration: float) -> float:
        return self.kappa_rate * duration


@dataclass(frozen=True)
class DecoherenceConfig:
    """Phenomenological decoherence.

    ``transverse_rate`` acts on the transverse spin while the probe is on,
    ``dark_rate`` in the gaps. ``depumping_per_kappa2`` shrinks the mean spin as
    ``J_x -> J_x exp(-eta kappa^2)``; the depumped atoms also lose their
    transverse correlations, so probing decoheres at ``transverse_rate + eta * kappa_rate``.
    """

    transverse_rate: float = 0.0
    depumping_per_kappa2: float = 0.0
    dark_rate: float = 0.0

    def __post_init__(self):
        for name in ("transverse_rate", "depumping_per_kappa2", "dark_rate"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigurationError(f"{name} must be a non-negative rate, got {value}", name)
