"""Segment chain of a pulse sequence as a list of elementary steps.

A step is one Gaussian measurement of ``p_A`` followed by a loss channel. Probe
trains are cut into at most ``max_substeps`` steps; trains with fewer strobes
than that get one step per strobe. Dark gaps are single loss-only steps.

The verification pulse is a single measurement at its midpoint, with half of
its decoherence applied on either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..gaussian import decay_fraction
from .config import DecoherenceConfig, SequenceConfig

DEFAULT_MAX_SUBSTEPS = 64


@dataclass(frozen=True)
class Step:
    kappa2: float
    beta: float
    jx_factor: float = 1.0


@dataclass(frozen=True)
class Schedule:
    before: tuple[Step, ...]
    verify_kappa2: float
    after: tuple[Step, ...]

    @property
    def jx_ratio(self) -> float:
        """``J_x(t_verify) / J_x(0)``."""
        return math.prod(s.jx_factor for s in self.before)


def probe_steps(duration, seq: SequenceConfig, dec: DecoherenceConfig, max_substeps=DEFAULT_MAX_SUBSTEPS):
    n = min(seq.n_strobes(duration), max_substeps)
    if n == 0:
        return []
    dt = duration / n
    k2 = seq.kappa_rate * dt
    rate = dec.transverse_rate + dec.depumping_per_kappa2 * seq.kappa_rate
    step = Step(k2, decay_fraction(rate, dt), math.exp(-dec.depumping_per_kappa2 * k2))
    return [step] * n


def dark_step(duration, dec: DecoherenceConfig):
    return Step(0.0, decay_fraction(dec.dark_rate, duration))


def half_verify_step(seq: SequenceConfig, dec: DecoherenceConfig):
    half = 0.5 * seq.tau2
    rate = dec.transverse_rate + dec.depumping_per_kappa2 * seq.kappa_rate
    return Step(0.0, decay_fraction(rate, half), math.exp(-dec.depumping_per_kappa2 * seq.kappa_rate * half))


def build_schedule(seq: SequenceConfig, dec: DecoherenceConfig, three_pulse: bool,
                   max_substeps=DEFAULT_MAX_SUBSTEPS) -> Schedule:
    before = probe_steps(seq.tau1, seq, dec, max_substeps)
    before += [dark_step(seq.gap, dec), half_verify_step(seq, dec)]
    after = []
    if three_pulse and seq.tau3 > 0:
        after = [half_verify_step(seq, dec), dark_step(seq.gap, dec)]
        after += probe_steps(seq.tau3, seq, dec, max_substeps)
    return Schedule(tuple(before), seq.kappa2(seq.tau2), tuple(after))
