"""Duration sweeps and the fixed-total-duration comparison.

All cells reuse the caller's seed (common random numbers), so neighbouring
cells are positively correlated and a one-cell sweep reproduces the single run.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..gaussian import EnsembleConfig
from .config import DecoherenceConfig, SequenceConfig
from .metrics import SqueezingMetrics
from .schedule import DEFAULT_MAX_SUBSTEPS
from .simulate import predict_metrics, run_three_pulse, run_two_pulse

SPLIT_GRID = 40


@dataclass(frozen=True)
class SweepResult:
    tau1: tuple[float, ...]
    tau3: tuple[float, ...]
    cells: tuple[tuple[SqueezingMetrics, ...], ...]  # indexed [i3][i1]

    def best(self):
        """``(tau1, tau3, metrics)`` of the cell with the largest Wineland squeezing."""
        flat = [(self.tau1[i1], self.tau3[i3], c) for i3, row in enumerate(self.cells) for i1, c in enumerate(row)]
        return max(flat, key=lambda item: item[2].wineland_db)


def run_cell(seq, dec, ens, n_traj, seed, threads=None, **kwargs) -> SqueezingMetrics:
    if seq.tau3 > 0:
        return run_three_pulse(seq, dec, ens, n_traj, seed, threads, **kwargs)
    return run_two_pulse(seq, dec, ens, n_traj, seed, threads, **kwargs)


def sweep_grid(tau1_list, tau3_list, seq: SequenceConfig, dec: DecoherenceConfig, ens: EnsembleConfig,
               n_traj: int, seed: int, threads: int | None = None, **kwargs) -> SweepResult:
    tau1_list, tau3_list = tuple(tau1_list), tuple(tau3_list)
    if not tau1_list or not tau3_list:
        raise ValueError("sweep lists must be non-empty")
    rows = []
    for t3 in tau3_list:
        row = []
        for t1 in tau1_list:
            cell_seq = dataclasses.replace(seq, tau1=t1, tau3=t3)
            row.append(run_cell(cell_seq, dec, ens, n_traj, seed, threads, **kwargs))
        rows.append(tuple(row))
    return SweepResult(tau1_list, tau3_list, tuple(rows))


def optimal_split(total, seq, dec, ens, max_substeps=DEFAULT_MAX_SUBSTEPS) -> float:
    """Fraction of ``total`` given to the first train that maximizes closed-form squeezing."""

    def db(frac):
        s = dataclasses.replace(seq, tau1=frac * total, tau3=(1 - frac) * total)
        return predict_metrics(s, dec, ens, three_pulse=True, max_substeps=max_substeps).wineland_db

    fracs = np.arange(1, SPLIT_GRID) / SPLIT_GRID
    values = [db(f) for f in fracs]
    i = int(np.argmax(values))
    lo, hi = fracs[max(i - 1, 0)], fracs[min(i + 1, len(fracs) - 1)]
    res = minimize_scalar(lambda f: -db(f), bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
    return float(res.x) if -res.fun >= values[i] else float(fracs[i])


@dataclass(frozen=True)
class ComparisonResult:
    totals: tuple[float, ...]
    two_pulse: tuple[SqueezingMetrics, ...]
    three_pulse: tuple[SqueezingMetrics, ...]
    splits: tuple[tuple[float, float], ...]

    def best_two_pulse(self) -> SqueezingMetrics:
        return max(self.two_pulse, key=lambda m: m.wineland_db)

    def best_three_pulse(self) -> SqueezingMetrics:
        return max(self.three_pulse, key=lambda m: m.wineland_db)


def compare_total_duration(total_list, split_rule, seq: SequenceConfig, dec: DecoherenceConfig,
                           ens: EnsembleConfig, n_traj: int, seed: int, threads: int | None = None,
                           **kwargs) -> ComparisonResult:
    """Two-pulse with ``tau1 = total`` against three-pulse with ``tau1 + tau3 = total``.

    ``split_rule`` is ``"optimal"`` (closed-form scan per total) or a fixed
    fraction in (0, 1) assigned to the first train.
    """
    max_substeps = kwargs.get("max_substeps", DEFAULT_MAX_SUBSTEPS)
    two, three, splits = [], [], []
    for total in total_list:
        two.append(run_two_pulse(dataclasses.replace(seq, tau1=total, tau3=0.0), dec, ens, n_traj, seed,
                                 threads, **kwargs))
        if total <= 0:
            three.append(two[-1])
            splits.append((0.0, 0.0))
            continue
        if split_rule == "optimal":
            frac = optimal_split(total, seq, dec, ens, max_substeps)
        else:
            frac = float(split_rule)
            if not 0 < frac < 1:
                raise ValueError("split fraction must lie in (0, 1)")
        t1, t3 = frac * total, (1 - frac) * total
        splits.append((t1, t3))
        three.append(run_three_pulse(dataclasses.replace(seq, tau1=t1, tau3=t3), dec, ens, n_traj, seed,
                                     threads, **kwargs))
    return ComparisonResult(tuple(total_list), tuple(two), tuple(three), tuple(splits))


def combined_sigma(a: SqueezingMetrics, b: SqueezingMetrics) -> float:
    return math.hypot(a.wineland_xi2_stderr, b.wineland_xi2_stderr)
