"""Closed form vs quadrature vs Monte Carlo over a grid of couplings."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .oracle import GridSpec, conditional_from_grid, monte_carlo_conditional
from .pqs import predict_three_pulse

GRID_RTOL = 1e-6
GRID_ATOL = 1e-12
MC_SIGMAS = 3.0


def child_seeds(seed: int, n: int) -> list[int]:
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in np.random.SeedSequence(int(seed)).spawn(n)]


def _grid_ok(value, expected):
    return math.isclose(value, expected, rel_tol=GRID_RTOL, abs_tol=GRID_ATOL)


def check_tuple(kappas, n_traj, seed, grid=GridSpec(), mean_pairs=5, threads=None) -> dict:
    """One report row: variance and conditional means from all three routes."""
    k1, k2, k3 = kappas
    rng = np.random.default_rng(seed)
    # conditioning points drawn from the outcome marginals
    pairs = [(float(rng.normal(0, math.sqrt(0.5 + 0.5 * k1 * k1))),
              float(rng.normal(0, math.sqrt(0.5 + 0.5 * k3 * k3)))) for _ in range(mean_pairs)]
    analytic = predict_three_pulse(k1, k2, k3, 0.0, 0.0).variance
    mc = monte_carlo_conditional(kappas, n_traj, seed, threads=threads)
    grid_var = conditional_from_grid(kappas, grid, *(pairs[0] if pairs else (0.0, 0.0))).variance
    row = {
        "kappas": [k1, k2, k3],
        "analytic_variance": analytic,
        "grid_variance": grid_var,
        "mc_variance": mc.variance,
        "mc_variance_stderr": mc.variance_stderr,
        "grid_pass": _grid_ok(grid_var, analytic),
        "mc_pass": abs(mc.variance - analytic) <= MC_SIGMAS * mc.variance_stderr,
        "means": [],
    }
    for m1, m3 in pairs:
        expected = predict_three_pulse(k1, k2, k3, m1, m3).mean
        grid_mean = conditional_from_grid(kappas, grid, m1, m3).mean
        mc_pred, mc_se = mc.predict(m1, m3)
        row["means"].append({
            "m1": m1,
            "m3": m3,
            "analytic_mean": expected,
            "grid_mean": grid_mean,
            "mc_mean": mc_pred.mean,
            "mc_mean_stderr": mc_se,
            "grid_pass": _grid_ok(grid_mean, expected),
            "mc_pass": abs(mc_pred.mean - expected) <= MC_SIGMAS * mc_se,
        })
    row["pass"] = row["grid_pass"] and row["mc_pass"] and all(m["grid_pass"] and m["mc_pass"] for m in row["means"])
    return row


def oracle_check(kappa_values=(0.0, 0.5, 1.0, 2.0), n_traj=1_000_000, seed=0, grid=GridSpec(),
                 mean_pairs=5, threads=None, kappa3_values=None) -> dict:
    """Sweep ``kappa_values`` cubed (or squared with ``kappa3_values=(0,)``)."""
    k3_values = tuple(kappa_values) if kappa3_values is None else tuple(kappa3_values)
    tuples = list(itertools.product(kappa_values, kappa_values, k3_values))
    seeds = child_seeds(seed, len(tuples))
    rows = [check_tuple(t, n_traj, s, grid, mean_pairs, threads) for t, s in zip(tuples, seeds)]
    return {
        "n_traj": n_traj,
        "seed": int(seed),
        "grid": {"half_width": grid.half_width, "points": grid.points},
        "sigmas": MC_SIGMAS,
        "grid_rtol": GRID_RTOL,
        "rows": rows,
        "n_fail": sum(not r["pass"] for r in rows),
        "pass": all(r["pass"] for r in rows),
    }
