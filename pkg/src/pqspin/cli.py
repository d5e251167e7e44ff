"""Command-line front end.

    pqspin {simulate,sweep,compare,oracle-check,bae-demo} --config run.ini --seed 7 --out results/

Exit codes: 0 success, 2 configuration error, 3 numerical or accuracy failure,
4 failed acceptance check (oracle-check disagreement).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ResolvedConfig, load_config
from .errors import AccuracyError, ConfigurationError, ParameterError, StatisticalPowerError
from .experiment.bae import bae_pair
from .experiment.calibration import calibrate
from .experiment.simulate import run_three_pulse, run_two_pulse
from .experiment.sweeps import compare_total_duration, sweep_grid
from .oracle import GridSpec
from .output import FORMAT_VERSION, heatmap_svg, lines_svg, write_csv, write_json
from .parallel import THREADS_ENV
from .validation import oracle_check

log = logging.getLogger("pqspin")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4
COMMANDS = ("simulate", "sweep", "compare", "oracle-check", "bae-demo")
METRIC_COLUMNS = ["wineland_db", "wineland_db_stderr", "noise_reduction_db", "wineland_xi2",
                  "wineland_xi2_stderr", "conditional_variance", "conditional_variance_stderr",
                  "predicted_conditional_variance", "angular_variance", "jx_ratio"]


class CheckFailed(Exception):
    pass


def _experiment_configs(cfg: ResolvedConfig):
    seq, dec, ens = cfg.sequence, cfg.decoherence, cfg.ensemble
    calib = None
    if cfg.calibration.enabled:
        calib = calibrate(seq, dec, ens, cfg.calibration.target_tau1, cfg.calibration.target_db,
                          max_substeps=cfg.run.max_substeps)
        seq, dec = calib.apply(seq, dec)
        log.info("calibrated kappa_rate=%.6g depumping=%.6g", calib.kappa_rate, calib.depumping_per_kappa2)
    return seq, dec, ens, calib


def _sim_kwargs(cfg):
    return {"n_batches": cfg.run.n_batches, "max_substeps": cfg.run.max_substeps}


def _calibration_payload(calib):
    return None if calib is None else dataclasses.asdict(calib)


def cmd_simulate(cfg, seed, out, threads):
    seq, dec, ens, calib = _experiment_configs(cfg)
    scheme = cfg.run.scheme
    if scheme == "auto":
        scheme = "three" if seq.tau3 > 0 else "two"
    runner = run_three_pulse if scheme == "three" else run_two_pulse
    m = runner(seq, dec, ens, cfg.run.n_traj, seed, threads, **_sim_kwargs(cfg))
    row = m.as_row()
    paths = [
        write_csv(out / "metrics.csv", ["scheme", "tau1", "tau2", "tau3"] + METRIC_COLUMNS,
                  [[scheme, seq.tau1, seq.tau2, seq.tau3] + [row[c] for c in METRIC_COLUMNS]]),
        write_json(out / "metrics.json", {"scheme": scheme, "metrics": row, "n_traj": m.n_traj,
                                          "calibration": _calibration_payload(calib)}),
    ]
    return paths


def cmd_sweep(cfg, seed, out, threads):
    seq, dec, ens, calib = _experiment_configs(cfg)
    res = sweep_grid(cfg.sweep.tau1_list, cfg.sweep.tau3_list, seq, dec, ens, cfg.run.n_traj, seed, threads,
                     **_sim_kwargs(cfg))
    rows = []
    for i3, t3 in enumerate(res.tau3):
        for i1, t1 in enumerate(res.tau1):
            c = res.cells[i3][i1]
            rows.append([t1, t3, c.wineland_db, c.wineland_db_stderr, c.noise_reduction_db, c.wineland_xi2,
                         c.wineland_xi2_stderr, c.conditional_variance, c.conditional_variance_stderr])
    header = ["tau1", "tau3", "wineland_db", "wineland_db_stderr", "noise_reduction_db", "wineland_xi2",
              "wineland_xi2_stderr", "conditional_variance", "conditional_variance_stderr"]
    grid = [[c.wineland_db for c in row] for row in res.cells]
    t1, t3, best = res.best()
    return [
        write_csv(out / "sweep.csv", header, rows),
        heatmap_svg(out / "sweep_heatmap.svg", res.tau1, res.tau3, grid,
                    "Wineland squeezing (dB); tau3 = 0 row is two-pulse"),
        write_json(out / "sweep_summary.json", {"best": {"tau1": t1, "tau3": t3, "wineland_db": best.wineland_db},
                                                "calibration": _calibration_payload(calib)}),
    ]


def cmd_compare(cfg, seed, out, threads):
    seq, dec, ens, calib = _experiment_configs(cfg)
    res = compare_total_duration(cfg.compare.total_list, cfg.compare.split_rule, seq, dec, ens,
                                 cfg.run.n_traj, seed, threads, **_sim_kwargs(cfg))
    rows = []
    for total, a, b, (t1, t3) in zip(res.totals, res.two_pulse, res.three_pulse, res.splits):
        rows.append([total, a.wineland_db, a.wineland_db_stderr, a.wineland_xi2, a.wineland_xi2_stderr,
                     t1, t3, b.wineland_db, b.wineland_db_stderr, b.wineland_xi2, b.wineland_xi2_stderr])
    header = ["total", "two_wineland_db", "two_wineland_db_stderr", "two_xi2", "two_xi2_stderr",
              "three_tau1", "three_tau3", "three_wineland_db", "three_wineland_db_stderr", "three_xi2",
              "three_xi2_stderr"]
    x = np.array(res.totals) * 1e3
    series = {
        "two-pulse (forward)": ([m.wineland_db for m in res.two_pulse], [m.wineland_db_stderr for m in res.two_pulse]),
        "three-pulse (retrodicted)": ([m.wineland_db for m in res.three_pulse],
                                      [m.wineland_db_stderr for m in res.three_pulse]),
    }
    return [
        write_csv(out / "compare.csv", header, rows),
        lines_svg(out / "compare.svg", x, series, "total probe duration (ms)", "Wineland squeezing (dB)",
                  "Two- vs three-pulse at matched total duration"),
        write_json(out / "compare_summary.json", {
            "best_two_pulse_db": res.best_two_pulse().wineland_db,
            "best_three_pulse_db": res.best_three_pulse().wineland_db,
            "calibration": _calibration_payload(calib),
        }),
    ]


def cmd_oracle_check(cfg, seed, out, threads):
    oc = cfg.oracle
    report = oracle_check(oc.kappa_values, oc.n_traj, seed, GridSpec(oc.half_width, oc.points), oc.mean_pairs,
                          threads)
    path = write_json(out / "oracle_report.json", report)
    if not report["pass"]:
        raise CheckFailed(f"{report['n_fail']} coupling tuples disagree", [path])
    return [path]


def cmd_bae_demo(cfg, seed, out, threads):
    b = cfg.bae
    seq = dataclasses.replace(cfg.sequence, tau1=b.duration, kappa_rate=b.kappa2_total / b.duration)
    strobe, cont = bae_pair(seq, b.n_traj, seed, max_slice_angle=b.max_slice_angle, threads=threads,
                           window_model=b.window_model)
    rows = [[t, k2, vs, ms, vc, mc, ideal] for t, k2, vs, ms, vc, mc, ideal in
            zip(strobe.time, strobe.kappa2, strobe.variance, strobe.mc_variance, cont.variance, cont.mc_variance,
                strobe.ideal)]
    header = ["time", "kappa2", "strobe_variance", "strobe_mc_variance", "continuous_variance",
              "continuous_mc_variance", "ideal_qnd_variance"]
    series = {
        f"stroboscopic, duty {seq.duty_factor:g}": (strobe.variance, None),
        "continuous": (cont.variance, None),
        "ideal QND": (strobe.ideal, None),
    }
    return [
        write_csv(out / "bae.csv", header, rows),
        lines_svg(out / "bae.svg", strobe.kappa2, series, "integrated kappa^2", "measured-quadrature variance",
                  "Stroboscopic vs continuous probing"),
        write_json(out / "bae_summary.json", {
            "strobe_final_excess": strobe.final_excess,
            "continuous_final_excess": cont.final_excess,
            "ideal_final": float(strobe.ideal[-1]),
            "window_model": b.window_model,
        }),
    ]


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "oracle-check": cmd_oracle_check,
    "bae-demo": cmd_bae_demo,
}


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pqspin", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="INI file; defaults apply when omitted")
        p.add_argument("--seed", type=_seed, default=None, help="overrides [run] seed")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--threads", type=int, default=None, help=f"worker threads (or ${THREADS_ENV})")
        p.add_argument("--strict", action="store_true", help="reject unknown sections and keys")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, strict=args.strict)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = cfg.run.seed if args.seed is None else args.seed
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    code = EXIT_OK
    try:
        paths = HANDLERS[args.command](cfg, seed, out, args.threads)
    except CheckFailed as exc:
        print(f"check failed: {exc.args[0]}", file=sys.stderr)
        paths, code = exc.args[1], EXIT_CHECK
    except (ConfigurationError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AccuracyError, StatisticalPowerError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    paths.append(write_json(out / "resolved_config.json", cfg.to_dict()))
    manifest = {
        "command": args.command,
        "config_digest": cfg.digest(),
        "seed": seed,
        "artifact_paths": sorted(p.relative_to(out).as_posix() for p in paths),
        "tool_version": __version__,
        "format_version": FORMAT_VERSION,
    }
    write_json(out / "manifest.json", manifest)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
