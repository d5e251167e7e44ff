"""How often does the full three-coupling oracle protocol pass across seeds?

Every comparison is a 3-sigma test, so with a few hundred of them an occasional
failure is expected even for a correct estimator. This prints the per-seed
result, the pooled z-score spread, and the pass fraction.

    python3 scripts/oracle_pass_rate.py --seeds 20 [--n-traj 1000000]
"""

import argparse

import numpy as np

from pqspin.validation import oracle_check


def zscores(report):
    for row in report["rows"]:
        if row["mc_variance_stderr"] > 0:
            yield (row["mc_variance"] - row["analytic_variance"]) / row["mc_variance_stderr"]
        for m in row["means"]:
            if m["mc_mean_stderr"] > 0:
                yield (m["mc_mean"] - m["analytic_mean"]) / m["mc_mean_stderr"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--first", type=int, default=0)
    ap.add_argument("--n-traj", type=int, default=1_000_000)
    args = ap.parse_args()
    passed, pooled = 0, []
    for seed in range(args.first, args.first + args.seeds):
        report = oracle_check(n_traj=args.n_traj, seed=seed)
        z = np.fromiter(zscores(report), float)
        pooled.append(z)
        passed += report["pass"]
        grid_ok = all(r["grid_pass"] and all(m["grid_pass"] for m in r["means"]) for r in report["rows"])
        print(f"seed {seed:3d}: {'pass' if report['pass'] else 'FAIL'}  failing tuples {report['n_fail']:2d}  "
              f"max |z| {np.abs(z).max():.2f}  grid {'ok' if grid_ok else 'BAD'}", flush=True)
    z = np.concatenate(pooled)
    print(f"\npass fraction {passed}/{args.seeds}; pooled z: n={z.size} sd={z.std():.3f} "
          f"P(|z|>3)={np.mean(np.abs(z) > 3):.4f} (normal 0.0027)")


if __name__ == "__main__":
    main()
