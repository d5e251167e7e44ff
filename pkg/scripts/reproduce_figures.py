"""Run the sweep, duration comparison and strobing demo into one directory.

    python3 scripts/reproduce_figures.py --out results/ [--config configs/calibrated.ini] [--threads 4]
"""

import argparse
import sys
from pathlib import Path

from pqspin import cli

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--config", type=Path, default=ROOT / "configs" / "calibrated.ini")
    ap.add_argument("--seed", default="0")
    ap.add_argument("--threads", default="1")
    args = ap.parse_args()
    worst = 0
    for command in ("sweep", "compare", "bae-demo"):
        code = cli.run([command, "--config", str(args.config), "--seed", args.seed, "--threads", args.threads,
                        "--out", str(args.out / command)])
        print(f"{command}: exit {code} -> {args.out / command}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
