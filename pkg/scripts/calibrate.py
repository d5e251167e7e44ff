"""Fit kappa_rate and depumping so the two-pulse optimum lands on the target.

    python3 scripts/calibrate.py configs/calibrated.ini
"""

import argparse
import dataclasses
import json

import numpy as np

from pqspin.config import load_config
from pqspin.experiment import predict_metrics
from pqspin.experiment.calibration import calibrate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    args = ap.parse_args()
    cfg = load_config(args.config)
    cal = calibrate(cfg.sequence, cfg.decoherence, cfg.ensemble, cfg.calibration.target_tau1,
                    cfg.calibration.target_db, max_substeps=cfg.run.max_substeps)
    seq, dec = cal.apply(cfg.sequence, cfg.decoherence)
    print(json.dumps(dataclasses.asdict(cal), indent=2, sort_keys=True))

    print("\n tau1 (ms)   two-pulse dB")
    for t1 in np.linspace(0.2e-3, 3.0e-3, 15):
        m = predict_metrics(dataclasses.replace(seq, tau1=t1, tau3=0.0), dec, cfg.ensemble)
        print(f"  {t1 * 1e3:7.2f}   {m.wineland_db:8.3f}")


if __name__ == "__main__":
    main()
