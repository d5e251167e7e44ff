"""CSV / JSON / SVG writers.

CSV floats are written with nine significant digits and JSON with sorted keys,
so identical inputs give identical bytes. SVGs are emitted with a fixed hash
salt and no date metadata for the same reason.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FORMAT_VERSION = 1
plt.rcParams["svg.hashsalt"] = "pqspin"
plt.rcParams["svg.fonttype"] = "path"


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".9g")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n")
    return path


def write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def heatmap_svg(path: Path, tau1, tau3, values, title: str) -> Path:
    """Cells indexed ``values[i3][i1]``; axes in ms, colour in dB."""
    values = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 5.0))
    im = ax.imshow(values, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(tau1)), [f"{t * 1e3:.2f}" for t in tau1], rotation=45)
    ax.set_yticks(range(len(tau3)), [f"{t * 1e3:.2f}" for t in tau3])
    ax.set_xlabel("tau1 (ms)")
    ax.set_ylabel("tau3 (ms)")
    ax.set_title(title)
    for i3 in range(values.shape[0]):
        for i1 in range(values.shape[1]):
            ax.text(i1, i3, f"{values[i3, i1]:.1f}", ha="center", va="center", fontsize=6, color="w")
    fig.colorbar(im, ax=ax, label="Wineland squeezing (dB)")
    fig.tight_layout()
    return _save(fig, path)


def lines_svg(path: Path, x, series, xlabel: str, ylabel: str, title: str) -> Path:
    """``series`` maps a label to ``(y, yerr_or_None)``."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, (y, err) in series.items():
        if err is None:
            ax.plot(x, y, label=label)
        else:
            ax.errorbar(x, y, yerr=err, marker="o", ms=3, capsize=2, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)
