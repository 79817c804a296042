"""Figure-style output: one line plot per sweep with a median +- IQR band."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .runner import read_results

__all__ = ["plot_results", "SchemaError"]


class SchemaError(ValueError):
    pass


REQUIRED = {"axis", "value", "seed", "metric", "metric_value"}


def plot_results(
    results_path: str | Path,
    out_path: str | Path,
    title: str = "",
    ylabel: str = "",
    logy: bool = False,
) -> Path:
    """Render a sweep results CSV; each metric becomes one series."""
    rows = read_results(results_path)
    if not rows:
        raise SchemaError("empty results csv")
    missing = REQUIRED - set(rows[0].keys())
    if missing:
        raise SchemaError(f"results csv missing columns {sorted(missing)}")
    axis_name = rows[0]["axis"]
    metrics = sorted({r["metric"] for r in rows})
    fig, ax = plt.subplots(figsize=(6, 4))
    for metric in metrics:
        per_value: dict[float, list[float]] = {}
        for r in rows:
            if r["metric"] != metric:
                continue
            per_value.setdefault(float(r["value"]), []).append(float(r["metric_value"]))
        xs = sorted(per_value)
        med = [float(np.median(per_value[x])) for x in xs]
        q25 = [float(np.percentile(per_value[x], 25)) for x in xs]
        q75 = [float(np.percentile(per_value[x], 75)) for x in xs]
        if metric == "reference":
            ax.plot(xs, med, "k--", label="reference")
            continue
        (line,) = ax.plot(xs, med, "o-", label=metric)
        ax.fill_between(xs, q25, q75, alpha=0.25, color=line.get_color())
    ax.set_xlabel(axis_name)
    ax.set_ylabel(ylabel or "metric")
    if logy:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path
