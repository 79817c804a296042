"""Sweep runner: invoke the estimation CLI per grid point and seed, collect
metrics from its report files, and keep a verbatim manifest of every call.

The harness deliberately computes no physics: every metric is read back from
CLI outputs, and commands talk to the CLI binary through subprocess + files
only. Grid points run in a bounded worker pool; results are keyed by
(axis value, seed) so collection order never matters.
"""

from __future__ import annotations

import csv
import shlex
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["SweepSpec", "run_sweep", "replay_manifest", "read_results", "summarize"]

CLI = "shadowkit"
MANIFEST_NAME = "manifest.txt"
RESULTS_NAME = "results.csv"
SUMMARY_NAME = "summary.csv"


@dataclass
class SweepSpec:
    """One sweep: an axis, its value grid, seeds, and the command template.

    ``command(value, seed, workdir) -> list of (argv, metric extractors)``
    where each extractor is (metric name, relative path, key) pulling one
    number out of a ``.kv`` report or a CSV column aggregate.
    """

    name: str
    axis: str
    grid: list
    seeds: list[int]
    command: callable
    workers: int = 2
    reference: callable | None = None  # optional truth value per axis point

    def __post_init__(self):
        if not self.grid:
            raise ValueError("sweep grid must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")


class CliFailure(RuntimeError):
    pass


def _run_command(argv: list[str], cwd: Path) -> str:
    proc = subprocess.run([CLI, *argv], cwd=cwd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise CliFailure(
            f"{CLI} {' '.join(argv)} failed with code {proc.returncode}:\n{proc.stderr}"
        )
    return shlex.join([CLI, *argv])


def read_kv(path: Path) -> dict[str, str]:
    out = {}
    for line in path.read_text().splitlines():
        key, _, value = line.partition(" ")
        out[key] = value
    return out


def kv_metric(path: str, key: str):
    """Extractor: one named value from a .kv report."""

    def extract(workdir: Path) -> float:
        kv = read_kv(workdir / path)
        if key not in kv:
            raise CliFailure(f"{path} has no key {key!r}")
        return float(kv[key].split()[-1])

    return extract


def kv_estimate(path: str, target: str):
    """Extractor: 'estimate <target> <value>' line from a .kv report."""

    def extract(workdir: Path) -> float:
        for line in (workdir / path).read_text().splitlines():
            toks = line.split()
            if len(toks) == 3 and toks[0] == "estimate" and toks[1] == target:
                return float(toks[2])
        raise CliFailure(f"{path} has no estimate for {target!r}")

    return extract


def csv_metric(path: str, match_col: str, match_val: str, value_col: str):
    """Extractor: one cell of a CSV report row."""

    def extract(workdir: Path) -> float:
        with open(workdir / path) as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        header = rows[0]
        ci, cv = header.index(match_col), header.index(value_col)
        for row in rows[1:]:
            if row[ci] == match_val:
                return float(row[cv])
        raise CliFailure(f"{path}: no row with {match_col}={match_val}")

    return extract


def _one_point(spec: SweepSpec, value, seed: int, workdir: Path):
    point_dir = workdir / f"{spec.axis}_{value}_s{seed}".replace(" ", "")
    point_dir.mkdir(parents=True, exist_ok=True)
    commands = spec.command(value, seed, point_dir)
    subdir = str(point_dir.relative_to(workdir))
    manifest_lines = []
    # files written by the sweep itself (before any CLI call) are inputs the
    # replay must restore rather than regenerate
    for existing in sorted(p for p in point_dir.rglob("*") if p.is_file()):
        manifest_lines.append((subdir, f"INPUT {existing.relative_to(point_dir)}"))
    metrics = {}
    for argv, extractors in commands:
        manifest_lines.append((subdir, _run_command(argv, point_dir)))
        for name, extract in extractors:
            metrics[name] = extract(point_dir)
    return manifest_lines, metrics


def run_sweep(spec: SweepSpec, workdir: str | Path) -> Path:
    """Execute the sweep; returns the results CSV path.

    Writes ``results.csv`` (axis, value, seed, metric, value), a
    median/IQR ``summary.csv``, and ``manifest.txt`` with every CLI call.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    jobs = [(value, seed) for value in spec.grid for seed in spec.seeds]
    results = {}
    manifest: dict[tuple, list] = {}
    with ThreadPoolExecutor(max_workers=spec.workers) as pool:
        futures = {
            pool.submit(_one_point, spec, value, seed, workdir): (value, seed)
            for value, seed in jobs
        }
        for fut, key in futures.items():
            manifest[key], results[key] = fut.result()
    man_path = workdir / MANIFEST_NAME
    man_lines = []
    for value, seed in jobs:  # deterministic manifest order
        for subdir, line in manifest[(value, seed)]:
            man_lines.append(f"{subdir}\t{line}")
    man_path.write_text("\n".join(man_lines) + "\n")

    res_path = workdir / RESULTS_NAME
    with open(res_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis", "value", "seed", "metric", "metric_value"])
        for value, seed in jobs:
            for metric, mval in results[(value, seed)].items():
                writer.writerow([spec.axis, value, seed, metric, f"{mval:.10g}"])
            if spec.reference is not None:
                writer.writerow([spec.axis, value, seed, "reference", f"{spec.reference(value):.10g}"])
    summarize(res_path, workdir / SUMMARY_NAME)
    return res_path


def read_results(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return list(csv.DictReader(fh))


def summarize(results_path: str | Path, out_path: str | Path) -> Path:
    """Aggregate per (axis value, metric): median and interquartile range."""
    rows = read_results(results_path)
    if not rows:
        raise ValueError("empty results csv")
    grouped: dict[tuple, list[float]] = {}
    for row in rows:
        grouped.setdefault((row["value"], row["metric"]), []).append(float(row["metric_value"]))
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["value", "metric", "median", "q25", "q75"])
        for (value, metric), vals in grouped.items():
            q25, med, q75 = np.percentile(vals, [25, 50, 75])
            writer.writerow([value, metric, f"{med:.10g}", f"{q25:.10g}", f"{q75:.10g}"])
    return Path(out_path)


def replay_manifest(workdir: str | Path, fresh: str | Path) -> bool:
    """Re-run every manifest line in a fresh tree; compare artifacts byte-wise.

    ``INPUT`` lines restore sweep-written input files from the original run;
    command lines re-execute the recorded CLI calls. Returns True when every
    file in the replayed point directories matches the original run exactly.
    """
    workdir = Path(workdir)
    fresh = Path(fresh)
    fresh.mkdir(parents=True, exist_ok=True)
    lines = (workdir / MANIFEST_NAME).read_text().splitlines()
    for line in lines:
        subdir, command = line.split("\t", 1)
        target = fresh / subdir
        target.mkdir(parents=True, exist_ok=True)
        if command.startswith("INPUT "):
            rel = command[len("INPUT "):]
            (target / rel).parent.mkdir(parents=True, exist_ok=True)
            (target / rel).write_bytes((workdir / subdir / rel).read_bytes())
            continue
        proc = subprocess.run(shlex.split(command), cwd=target, capture_output=True, text=True)
        if proc.returncode != 0:
            raise CliFailure(f"replay failed: {command}\n{proc.stderr}")
    identical = True
    for line in lines:
        subdir, _ = line.split("\t", 1)
        for new_file in sorted((fresh / subdir).rglob("*")):
            if not new_file.is_file():
                continue
            old_file = workdir / subdir / new_file.relative_to(fresh / subdir)
            if not old_file.exists() or old_file.read_bytes() != new_file.read_bytes():
                identical = False
    return identical
