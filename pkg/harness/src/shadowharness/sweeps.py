"""Canned sweeps reproducing the headline experiment shapes.

Each factory returns a SweepSpec whose commands run the estimation CLI and
whose metrics are read back from its reports.
"""

from __future__ import annotations

from .runner import SweepSpec, kv_estimate, kv_metric, csv_metric

__all__ = [
    "fidelity_vs_n",
    "fidelity_vs_noise",
    "entropy_vs_budget",
    "derandomized_vs_random",
]


def fidelity_vs_n(sizes=(10, 30, 50, 100), seeds=range(5), shots=2000, k=10, workers=2) -> SweepSpec:
    """Flat GHZ self-fidelity curve: constant shot budget across system sizes."""

    def command(n, seed, workdir):
        argv = [
            "fidelity", "--state", f"ghz:{n}", "--target", f"ghz:{n}",
            "--shots", str(shots), "--seed", str(seed), "--k", str(k), "--out", "fid",
        ]
        return [(argv, [("fidelity", kv_estimate("fid.kv", f"ghz:{n}"))])]

    return SweepSpec(
        name="fidelity_vs_n", axis="n", grid=list(sizes), seeds=list(seeds),
        command=command, workers=workers, reference=lambda n: 1.0,
    )


def fidelity_vs_noise(ps=(0.0, 0.25, 0.5, 0.75, 1.0), seeds=range(5), n=10, shots=60_000, k=10, workers=2) -> SweepSpec:
    """Estimated GHZ fidelity tracking the phase-error rate (truth 1 - p)."""

    def command(p, seed, workdir):
        argv = [
            "fidelity", "--state", f"ghz-noisy:{n}:{p:g}", "--target", f"ghz:{n}",
            "--shots", str(shots), "--seed", str(seed), "--k", str(k), "--out", "fid",
        ]
        return [(argv, [("fidelity", kv_estimate("fid.kv", f"ghz:{n}"))])]

    return SweepSpec(
        name="fidelity_vs_noise", axis="p", grid=list(ps), seeds=list(seeds),
        command=command, workers=workers, reference=lambda p: 1.0 - p,
    )


def entropy_vs_budget(
    budgets=(1000, 2500, 5000, 10_000), seeds=range(5), n=10, k=10, groups=50, workers=2
) -> SweepSpec:
    """Half-chain entropy of a GHZ state: shadow vs grouped-repetition baseline."""
    half = "+".join(str(q) for q in range(n // 2))

    def command(shots, seed, workdir):
        subs = workdir / "subs.txt"
        subs.write_text(f"# subsystems v1 n={n}\n" + " ".join(str(q) for q in range(n // 2)) + "\n")
        shadow = [
            "simulate", "--state", f"ghz:{n}", "--primitive", "pauli",
            "--shots", str(shots), "--seed", str(seed), "--out", "shadow.txt",
        ]
        ent = ["entropy", "--shadow", "shadow.txt", "--subsystems", "subs.txt",
               "--k", str(k), "--out", "ent"]
        reps = max(2, shots // groups)
        grouped = [
            "simulate", "--state", f"ghz:{n}", "--primitive", "pauli",
            "--groups", str(groups), "--repetitions", str(reps),
            "--seed", str(seed + 5000), "--out", "grouped.txt",
        ]
        entb = ["entropy", "--shadow", "grouped.txt", "--subsystems", "subs.txt",
                "--estimator", "brydges", "--out", "entb"]
        return [
            (shadow, []),
            (ent, [("shadow_entropy", csv_metric("ent.csv", "subsystem", half, "entropy_bits"))]),
            (grouped, []),
            (entb, [("brydges_entropy", csv_metric("entb.csv", "subsystem", half, "entropy_bits"))]),
        ]

    return SweepSpec(
        name="entropy_vs_budget", axis="shots", grid=list(budgets), seeds=list(seeds),
        command=command, workers=workers, reference=lambda shots: 1.0,
    )


def derandomized_vs_random(targets=(2, 5, 10), seeds=range(5), sites=8, max_rows=6000, workers=2) -> SweepSpec:
    """Measurement rows needed to hit every Schwinger observable T times."""

    def command(target, seed, workdir):
        obs = ["schwinger-obs", "--sites", str(sites), "--out", "obs.txt"]
        der = ["derandomize", "--observables", "obs.txt", "--hit-target", str(target),
               "--out", "derand.txt"]
        der_stats = ["scheme-stats", "--observables", "obs.txt", "--scheme", "derand.txt",
                     "--hit-target", str(target), "--out", "derand_stats"]
        rand = ["random-scheme", "--observables", "obs.txt", "--rows", str(max_rows),
                "--seed", str(seed), "--out", "random.txt"]
        rand_stats = ["scheme-stats", "--observables", "obs.txt", "--scheme", "random.txt",
                      "--hit-target", str(target), "--out", "random_stats"]
        return [
            (obs, []),
            (der, []),
            (der_stats, [("derandomized_rows", kv_metric("derand_stats.kv", "rows_to_target"))]),
            (rand, []),
            (rand_stats, [("random_rows", kv_metric("random_stats.kv", "rows_to_target"))]),
        ]

    return SweepSpec(
        name="derandomized_vs_random", axis="hit_target", grid=list(targets),
        seeds=list(seeds), command=command, workers=workers,
    )
