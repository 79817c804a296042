"""Secondary acceptance: regenerate the flat fidelity-vs-n curve and the
1 - p noise curve purely from CLI outputs, with plots and a byte-identical
manifest replay. Run with ``pytest -v -s``."""

import time

import numpy as np

from shadowharness.plots import plot_results
from shadowharness.runner import read_results, replay_manifest, run_sweep
from shadowharness.sweeps import fidelity_vs_n, fidelity_vs_noise


def _medians(rows, metric):
    per = {}
    for r in rows:
        if r["metric"] == metric:
            per.setdefault(float(r["value"]), []).append(float(r["metric_value"]))
    return {v: float(np.median(vals)) for v, vals in per.items()}


def test_secondary_fidelity_curves(tmp_path):
    t0 = time.perf_counter()

    spec_n = fidelity_vs_n(sizes=(10, 30, 50, 100), seeds=range(3), shots=2000, workers=2)
    res_n = run_sweep(spec_n, tmp_path / "vs_n")
    rows = read_results(res_n)
    med = _medians(rows, "fidelity")
    flat_ok = all(abs(med[n] - 1.0) <= 0.1 for n in (10, 30, 50, 100))
    errs = {n: abs(med[n] - 1.0) for n in sorted(med)}
    progression = list(errs.values())
    no_growth = not all(a < b for a, b in zip(progression, progression[1:]))
    img_n = plot_results(res_n, tmp_path / "vs_n" / "fidelity_vs_n.png",
                         "GHZ self-fidelity, constant 2000-shot budget", "fidelity")

    spec_p = fidelity_vs_noise(ps=(0.0, 0.25, 0.5, 0.75, 1.0), seeds=range(3), workers=2)
    res_p = run_sweep(spec_p, tmp_path / "vs_p")
    rows_p = read_results(res_p)
    med_p = _medians(rows_p, "fidelity")
    track_ok = all(abs(med_p[p] - (1.0 - p)) <= 0.1 for p in (0.0, 0.25, 0.5, 0.75, 1.0))
    img_p = plot_results(res_p, tmp_path / "vs_p" / "fidelity_vs_noise.png",
                         "noisy-GHZ fidelity vs phase-error rate", "fidelity")

    replay_ok = replay_manifest(tmp_path / "vs_n", tmp_path / "vs_n_replay")
    replay_ok &= replay_manifest(tmp_path / "vs_p", tmp_path / "vs_p_replay")

    elapsed = time.perf_counter() - t0
    ok = flat_ok and no_growth and track_ok and replay_ok and img_n.exists() and img_p.exists()
    print(
        f"\nACCEPTANCE secondary-fidelity-curves: {'PASS' if ok else 'FAIL'} "
        f"({elapsed:.1f}s < 900s) [flat medians {med}; noise medians "
        f"{ {p: round(v, 3) for p, v in med_p.items()} }; replay={replay_ok}]"
    )
    assert ok
    assert elapsed < 900
