"""Command-line surface tying acquisition, estimation, planning and
derandomization together.

Artifacts embed the resolved seed and the full configuration line, so any
output can be regenerated byte-identically by replaying that line. Exit
codes: 0 ok, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as skio
from .acquisition import MeasurementScheme, acquire_clifford, acquire_pauli, acquire_scheme
from .derandomize import derandomize, schwinger_observables
from .linear import EstimationReport, predict_linear
from .nonlinear import brydges_purity, estimate_renyi2
from .oracles import (
    StabilizerOracle,
    parse_state_descriptor,
    random_witness,
    rotated_ghz_state,
)
from .pauli import WeightedPauliSum
from .planner import plan_linear
from .rng import random_seed, stream

USAGE_EXIT, DATA_EXIT, INTERNAL_EXIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _config_line(args: argparse.Namespace, names: list[str]) -> str:
    parts = [args.command]
    for name in names:
        value = getattr(args, name.replace("-", "_"))
        if value is None or value is False:
            continue
        flag = f"--{name}"
        if value is True:
            parts.append(flag)
        elif isinstance(value, list):
            parts.append(flag)
            parts.extend(str(v) for v in value)
        else:
            parts.extend([flag, str(value)])
    return " ".join(parts)


def _resolve_seed(args) -> int:
    if args.seed is None:
        args.seed = random_seed()
    return args.seed


def _write_report(prefix: str, report: EstimationReport, config: str) -> None:
    kv = [
        f"config {config}",
        f"kind {report.dataset_kind}",
        f"n {report.n}",
        f"seed {report.seed}",
        f"state {report.state_descriptor}",
        f"K {report.k}",
        f"N_per_batch {report.n_per_batch}",
        f"shots_used {report.shots_used}",
    ]
    for rec in report.records:
        kv.append(f"estimate {rec.target_id} {rec.estimate:.10g}")
    skio.write_text(prefix + ".kv", "\n".join(kv) + "\n")
    csv = [f"# config {config}", "target_id,estimate,K,N,kind"]
    for rec in report.records:
        csv.append(f"{rec.target_id},{rec.estimate:.10g},{report.k},{report.shots_used},{rec.kind}")
    skio.write_text(prefix + ".csv", "\n".join(csv) + "\n")


def _cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    config = _config_line(
        args, ["state", "primitive", "shots", "seed", "scheme", "groups", "repetitions", "out"]
    )
    state = parse_state_descriptor(args.state)
    if args.scheme:
        scheme = skio.read_scheme_file(args.scheme, repetitions=args.repetitions)
        ds = acquire_scheme(state, scheme, seed, workers=args.workers)
    elif args.groups:
        rows = stream(seed, "scheme-rows", 0).integers(1, 4, size=(args.groups, state.n), dtype=np.uint8)
        ds = acquire_scheme(state, MeasurementScheme(rows, args.repetitions), seed, workers=args.workers)
    elif args.primitive == "pauli":
        ds = acquire_pauli(state, args.shots, seed, workers=args.workers)
    else:
        ds = acquire_clifford(state, args.shots, seed, workers=args.workers)
    skio.write_shadow_file(args.out, ds, config)
    print(f"wrote {len(ds)} {ds.kind} snapshots to {args.out} (seed={seed})")
    return 0


def _cmd_predict(args) -> int:
    ds = skio.read_shadow_file(args.shadow)
    targets, labels = [], []
    for path in args.observables:
        obs = skio.read_observables_file(path)
        if obs.n != ds.n:
            raise skio.DataFormatError(path, 1, f"observable n={obs.n} but shadow n={ds.n}")
        targets.append(obs)
        labels.append(path)
    report = predict_linear(ds, targets, args.k, labels=labels)
    config = _config_line(args, ["shadow", "observables", "k", "out"])
    _write_report(args.out, report, config)
    for rec in report.records:
        print(f"{rec.target_id}: {rec.estimate:.6g}")
    return 0


def _cmd_fidelity(args) -> int:
    seed = _resolve_seed(args)
    config = _config_line(args, ["state", "target", "shots", "seed", "k", "shadow", "out"])
    target_oracle = parse_state_descriptor(args.target)
    if not isinstance(target_oracle, StabilizerOracle):
        raise ValueError(f"fidelity target {args.target!r} must be a stabilizer state")
    if args.shadow:
        ds = skio.read_shadow_file(args.shadow)
    else:
        if not args.state or not args.shots:
            raise ValueError("fidelity needs either --shadow or --state plus --shots")
        state = parse_state_descriptor(args.state)
        ds = acquire_clifford(state, args.shots, seed, workers=args.workers)
    if ds.kind != "clifford":
        raise skio.DataFormatError(args.shadow or "<memory>", 1, "clifford dataset required")
    report = predict_linear(ds, [target_oracle.state], args.k, labels=[args.target])
    _write_report(args.out, report, config)
    print(f"fidelity with {args.target}: {report.records[0].estimate:.6g}")
    return 0


def _cmd_entropy(args) -> int:
    ds = skio.read_shadow_file(args.shadow)
    if ds.kind != "pauli":
        raise skio.DataFormatError(args.shadow, 1, "pauli dataset required")
    n, subs = skio.read_subsystems_file(args.subsystems)
    if n != ds.n:
        raise skio.DataFormatError(args.subsystems, 1, f"subsystems n={n} but shadow n={ds.n}")
    config = _config_line(args, ["shadow", "subsystems", "k", "estimator", "out"])
    rows = [f"# config {config}", "subsystem,purity,entropy_bits,K,N"]
    kv = [f"config {config}", f"seed {ds.seed}", f"state {ds.state_descriptor}"]
    for sub in subs:
        label = "+".join(str(q) for q in sub)
        if args.estimator == "brydges":
            purity = brydges_purity(ds, sub)
            from .nonlinear import renyi2_entropy

            entropy = renyi2_entropy(purity, len(sub))
        else:
            purity, entropy = estimate_renyi2(ds, sub, args.k)
        rows.append(f"{label},{purity:.10g},{entropy:.10g},{args.k},{len(ds)}")
        kv.append(f"entropy {label} {entropy:.10g}")
        print(f"A={{{label}}}: purity={purity:.4f} entropy={entropy:.4f} bits")
    skio.write_text(args.out + ".csv", "\n".join(rows) + "\n")
    skio.write_text(args.out + ".kv", "\n".join(kv) + "\n")
    return 0


def _cmd_plan(args) -> int:
    targets = []
    for path in args.observables:
        targets.append(skio.read_observables_file(path))
    plan = plan_linear(targets, args.epsilon, args.delta, args.primitive)
    worst = max(range(len(plan.bounds)), key=lambda i: plan.bounds[i][1])
    lines = [
        f"K {plan.k}",
        f"N_per_batch {plan.n_per_batch}",
        f"N_total {plan.n_total}",
        f"max_bound {plan.max_bound:.10g}",
        f"bound_kind {plan.bounds[worst][0]}",
        f"epsilon {args.epsilon:g}",
        f"delta {args.delta:g}",
        f"M {len(targets)}",
    ]
    text = "\n".join(lines)
    print(text)
    if args.out:
        skio.write_text(args.out, text + "\n")
    return 0


def _cmd_derandomize(args) -> int:
    obs = skio.read_observables_file(args.observables)
    strings = [p for _, p in obs.terms]
    scheme = derandomize(
        strings,
        epsilon=args.epsilon,
        measurements=args.measurements,
        hit_target=args.hit_target,
    )
    config = _config_line(
        args, ["observables", "epsilon", "measurements", "hit-target", "out"]
    )
    skio.write_scheme_file(args.out, scheme, config)
    print(f"wrote {scheme.rows.shape[0]} measurement rows to {args.out}")
    return 0


def _cmd_schwinger_obs(args) -> int:
    strings = schwinger_observables(args.sites)
    obs = WeightedPauliSum(args.sites, [(1.0, p) for p in strings])
    config = _config_line(args, ["sites", "out"])
    skio.write_observables_file(args.out, obs, config)
    print(f"wrote {len(obs)} observables for {args.sites} sites to {args.out}")
    return 0


def _cmd_random_scheme(args) -> int:
    seed = _resolve_seed(args)
    obs = skio.read_observables_file(args.observables)
    rows = stream(seed, "random-scheme", 0).integers(1, 4, size=(args.rows, obs.n), dtype=np.uint8)
    config = _config_line(args, ["observables", "rows", "seed", "out"])
    skio.write_scheme_file(args.out, MeasurementScheme(rows), config)
    print(f"wrote {args.rows} random rows to {args.out} (seed={seed})")
    return 0


def _cmd_scheme_stats(args) -> int:
    from .derandomize import count_hits, rows_to_reach

    obs = skio.read_observables_file(args.observables)
    scheme = skio.read_scheme_file(args.scheme)
    strings = [p for _, p in obs.terms]
    rows = scheme.row_strings()
    hits = count_hits(rows, strings)
    config = _config_line(args, ["observables", "scheme", "hit-target", "out"])
    kv = [
        f"config {config}",
        f"rows {len(rows)}",
        f"observables {len(strings)}",
        f"min_hits {int(hits.min())}",
        f"median_hits {float(np.median(hits)):g}",
    ]
    if args.hit_target is not None:
        needed = rows_to_reach(rows, strings, args.hit_target)
        kv.append(f"rows_to_target {-1 if needed is None else needed}")
    skio.write_text(args.out + ".kv", "\n".join(kv) + "\n")
    csv = [f"# config {config}", "observable,hits"]
    csv.extend(f"{p.letters},{int(h)}" for p, h in zip(strings, hits))
    skio.write_text(args.out + ".csv", "\n".join(csv) + "\n")
    print(f"min hits {int(hits.min())} over {len(strings)} observables in {len(rows)} rows")
    return 0


def _cmd_witness_demo(args) -> int:
    seed = _resolve_seed(args)
    config = _config_line(args, ["shots", "witnesses", "seed", "epsilon", "k", "out"])
    state, _ = rotated_ghz_state(stream(seed, "witness-state", 0))
    rho = state.dense_rho()
    wrng = stream(seed, "witness-draws", 0)
    witnesses = [random_witness(wrng) for _ in range(args.witnesses)]
    ds = acquire_clifford(state, args.shots, seed)
    report = predict_linear(
        ds, [w.matrix() for w in witnesses], args.k, labels=[f"w{i}" for i in range(len(witnesses))]
    )
    truths = [w.value(rho) for w in witnesses]
    errors = [abs(r.estimate - t) for r, t in zip(report.records, truths)]
    # Direct estimation at matched accuracy: Hoeffding with a union bound over
    # all M witnesses at joint failure probability delta = 0.05.
    m = len(witnesses)
    direct_per = int(np.ceil(np.log(2 * m / 0.05) / (2 * args.epsilon**2)))
    rows = [f"# config {config}", "witness,estimate,truth,abs_error"]
    for i, (rec, truth, err) in enumerate(zip(report.records, truths, errors)):
        rows.append(f"w{i},{rec.estimate:.10g},{truth:.10g},{err:.10g}")
    skio.write_text(args.out + ".csv", "\n".join(rows) + "\n")
    kv = [
        f"config {config}",
        f"seed {seed}",
        f"witnesses {m}",
        f"shots_total {args.shots}",
        f"max_abs_error {max(errors):.10g}",
        f"direct_shots_per_witness {direct_per}",
        f"direct_shots_total {direct_per * m}",
    ]
    skio.write_text(args.out + ".kv", "\n".join(kv) + "\n")
    print(
        f"max |error| over {m} witnesses: {max(errors):.4f}; "
        f"shadow shots {args.shots} vs direct {direct_per * m}"
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="shadowkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="acquire a snapshot dataset")
    sim.add_argument("--state", required=True)
    sim.add_argument("--primitive", choices=["pauli", "clifford"], default="pauli")
    sim.add_argument("--shots", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--scheme", help="measurement scheme file (fixed rows)")
    sim.add_argument("--groups", type=int, help="random rows for grouped acquisition")
    sim.add_argument("--repetitions", type=int, default=1)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    pre = sub.add_parser("predict", help="estimate Pauli-sum observables")
    pre.add_argument("--shadow", required=True)
    pre.add_argument("--observables", nargs="+", required=True)
    pre.add_argument("--k", type=int, default=10)
    pre.add_argument("--out", required=True)
    pre.set_defaults(func=_cmd_predict)

    fid = sub.add_parser("fidelity", help="estimate fidelity with a stabilizer target")
    fid.add_argument("--state")
    fid.add_argument("--target", required=True)
    fid.add_argument("--shots", type=int)
    fid.add_argument("--seed", type=int)
    fid.add_argument("--k", type=int, default=10)
    fid.add_argument("--shadow")
    fid.add_argument("--workers", type=int, default=1)
    fid.add_argument("--out", required=True)
    fid.set_defaults(func=_cmd_fidelity)

    ent = sub.add_parser("entropy", help="subsystem purities and Renyi-2 entropies")
    ent.add_argument("--shadow", required=True)
    ent.add_argument("--subsystems", required=True)
    ent.add_argument("--k", type=int, default=10)
    ent.add_argument("--estimator", choices=["shadow", "brydges"], default="shadow")
    ent.add_argument("--out", required=True)
    ent.set_defaults(func=_cmd_entropy)

    pl = sub.add_parser("plan", help="shot budget for target observables")
    pl.add_argument("--observables", nargs="+", required=True)
    pl.add_argument("--epsilon", type=float, required=True)
    pl.add_argument("--delta", type=float, required=True)
    pl.add_argument("--primitive", choices=["pauli", "clifford"], default="pauli")
    pl.add_argument("--out")
    pl.set_defaults(func=_cmd_plan)

    der = sub.add_parser("derandomize", help="compile a fixed measurement scheme")
    der.add_argument("--observables", required=True)
    der.add_argument("--epsilon", type=float)
    der.add_argument("--measurements", type=int)
    der.add_argument("--hit-target", type=int)
    der.add_argument("--out", required=True)
    der.set_defaults(func=_cmd_derandomize)

    sch = sub.add_parser("schwinger-obs", help="emit the Schwinger observable set")
    sch.add_argument("--sites", type=int, required=True)
    sch.add_argument("--out", required=True)
    sch.set_defaults(func=_cmd_schwinger_obs)

    rsc = sub.add_parser("random-scheme", help="uniform random measurement rows")
    rsc.add_argument("--observables", required=True, help="sets the qubit count")
    rsc.add_argument("--rows", type=int, required=True)
    rsc.add_argument("--seed", type=int)
    rsc.add_argument("--out", required=True)
    rsc.set_defaults(func=_cmd_random_scheme)

    sst = sub.add_parser("scheme-stats", help="hit counts of a scheme against observables")
    sst.add_argument("--observables", required=True)
    sst.add_argument("--scheme", required=True)
    sst.add_argument("--hit-target", type=int)
    sst.add_argument("--out", required=True)
    sst.set_defaults(func=_cmd_scheme_stats)

    wit = sub.add_parser("witness-demo", help="rotated-GHZ witness experiment")
    wit.add_argument("--shots", type=int, default=5000)
    wit.add_argument("--witnesses", type=int, default=50)
    wit.add_argument("--seed", type=int)
    wit.add_argument("--epsilon", type=float, default=0.1)
    wit.add_argument("--k", type=int, default=10)
    wit.add_argument("--out", required=True)
    wit.set_defaults(func=_cmd_witness_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and not (args.shots or args.scheme or args.groups):
        parser.error("simulate needs --shots, --scheme, or --groups")
    try:
        return args.func(args)
    except skio.DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return INTERNAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
