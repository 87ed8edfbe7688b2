"""Command line entry point: ``mectopo {gen,run,sweep-size,sweep-range,compare}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (
    ALGORITHMS,
    DEFAULT_XI_GRID,
    RNG_NAME,
    ExperimentConfig,
    generate_scenario,
    range_trend,
    read_results,
    results_to_csv,
    results_to_json,
    run_algorithms,
    run_experiment,
    summarize,
)
from .model import Scenario, ScenarioError


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v)


def _algos(text: str) -> tuple[str, ...]:
    names = tuple(v.strip() for v in text.split(",") if v.strip())
    unknown = [n for n in names if n not in ALGORITHMS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s): {', '.join(unknown)}")
    return names


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise SystemExit(f"error: cannot write {out}: {exc}")
    else:
        sys.stdout.write(text)


def _render(rows, fmt: str) -> str:
    return results_to_csv(rows) if fmt == "csv" else results_to_json(rows)


def _format_summary(summary, trend=None) -> str:
    lines = [f"{'algorithm':<10} {'N':>4} {'xi':>6} {'trials':>6} {'eq1_mean':>12} {'eq1_std':>10} {'model_mean':>12}"]
    for s in summary:
        lines.append(
            f"{s['algorithm']:<10} {s['n']:>4} {s['xi']:>6g} {s['trials']:>6} "
            f"{s['eq1_mean']:>12.3f} {s['eq1_std']:>10.3f} {s['model_mean']:>12.3f}"
        )
    if trend:
        lines.append("")
        lines.append("spearman(eq1_mean, xi):")
        for (algo, n), rho in trend.items():
            lines.append(f"  {algo:<10} N={n:<4} {rho:+.3f}")
    return "\n".join(lines) + "\n"


def cmd_gen(args) -> None:
    scenario = generate_scenario(args.seed, args.n, comm_range_m=args.xi)
    _emit(scenario.dumps(), args.out)


def cmd_run(args) -> None:
    if args.scenario:
        try:
            scenario = Scenario.load(args.scenario)
        except OSError as exc:
            raise SystemExit(f"error: cannot read {args.scenario}: {exc}")
        if args.xi is not None:
            scenario = scenario.with_range(args.xi)
    else:
        xi = 50.0 if args.xi is None else args.xi
        scenario = generate_scenario(args.seed, args.n, comm_range_m=xi)
    sid = f"seed{scenario.seed:016x}"
    options = {"leachc": {"ch_fraction": args.ch_fraction}}
    results = run_algorithms(scenario, args.algos, sid, args.timing, options)
    rows = [r for r, _ in results]
    if args.dump_tree:
        doc = {
            "rng": RNG_NAME,
            "scenario": scenario.to_dict(),
            "results": [
                {"result": json.loads(results_to_json([r]))[0], "tree": tree.to_dict()}
                for r, tree in results
            ],
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        _emit(_render(rows, args.format), args.out)


def _sweep(args, kind: str, xi_values) -> None:
    config = ExperimentConfig(
        kind=kind,
        n_values=args.n,
        xi_values=xi_values,
        trials=args.trials,
        seed=args.seed,
        algos=args.algos,
        output=args.out,
        format=args.format,
        jobs=args.jobs,
        timing=args.timing,
        options={"leachc": {"ch_fraction": args.ch_fraction}},
    )
    rows, summary = run_experiment(config)
    _emit(_render(rows, args.format), args.out)
    if args.out:
        trend = range_trend(summary) if kind == "range-sweep" else None
        sys.stderr.write(_format_summary(summary, trend))


def cmd_sweep_size(args) -> None:
    _sweep(args, "size-sweep", args.xi or (50.0,))


def cmd_sweep_range(args) -> None:
    _sweep(args, "range-sweep", args.xi or DEFAULT_XI_GRID)


def cmd_compare(args) -> None:
    path = Path(args.results)
    fmt = args.format or ("json" if path.suffix == ".json" else "csv")
    try:
        rows = read_results(path.read_text(), fmt)
    except OSError as exc:
        raise SystemExit(f"error: cannot read {path}: {exc}")
    summary = summarize(rows)
    trend = range_trend(summary)
    _emit(_format_summary(summary, trend), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mectopo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_default, sweep=False):
        p.add_argument("--seed", type=int, default=0)
        if sweep:
            p.add_argument("--n", type=_ints, default=n_default, help="comma-separated sizes")
            p.add_argument("--xi", type=_floats, default=None, help="comma-separated ranges (m)")
            p.add_argument("--trials", type=int, default=10)
            p.add_argument("--jobs", type=int, default=1, help="worker processes")
        else:
            p.add_argument("--n", type=int, default=n_default)
            p.add_argument("--xi", type=float, default=None, help="communication range (m)")
        p.add_argument("--out", default=None, help="output file (stdout if omitted)")

    def algo_opts(p):
        p.add_argument("--algos", type=_algos, default=tuple(ALGORITHMS))
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--ch-fraction", type=float, default=0.2, help="Leach-C head fraction")
        p.add_argument("--timing", action="store_true", help="record runtime_ms (breaks byte reproducibility)")

    p = sub.add_parser("gen", help="write a random scenario file")
    common(p, 20)
    p.set_defaults(func=cmd_gen, xi=50.0)

    p = sub.add_parser("run", help="run algorithms on one scenario")
    common(p, 20)
    algo_opts(p)
    p.add_argument("--scenario", default=None, help="scenario JSON file")
    p.add_argument("--dump-tree", action="store_true", help="write topology and shares as JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-size", help="experiment 1: vary N at fixed range")
    common(p, (20, 100), sweep=True)
    algo_opts(p)
    p.set_defaults(func=cmd_sweep_size)

    p = sub.add_parser("sweep-range", help="experiment 2: vary range at fixed N")
    common(p, (20,), sweep=True)
    algo_opts(p)
    p.set_defaults(func=cmd_sweep_range)

    p = sub.add_parser("compare", help="summary table from a results file")
    p.add_argument("results")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
