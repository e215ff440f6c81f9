"""Command-line front end: generate problems, run solves and sweeps, certify bounds.

Subcommands
    gen         write a synthetic problem directory (A.mtx, b.mtx, xstar.mtx, meta.json)
    solve       run one method on a problem directory, emitting report.json + trace.csv
    bench       run a methods x problems x seeds sweep from a JSON config
    certify     check a run's per-iteration contraction bounds (exit 0 iff satisfied)
    trace-plot  flatten report JSONs into long-format CSV of (k, seconds, rse)

Exit codes: 0 success/converged, 2 usage error, 3 stalled or non-converged,
4 size-guard refusal. Outputs are deterministic for fixed flags and seeds
except for wall-clock columns.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .cgls import CglsConfig
from .col_methods import COL_METHODS, run_col_method
from .errors import (
    GenerationError,
    RgsolveError,
    SizeGuardError,
    StalledError,
    SubsolverError,
    UsageError,
)
from .problems import (
    ProblemInstance,
    gen_randn,
    gen_smatrix,
    load_instance,
    make_consistent,
    make_inconsistent,
    save_instance,
)
from .row_methods import ROW_METHODS, run_row_method
from .selection import SelectionConfig
from .state import SolveReport, StopRule
from .theory import certificates_to_csv, certify_randomized, certify_run

RANDOMIZED_METHODS = ("rgrk", "rbk", "rgrcd", "rbcd")
ALL_METHODS = ROW_METHODS + COL_METHODS


def _json_dump(payload: dict, path: Path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _generate_matrix(kind, m, n, r, sigma1, sigma2, seed):
    if kind == "randn":
        return gen_randn(m, n, seed)
    if kind == "smatrix":
        rank = min(m, n) if r is None else r
        return gen_smatrix(m, n, rank, sigma1, sigma2, seed)
    raise UsageError(f"unknown generator kind {kind!r}")


def _build_instance(kind, m, n, r, sigma1, sigma2, inconsistent, noise_scale, seed):
    matrix = _generate_matrix(kind, m, n, r, sigma1, sigma2, seed)
    meta = {"generator": kind, "m": m, "n": n}
    if kind == "smatrix":
        meta.update({"r": min(m, n) if r is None else r, "sigma1": sigma1, "sigma2": sigma2})
    # The right-hand side uses its own stream so the matrix draw is unaffected.
    if inconsistent:
        return make_inconsistent(matrix, seed + 1, noise_scale=noise_scale, meta=meta)
    return make_consistent(matrix, seed + 1, meta=meta)


def _selection_config(args) -> SelectionConfig:
    theta = getattr(args, "theta", 0.5)
    return SelectionConfig(
        theta1=theta,
        theta2=theta,
        eta1=getattr(args, "eta1", 0.5),
        eta2=getattr(args, "eta2", 0.1),
        block_size=getattr(args, "block_size", 100),
    )


def _run_method(method, instance: ProblemInstance, config, stop, seed, record_steps=False):
    runner = run_row_method if method in ROW_METHODS else run_col_method
    return runner(
        method,
        instance.A,
        instance.b,
        config=config,
        stop=stop,
        x_star=instance.x_star,
        seed=seed,
        cgls_cfg=CglsConfig(),
        record_steps=record_steps,
    )


def _run_cell(method, instance, config, stop, base_seed, repeats, record_steps=False):
    """One (method, instance) cell: repeated runs for randomized methods, one otherwise."""
    runs = repeats if method in RANDOMIZED_METHODS else 1
    return [
        _run_method(method, instance, config, stop, base_seed + rep, record_steps)
        for rep in range(runs)
    ]


def _write_trace_csv(reports: list[SolveReport], path: Path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["run", "k", "rse", "set_size", "cumulative_seconds"])
        for run_idx, rep in enumerate(reports):
            for k, rse in enumerate(rep.rse_trace):
                set_size = rep.set_size_trace[k - 1] if k > 0 else ""
                writer.writerow([run_idx, k, repr(rse), set_size, repr(rep.iter_seconds[k])])


def _aggregate(reports: list[SolveReport]) -> dict:
    its = [rep.iterations for rep in reports]
    walls = [rep.wall_seconds for rep in reports]
    rses = [rep.final_rse for rep in reports]
    return {
        "runs": len(reports),
        "mean_iterations": sum(its) / len(its),
        "mean_wall_seconds": sum(walls) / len(walls),
        "mean_final_rse": sum(rses) / len(rses),
        "termination_reasons": sorted({rep.termination_reason for rep in reports}),
    }


def cmd_gen(args) -> int:
    instance = _build_instance(
        args.kind, args.m, args.n, args.r, args.sigma1, args.sigma2,
        args.inconsistent, args.noise_scale, args.seed,
    )
    out = save_instance(instance, args.out)
    case = "inconsistent" if args.inconsistent else "consistent"
    print(f"wrote {case} {args.kind} instance ({args.m}x{args.n}, seed {args.seed}) to {out}")
    return 0


def cmd_solve(args) -> int:
    instance = load_instance(args.problem_dir)
    if args.method not in ALL_METHODS:
        raise UsageError(f"unknown method {args.method!r}; expected one of {ALL_METHODS}")
    config = _selection_config(args)
    stop = StopRule(rse_tol=args.tol, max_iters=args.max_iters)
    reports = _run_cell(args.method, instance, config, stop, args.seed, args.repeats)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    aggregate = _aggregate(reports)
    _json_dump(
        {
            "method": args.method,
            "params": reports[0].params,
            "problem": {"directory": str(args.problem_dir), "consistent": instance.consistent},
            "stop": {"rse_tol": args.tol, "max_iters": args.max_iters},
            "aggregate": aggregate,
            "runs": [rep.to_dict() for rep in reports],
        },
        out / "report.json",
    )
    _write_trace_csv(reports, out / "trace.csv")

    label = " ".join(
        [args.method] + [f"{k}={v:g}" for k, v in reports[0].params.items()]
    )
    if len(reports) > 1:
        print(
            f"{label}: mean IT={aggregate['mean_iterations']:.1f} "
            f"mean CPU={aggregate['mean_wall_seconds']:.4f}s "
            f"mean RSE={aggregate['mean_final_rse']:.3e} ({len(reports)} runs)"
        )
    else:
        rep = reports[0]
        print(
            f"{label}: IT={rep.iterations} RSE={rep.final_rse:.3e} "
            f"reason={rep.termination_reason} CPU={rep.wall_seconds:.4f}s"
        )
    return 0 if all(rep.termination_reason == "converged" for rep in reports) else 3


def _method_entry_config(entry: dict) -> tuple[str, SelectionConfig]:
    method = entry.get("method")
    if method not in ALL_METHODS:
        raise UsageError(f"unknown method {method!r} in config")
    theta = float(entry.get("theta", 0.5))
    return method, SelectionConfig(
        theta1=theta,
        theta2=theta,
        eta1=float(entry.get("eta1", 0.5)),
        eta2=float(entry.get("eta2", 0.1)),
        block_size=int(entry.get("block_size", 100)),
    )


def _method_label(entry: dict) -> str:
    parts = [entry["method"]]
    for key in ("theta", "eta1", "eta2", "block_size"):
        if key in entry:
            parts.append(f"{key}={entry[key]:g}")
    return " ".join(parts)


def cmd_bench(args) -> int:
    with open(args.config, "r", encoding="ascii") as fh:
        config = json.load(fh)
    problems = config.get("problems", [])
    methods = config.get("methods", [])
    seeds = config.get("seeds", [])
    if not methods:
        raise UsageError("bench config lists no methods")
    if not problems:
        raise UsageError("bench config lists no problems")
    if not seeds:
        raise UsageError("bench config lists no seeds")
    stop = StopRule(
        rse_tol=float(config.get("tol", 1e-4)),
        max_iters=int(config.get("max_iters", 1_000_000)),
    )
    repeats = int(config.get("repeats", 30))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    any_failure = False
    for prob in problems:
        kind = prob.get("kind", "randn")
        m, n = int(prob["m"]), int(prob["n"])
        inconsistent = prob.get("case", "consistent") == "inconsistent"
        instances = []
        for seed in seeds:
            instances.append(_build_instance(
                kind, m, n, prob.get("r"), float(prob.get("sigma1", 1.25)),
                float(prob.get("sigma2", 1.0)), inconsistent,
                float(prob.get("noise_scale", 0.1)), int(seed),
            ))
        for entry in methods:
            method, sel_config = _method_entry_config(entry)
            cell_reports = []
            status = "ok"
            try:
                for seed, instance in zip(seeds, instances):
                    cell_reports.extend(
                        _run_cell(method, instance, sel_config, stop, int(seed), repeats)
                    )
            except RgsolveError as exc:
                status = f"error: {exc}"
                any_failure = True
            row = {
                "kind": kind,
                "m": m,
                "n": n,
                "case": "inconsistent" if inconsistent else "consistent",
                "method": method,
                "label": _method_label(entry),
                "seeds": len(seeds),
                "runs": len(cell_reports),
                "status": status,
            }
            if cell_reports:
                agg = _aggregate(cell_reports)
                row.update({
                    "mean_it": agg["mean_iterations"],
                    "mean_wall_seconds": agg["mean_wall_seconds"],
                    "mean_final_rse": agg["mean_final_rse"],
                    "reasons": "|".join(agg["termination_reasons"]),
                })
                if any(rep.termination_reason != "converged" for rep in cell_reports):
                    any_failure = True
            else:
                row.update({"mean_it": "", "mean_wall_seconds": "",
                            "mean_final_rse": "", "reasons": ""})
            rows.append(row)

    fields = ["kind", "m", "n", "case", "method", "label", "seeds", "runs",
              "mean_it", "mean_wall_seconds", "mean_final_rse", "reasons", "status"]
    with open(out / "results.csv", "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)

    # Trend summary: iteration-count ratios between method pairs on each problem.
    with open(out / "summary.csv", "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["kind", "m", "n", "case", "method_a", "method_b", "it_ratio"])
        by_problem: dict[tuple, list[dict]] = {}
        for row in rows:
            by_problem.setdefault((row["kind"], row["m"], row["n"], row["case"]), []).append(row)
        for key, group in by_problem.items():
            for i, row_a in enumerate(group):
                for row_b in group[i + 1:]:
                    if row_a["mean_it"] and row_b["mean_it"] and row_b["mean_it"] > 0:
                        ratio = repr(row_a["mean_it"] / row_b["mean_it"])
                    else:
                        ratio = ""
                    writer.writerow([*key, row_a["label"], row_b["label"], ratio])

    print(f"wrote {len(rows)} result rows to {out / 'results.csv'}")
    return 3 if any_failure else 0


def cmd_certify(args) -> int:
    instance = load_instance(args.problem_dir)
    if args.method not in ("rgdr", "rgdc", "rgrk", "rgrcd"):
        raise UsageError(
            "certification supports rgdr, rgdc (per-step) and rgrk, rgrcd (statistical)"
        )
    from .theory import CERTIFY_DIM_LIMIT

    if max(instance.A.m, instance.A.n) > CERTIFY_DIM_LIMIT:
        raise SizeGuardError(
            f"instance {instance.A.m}x{instance.A.n} exceeds the certification guard "
            f"(both dimensions must be <= {CERTIFY_DIM_LIMIT})"
        )
    config = _selection_config(args)
    stop = StopRule(rse_tol=args.tol, max_iters=args.max_iters)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.method in ("rgdr", "rgdc"):
        report = _run_method(args.method, instance, config, stop, args.seed, record_steps=True)
        certificates = certify_run(report, instance.A)
        certificates_to_csv(certificates, out / "certificates.csv")
        violations = sum(not cert.satisfied for cert in certificates)
        print(
            f"{args.method} theta={args.theta:g}: {len(certificates)} certificates, "
            f"{violations} violation(s)"
        )
        return 0 if violations == 0 else 3

    reports = _run_cell(args.method, instance, config, stop, args.seed, args.repeats,
                        record_steps=True)
    aggregate = certify_randomized(reports, instance.A)
    with open(out / "certificates.csv", "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "theta", "factor", "mean_contraction",
                         "std_error", "runs", "satisfied"])
        writer.writerow([
            aggregate.method, repr(aggregate.theta), repr(aggregate.factor),
            repr(aggregate.mean_contraction), repr(aggregate.std_error),
            aggregate.runs, int(aggregate.satisfied),
        ])
    print(
        f"{args.method} theta={args.theta:g}: mean contraction "
        f"{aggregate.mean_contraction:.6f} vs factor {aggregate.factor:.6f} "
        f"(+3se band, {aggregate.runs} runs): "
        f"{'satisfied' if aggregate.satisfied else 'VIOLATED'}"
    )
    return 0 if aggregate.satisfied else 3


def cmd_trace_plot(args) -> int:
    rows = []
    for path in args.reports:
        with open(path, "r", encoding="ascii") as fh:
            payload = json.load(fh)
        method = payload["method"]
        theta = payload.get("params", {}).get("theta", "")
        for run in payload["runs"]:
            for k, rse in enumerate(run["rse_trace"]):
                rows.append((method, theta, k, run["iter_seconds"][k], rse))
    rows.sort(key=lambda row: (row[0], str(row[1]), row[2]))
    with open(args.out, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "theta", "k", "cumulative_seconds", "rse"])
        for method, theta, k, seconds, rse in rows:
            writer.writerow([method, theta, k, repr(float(seconds)), repr(float(rse))])
    print(f"wrote {len(rows)} trace rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rgsolve",
        description="Greedy row/column iterative solvers with a reproducible benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic problem directory")
    gen.add_argument("--kind", choices=("randn", "smatrix"), required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--r", type=int, default=None, help="rank (smatrix; default min(m, n))")
    gen.add_argument("--sigma1", type=float, default=1.25, help="largest singular value (smatrix)")
    gen.add_argument("--sigma2", type=float, default=1.0, help="smallest singular value (smatrix)")
    gen.add_argument("--inconsistent", action="store_true",
                     help="add null-space noise to the right-hand side")
    gen.add_argument("--noise-scale", type=float, default=0.1,
                     help="noise norm relative to ||A x*|| (default 0.1)")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="run one method on a problem directory")
    solve.add_argument("problem_dir")
    solve.add_argument("--method", required=True)
    solve.add_argument("--theta", type=float, default=0.5)
    solve.add_argument("--eta1", type=float, default=0.5)
    solve.add_argument("--eta2", type=float, default=0.1)
    solve.add_argument("--block-size", dest="block_size", type=int, default=100)
    solve.add_argument("--tol", type=float, default=1e-4)
    solve.add_argument("--max-iters", dest="max_iters", type=int, default=1_000_000)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--repeats", type=int, default=1,
                       help="averaged repeat count for randomized methods")
    solve.add_argument("--out", required=True)
    solve.set_defaults(func=cmd_solve)

    bench = sub.add_parser("bench", help="run a methods x problems x seeds sweep")
    bench.add_argument("config", help="JSON config: problems, methods, seeds, tol, repeats")
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=cmd_bench)

    certify = sub.add_parser("certify", help="verify per-iteration contraction bounds")
    certify.add_argument("problem_dir")
    certify.add_argument("--method", required=True)
    certify.add_argument("--theta", type=float, default=0.5)
    certify.add_argument("--eta1", type=float, default=0.5)
    certify.add_argument("--eta2", type=float, default=0.1)
    certify.add_argument("--block-size", dest="block_size", type=int, default=100)
    certify.add_argument("--tol", type=float, default=1e-4)
    certify.add_argument("--max-iters", dest="max_iters", type=int, default=1_000_000)
    certify.add_argument("--seed", type=int, default=0)
    certify.add_argument("--repeats", type=int, default=30,
                         help="runs for statistical certification of randomized methods")
    certify.add_argument("--out", required=True)
    certify.set_defaults(func=cmd_certify)

    trace = sub.add_parser("trace-plot", help="flatten report JSONs into plot-ready CSV")
    trace.add_argument("reports", nargs="*", help="report.json files from solve runs")
    trace.add_argument("--out", required=True)
    trace.set_defaults(func=cmd_trace_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (UsageError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StalledError, SubsolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
