"""Command-line entry point: ``pcipmd {generate,solve,partition,bench,evaluate}``.

Exit codes: 0 success, 1 usage or I/O error, 2 success with solver-cap
warnings. ``PCI_LOG`` sets the log level (default WARNING).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

from .evaluate import evaluate_plan, objective_of_labels
from .graph import (
    InstanceError,
    graph_to_dict,
    load_changeable,
    load_instance,
    load_plan,
    save_instance,
    save_plan,
)
from .instances import RggConfig, SyntheticWConfig, compute_stats, generate_random_w, generate_rgg, rgg_points
from .local_search import refine
from .pipeline import METHODS, assign_pci, assign_pci_partial
from .simplex import SolveTrace, SolverCapWarning, SolverConfig, round_labels, solve_relaxed

log = logging.getLogger("pcipmd")

EXIT_OK, EXIT_ERROR, EXIT_WARN = 0, 1, 2
BENCH_FIELDS = ("method", "instance", "collisions", "confusions", "mod3", "mod30", "time_s")


def _add_solver_flags(p):
    d = SolverConfig()
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--rho0", type=float, default=d.rho0)
    p.add_argument("--gamma", type=float, default=d.gamma)
    p.add_argument("--eps1", type=float, default=d.eps1)
    p.add_argument("--eps2", type=float, default=d.eps2)
    p.add_argument("--max-inner", type=int, default=d.max_inner)
    p.add_argument("--max-outer", type=int, default=d.max_outer)
    p.add_argument("--threads", type=int, default=1, help="worker cap for per-partition stages")


def _config(args):
    return SolverConfig(
        rho0=args.rho0,
        gamma=args.gamma,
        eps1=args.eps1,
        eps2=args.eps2,
        max_inner=args.max_inner,
        max_outer=args.max_outer,
        seed=args.seed,
    )


def _emit(obj, path, fmt="json"):
    if fmt == "table" and isinstance(obj, dict):
        text = "\n".join(f"{k:<22}{v}" for k, v in obj.items())
    else:
        text = json.dumps(obj, indent=2)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _write_csv(path, header, rows):
    fh = sys.stdout if path is None else open(path, "w", newline="")
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def write_trace_csv(path, traces):
    """Outer-loop records of several solves; the first column names the stage."""
    rows = []
    for stage, trace in traces.items():
        rows.extend((stage, *row) for row in trace.rows())
    _write_csv(path, ("stage", *SolveTrace.CSV_HEADER), rows)


def write_inner_csv(path, trace):
    rows = []
    for outer, inner in enumerate(trace.inner):
        for m, (gap, step, f) in enumerate(zip(inner.gaps, inner.steps, inner.f_values[1:]), start=1):
            rows.append((outer, m, inner.rho, step, f, gap))
    _write_csv(path, ("outer_iter", "m", "rho", "step", "F", "gap"), rows)


# ------------------------------------------------------------- commands


def cmd_generate(args):
    count = args.count
    targets = []
    for i in range(count):
        seed = args.seed + i
        if args.kind == "rgg":
            cfg = RggConfig(args.n, args.radius, seed)
            graph = generate_rgg(cfg)
            stem = f"rgg_n{args.n}_r{args.radius}_s{seed}"
        else:
            cfg = SyntheticWConfig(args.n, args.b, seed)
            graph = generate_random_w(cfg)
            stem = f"randw_n{args.n}_b{args.b}_s{seed}"
        if count == 1 and args.out is not None and not Path(args.out).is_dir():
            path = Path(args.out)
        elif count == 1 and args.out is None:
            path = None
        else:
            outdir = Path(args.out or ".")
            outdir.mkdir(parents=True, exist_ok=True)
            path = outdir / f"{stem}.json"
        if path is None:
            print(json.dumps(graph_to_dict(graph)))
        else:
            save_instance(graph, path)
            targets.append(path)
            if args.coords and args.kind == "rgg":
                coords = rgg_points(cfg).tolist()
                path.with_suffix(".coords.json").write_text(json.dumps({"points": coords}))
        stats = compute_stats(graph)
        log.info("%s: %s", path or "stdout", stats)
        if path is not None:
            print(json.dumps({"file": str(path), "seed": seed, **asdict(stats)}))
    return EXIT_OK


def cmd_solve(args):
    graph = load_instance(args.input)
    config = _config(args)
    threads = args.threads if args.threads > 1 else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SolverCapWarning)
        if args.partial:
            cs = load_changeable(args.partial)
            result = assign_pci_partial(graph, cs, config, method=args.method, max_workers=threads)
        else:
            result = assign_pci(graph, config, method=args.method, max_workers=threads)
    if args.out:
        save_plan(result.plan, args.out)
    report = result.to_dict()
    report.pop("pci")
    _emit(report, args.report, args.format)
    if args.trace:
        write_trace_csv(args.trace, result.traces)
    return EXIT_WARN if result.capped else EXIT_OK


def cmd_partition(args):
    graph = load_instance(args.input)
    w = graph.weights
    config = _config(args)
    k = args.k
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SolverCapWarning)
        x, trace = solve_relaxed(w, k, config, method=args.method, record=args.inner_trace is not None)
        labels = round_labels(x)
        if not args.no_local_search:
            labels = refine(w, labels, k)
    out = {"k": k, "labels": [int(v) for v in labels], "objective": objective_of_labels(w, labels),
           "converged": trace.converged, "outer_iters": len(trace), "inner_iters": trace.total_inner}
    _emit(out, args.out, args.format)
    if args.trace:
        write_trace_csv(args.trace, {"partition": trace})
    if args.inner_trace:
        write_inner_csv(args.inner_trace, trace)
    return EXIT_WARN if trace.capped else EXIT_OK


def bench_rows(paths, methods, config, threads=None, timing=True):
    rows = []
    capped = False
    for path in paths:
        graph = load_instance(path)
        for method in methods:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SolverCapWarning)
                result = assign_pci(graph, config, method=method, max_workers=threads)
            capped |= result.capped
            rep = result.report
            rows.append((
                method, Path(path).stem, rep.collisions, rep.confusions,
                repr(rep.mod3_interference), repr(rep.mod30_interference),
                f"{rep.wall_time:.6f}" if timing else "",
            ))
    return rows, capped


def cmd_bench(args):
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise InstanceError(f"unknown methods {bad}; choose from {METHODS}")
    threads = args.threads if args.threads > 1 else None
    rows, capped = bench_rows(args.input, methods, _config(args), threads, timing=not args.no_timing)
    if args.format == "table":
        widths = [max(len(str(v)) for v in col) for col in zip(BENCH_FIELDS, *rows)]
        for row in (BENCH_FIELDS, *rows):
            print("  ".join(str(v).ljust(wd) for v, wd in zip(row, widths)))
    else:
        _write_csv(args.out, BENCH_FIELDS, rows)
    return EXIT_WARN if capped else EXIT_OK


def cmd_evaluate(args):
    graph = load_instance(args.input)
    plan = load_plan(args.plan)
    rep = evaluate_plan(graph, plan)
    out = rep.to_dict()
    out.pop("wall_time")
    _emit(out, args.out, args.format)
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="pcipmd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write synthetic instances")
    g.add_argument("kind", choices=("rgg", "randw"))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--radius", type=float, default=0.1)
    g.add_argument("--b", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out", help="file (count 1) or directory")
    g.add_argument("--coords", action="store_true", help="also write point coordinates (rgg)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="PCI assignment for one instance")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", help="plan JSON")
    s.add_argument("--report", help="report JSON (default stdout)")
    s.add_argument("--trace", help="stage trace CSV")
    s.add_argument("--method", choices=METHODS, default="gp-pmd")
    s.add_argument("--partial", help="changeable-set JSON")
    s.add_argument("--format", choices=("json", "table"), default="json")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    p = sub.add_parser("partition", help="single Min-k-Partition")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=("md", "pmd", "pgp"), default="md")
    p.add_argument("--out", help="labels JSON (default stdout)")
    p.add_argument("--trace", help="outer-loop trace CSV")
    p.add_argument("--inner-trace", help="per-iteration trace CSV (convergence curves)")
    p.add_argument("--no-local-search", action="store_true")
    p.add_argument("--format", choices=("json", "table"), default="json")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_partition)

    b = sub.add_parser("bench", help="benchmark methods over instances")
    b.add_argument("--in", dest="input", nargs="+", required=True)
    b.add_argument("--methods", default="gp-pmd,ggc")
    b.add_argument("--out", help="CSV path (default stdout)")
    b.add_argument("--no-timing", action="store_true", help="leave time_s empty (byte-stable output)")
    b.add_argument("--format", choices=("csv", "table"), default="csv")
    _add_solver_flags(b)
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("evaluate", help="metrics of a plan")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--plan", required=True)
    e.add_argument("--out")
    e.add_argument("--format", choices=("json", "table"), default="json")
    e.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    logging.basicConfig(level=os.environ.get("PCI_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "method", None) == "pmd":
        args.method = "md"
    try:
        return args.func(args)
    except (InstanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
