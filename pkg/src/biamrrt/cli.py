"""Command-line benchmark harness.

    bench run --suite suite.txt --out results.csv [--deterministic]
              [--rebuild-metrics] [--workers N] [--cache-dir DIR]
    bench matrix
    bench sigma --scenario office --planner bi-am-rrt-d --sigmas 10,20,30,40,50,60
"""

import argparse
import pathlib
import sys
import time

from .bench import (
    load_stats_csv,
    parse_suite,
    planner_matrix,
    render_summary,
    run_suite,
    sigma_sweep,
    stats_to_csv,
    summarize,
)
from .errors import BiamError


def _cmd_matrix(args):
    rows = planner_matrix()
    print(f"{'id':16s} {'label':16s} {'metric':10s} {'bi':3s} {'new':3s} "
          f"{'t_root':7s} {'t_goal':7s} {'n_max':5s}")
    for r in rows:
        print(f"{r.planner_id:16s} {r.label:16s} {r.metric_kind:10s} "
              f"{'yes' if r.bidirectional else 'no':3s} {'yes' if r.new_rewiring else 'no':3s} "
              f"{r.t_root:<7g} {r.t_goal:<7g} {r.n_max:<5d}")
    print(f"{len(rows)} planners")
    return 0


def _cmd_run(args):
    suite = parse_suite(pathlib.Path(args.suite).read_text(encoding="utf-8"))
    if args.deterministic:
        suite.budget_mode = "deterministic"
    t0 = time.perf_counter()

    def progress(done, total, key):
        print(f"[{done}/{total}] {key[0]} on {key[1]} "
              f"({time.perf_counter() - t0:.0f}s elapsed)", file=sys.stderr)

    stats = run_suite(
        suite,
        workers=args.workers,
        cache_dir=args.cache_dir,
        rebuild_metrics=args.rebuild_metrics,
        progress=progress,
    )
    out = pathlib.Path(args.out)
    out.write_text(stats_to_csv(stats), encoding="utf-8")
    summary = summarize(stats)
    text = render_summary(summary)
    summary_path = out.with_suffix(out.suffix + ".summary.txt")
    summary_path.write_text(text, encoding="utf-8")
    print(text)
    print(f"wrote {len(stats)} rows to {out} (summary: {summary_path})")
    return 0


def _cmd_sigma(args):
    sigmas = [float(s) for s in args.sigmas.split(",") if s.strip()]
    stats, rates = sigma_sweep(
        args.scenario,
        args.planner,
        sigmas,
        repetitions=args.repetitions,
        budget_mode="deterministic" if args.deterministic else "wall_clock",
        cache_dir=args.cache_dir,
    )
    print(f"sigma sweep: {args.planner} on {args.scenario}, {args.repetitions} seeds")
    for sigma in sigmas:
        print(f"  sigma={sigma:6.1f} m  arrival+audit pass rate: {rates[float(sigma)]:.0%}")
    if args.out:
        pathlib.Path(args.out).write_text(stats_to_csv(stats), encoding="utf-8")
        print(f"wrote {len(stats)} rows to {args.out}")
    return 0


def _cmd_summarize(args):
    stats = load_stats_csv(pathlib.Path(args.csv).read_text(encoding="utf-8"))
    print(render_summary(summarize(stats)))
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("matrix", help="print the 20-planner matrix")

    run_p = sub.add_parser("run", help="run a benchmark suite")
    run_p.add_argument("--suite", required=True, help="suite file (biam-suite v1)")
    run_p.add_argument("--out", required=True, help="output CSV path")
    run_p.add_argument("--deterministic", action="store_true",
                       help="force the reproducible op-count budget mode")
    run_p.add_argument("--rebuild-metrics", action="store_true",
                       help="ignore metric cache sidecars and recompute")
    run_p.add_argument("--workers", type=int, default=1)
    run_p.add_argument("--cache-dir", default="metric-cache")

    sig_p = sub.add_parser("sigma", help="connection-distance sensitivity sweep")
    sig_p.add_argument("--scenario", required=True)
    sig_p.add_argument("--planner", required=True)
    sig_p.add_argument("--sigmas", required=True, help="comma-separated meters")
    sig_p.add_argument("--repetitions", type=int, default=25)
    sig_p.add_argument("--deterministic", action="store_true")
    sig_p.add_argument("--cache-dir", default="metric-cache")
    sig_p.add_argument("--out")

    sum_p = sub.add_parser("summarize", help="recompute the summary from a CSV")
    sum_p.add_argument("csv")

    args = parser.parse_args(argv)
    try:
        if args.command == "matrix":
            return _cmd_matrix(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sigma":
            return _cmd_sigma(args)
        return _cmd_summarize(args)
    except BiamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
