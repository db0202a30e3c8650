"""Command-line entry point: simulate, discover, bench and power subcommands.

Every subcommand writes plain CSV / text files under ``--out`` and is
deterministic given its flags and seed. Errors end with a one-line
diagnostic on stderr and a nonzero exit code.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .citest import GaussianSource, OracleSource
from .discovery import AlgoConfig, discover
from .graph import cpdag_of
from .io import (
    RunConfig,
    append_metrics_rows,
    metrics_row,
    read_csv_dataset,
    read_dag,
    read_weighted_dag,
    write_csv_dataset,
    write_result,
    write_weighted_dag,
)
from .linalg import correlation_matrix
from .metrics import compare_graphs, format_metric, power_experiment, skeleton_hash
from .simgen import SimConfig, density_for_degree, gen_data, gen_weighted_dag, make_rng, simulate

PROG = "revpc"

# command-line name -> (variant, stable)
ALGOS = {
    "pc": ("pc", False),
    "pc-stable": ("pc", True),
    "pc-reverse": ("pc_reverse", False),
    "pc-reverse-stable": ("pc_reverse", True),
    "pc-reverse-parallel": ("pc_reverse_parallel", False),
}

POWER_COLUMNS = ("run", "algo", "i", "j", "deleted", "statistic", "threshold", "stage", "cond_set")


class CliError(Exception):
    pass


# -- argument types ----------------------------------------------------------


def _alpha(text: str) -> float:
    x = float(text)
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return x


def _density(text: str) -> float:
    x = float(text)
    if not 0 <= x <= 1:
        raise argparse.ArgumentTypeError(f"density must lie in [0, 1], got {text}")
    return x


def _positive_int(text: str) -> int:
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return x


def _nonneg_float(text: str) -> float:
    x = float(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return x


def _int_list(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out or min(out) < 2:
        raise argparse.ArgumentTypeError(f"sizes must be integers >= 2, got {text!r}")
    return out


def _pairs(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        try:
            a, b = (int(x) for x in item.split("-"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected pairs like 0-3,2-5, got {text!r}") from None
        out.append((a, b))
    return out


def _algo_config(name: str, alpha: float, batch_size: int = 64, workers: int = 1) -> AlgoConfig:
    variant, stable = ALGOS[name]
    return AlgoConfig(variant=variant, stable=stable, alpha=alpha, batch_size=batch_size, workers=workers)


def _density_arg(args, n: int) -> float:
    if args.avg_degree is not None:
        return density_for_degree(n, args.avg_degree)
    return args.density


# -- simulate ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = SimConfig(
        n=args.nodes,
        density=_density_arg(args, args.nodes),
        N=args.samples,
        seed=args.seed,
        hub_count=args.hubs,
        hub_degree=args.hub_degree,
    )
    wdag, data = simulate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv_dataset(data, out / "data.csv")
    write_weighted_dag(wdag, out / "truth.txt")
    (out / "config.json").write_text(RunConfig(sim=cfg, out=str(out), seed=cfg.seed).to_json())
    print(f"wrote {data.N}x{data.n} samples and {len(wdag.dag.edges)} edges to {out}")
    return 0


# -- discover ----------------------------------------------------------------


def cmd_discover(args) -> int:
    variant, _ = ALGOS[args.algo]
    if args.batch_size is not None and variant != "pc_reverse_parallel":
        print(f"{PROG}: warning: --batch-size has no effect with --algo {args.algo}; ignored", file=sys.stderr)
    cfg = _algo_config(args.algo, args.alpha, args.batch_size or 64, args.workers)

    if args.oracle is not None:
        if variant == "pc_reverse_parallel":
            raise CliError("the batched variant needs sampled data (--input), not --oracle")
        dag = read_dag(args.oracle)
        src = OracleSource(dag)
        info = {"N": "", "alpha": ""}
    else:
        data = read_csv_dataset(args.input)
        src = GaussianSource(correlation_matrix(data), data.N, args.alpha)
        info = {"N": data.N, "alpha": args.alpha}

    t0 = time.perf_counter()
    cpdag, skel = discover(src, cfg)
    wall_ms = (time.perf_counter() - t0) * 1000

    metrics = None
    if args.truth is not None:
        truth = cpdag_of(read_dag(args.truth))
        if truth.n != cpdag.n:
            raise CliError(f"truth has {truth.n} nodes but the data has {cpdag.n}")
        metrics = compare_graphs(cpdag, truth)
        metrics.ci_tests = skel.counter.total
        metrics.wall_ms = None if args.no_timing else round(wall_ms, 3)
        metrics.conflicts = cpdag.conflicts
        metrics.degenerate_tests = skel.counter.degenerate
    write_result(
        cpdag, skel.sepsets, metrics, args.out,
        run_id=args.run_id, algo=args.algo, n=cpdag.n, d="", **info,
    )
    print(f"{args.algo}: {len(cpdag.adjacencies())} edges, {skel.counter.total} CI tests")
    return 0


# -- bench -------------------------------------------------------------------


def _bench_run(job: tuple) -> list[dict]:
    n, density, run, samples, alpha, seed, algos, oracle, batch_size = job
    rng = make_rng(seed, n, run)
    wdag = gen_weighted_dag(SimConfig(n=n, density=density, N=samples, seed=seed), rng)
    truth = cpdag_of(wdag.dag)
    if oracle:
        src = OracleSource(wdag.dag)
    else:
        data = gen_data(wdag, samples, rng)
        src = GaussianSource(correlation_matrix(data), samples, alpha)
    rows = []
    for name in algos:
        cfg = _algo_config(name, alpha, batch_size)
        t0 = time.perf_counter()
        cpdag, skel = discover(src, cfg)
        wall_ms = (time.perf_counter() - t0) * 1000
        m = compare_graphs(cpdag, truth)
        m.ci_tests = skel.counter.total
        m.wall_ms = round(wall_ms, 3)
        m.conflicts = cpdag.conflicts
        m.degenerate_tests = skel.counter.degenerate
        row = metrics_row(
            m, run_id=f"n{n}-r{run}", algo=name, n=n, d=density,
            N="" if oracle else samples, alpha="" if oracle else alpha,
        )
        row["skeleton_hash"] = skeleton_hash(skel.graph)
        rows.append(row)
    return rows


def cmd_bench(args) -> int:
    algos = args.algos.split(",")
    for a in algos:
        if a not in ALGOS:
            raise CliError(f"unknown algorithm {a!r}; expected one of {', '.join(ALGOS)}")
    if args.oracle and "pc-reverse-parallel" in algos:
        raise CliError("pc-reverse-parallel needs sampled data; drop it or --oracle")
    jobs = [
        (n, _density_arg(args, n), run, args.samples, args.alpha, args.seed, algos, args.oracle, args.batch_size)
        for n in args.sizes
        for run in range(args.runs)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_bench_run, jobs))
    else:
        results = [_bench_run(j) for j in jobs]
    rows = [r for rs in results for r in rs]
    if args.no_timing:
        for r in rows:
            r["wall_ms"] = None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "bench.csv"
    path.unlink(missing_ok=True)
    append_metrics_rows(path, rows)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


# -- power -------------------------------------------------------------------


def cmd_power(args) -> int:
    if args.truth is not None:
        wdag = read_weighted_dag(args.truth)
    else:
        cfg = SimConfig(n=args.nodes, density=_density_arg(args, args.nodes), N=args.samples, seed=args.seed)
        wdag = gen_weighted_dag(cfg, make_rng(args.seed))
    for i, j in args.pairs:
        if not (0 <= i < wdag.n and 0 <= j < wdag.n) or i == j:
            raise CliError(f"pair {i}-{j} is not a pair of distinct nodes in 0..{wdag.n - 1}")
    res = power_experiment(wdag, args.pairs, args.runs, args.samples, args.alpha, make_rng(args.seed, 1))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_weighted_dag(wdag, out / "truth.txt")
    with (out / "power.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(POWER_COLUMNS)
        for r in res.records:
            writer.writerow([
                r.run, r.algo, r.i, r.j, int(r.deleted), format_metric(r.statistic),
                format_metric(r.threshold), "" if r.stage is None else r.stage,
                " ".join(map(str, r.cond_set)),
            ])
    for (algo, i, j), t in sorted(res.tally().items()):
        print(f"{algo} {i}-{j}: deleted {t['deleted']}/{args.runs}")
    return 0


# -- parser ------------------------------------------------------------------


def _add_density(p: argparse.ArgumentParser, required: bool) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--density", type=_density, help="edge probability in [0, 1]")
    g.add_argument("--avg-degree", type=_nonneg_float, help="expected node degree instead of --density")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="random linear-Gaussian DAG and samples")
    p.add_argument("--nodes", type=int, required=True)
    _add_density(p, required=True)
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hubs", type=int, default=0, help="number of high-degree hub nodes")
    p.add_argument("--hub-degree", type=int, default=10)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("discover", help="estimate a CPDAG from data or a d-separation oracle")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV dataset with a header row")
    src.add_argument("--oracle", help="edge-list file of the true DAG; answers tests exactly")
    p.add_argument("--algo", choices=list(ALGOS), default="pc")
    p.add_argument("--alpha", type=_alpha, default=1e-3)
    p.add_argument("--batch-size", type=_positive_int, default=None)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--truth", help="edge-list file of the true DAG, enables accuracy metrics")
    p.add_argument("--run-id", default="0")
    p.add_argument("--no-timing", action="store_true", help="leave wall_ms empty for byte-identical reruns")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("bench", help="Monte-Carlo sweep over graph sizes")
    p.add_argument("--sizes", type=_int_list, required=True, help="comma-separated node counts")
    p.add_argument("--runs", type=_positive_int, default=10)
    _add_density(p, required=False)
    p.add_argument("--samples", type=_positive_int, default=5000)
    p.add_argument("--alpha", type=_alpha, default=1e-3)
    p.add_argument("--algos", default="pc,pc-reverse,pc-reverse-parallel")
    p.add_argument("--batch-size", type=_positive_int, default=64)
    p.add_argument("--oracle", action="store_true", help="use d-separation instead of sampled data")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for repetitions")
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_bench, density=0.2)

    p = sub.add_parser("power", help="repeated-sampling power experiment on chosen pairs")
    p.add_argument("--pairs", type=_pairs, required=True, help="pairs of interest, e.g. 0-3,2-5")
    p.add_argument("--truth", help="weighted edge-list file; otherwise a graph is generated")
    p.add_argument("--nodes", type=int, default=10)
    _add_density(p, required=False)
    p.add_argument("--runs", type=_positive_int, default=50)
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--alpha", type=_alpha, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_power, density=0.3)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, TypeError, OSError, ArithmeticError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
