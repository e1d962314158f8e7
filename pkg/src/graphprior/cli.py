"""Command-line interface: generate, stats, and inspect subcommands.

Exit codes: 0 success, 1 validation or generation failure, 2 usage error.
GPF_CONFIG names a default config file for `generate`.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
import time
from pathlib import Path

import numpy as np

from .container import make_container, read_container, write_container
from .errors import GraphPriorError
from .generate import build_episodes, generate_graph
from .prior_config import PriorConfig, load_config
from .rng import derive_seed, stream
from .scm import generate_attributes
from .spectral import laplacian_pe
from .stats import compute_report
from .version import VERSION

CONFIG_ENV = "GPF_CONFIG"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphprior",
        description="Synthetic attributed-graph dataset generator",
    )
    parser.add_argument("--version", action="version", version=f"graphprior {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate dataset containers")
    gen.add_argument("--count", type=int, required=True, help="number of datasets")
    gen.add_argument("--seed", type=int, required=True, help="base seed")
    gen.add_argument("--out", type=Path, required=True, help="output directory")
    gen.add_argument(
        "--config", type=Path, default=None,
        help=f"prior config file (default: ${CONFIG_ENV} or built-in defaults)",
    )
    gen.add_argument(
        "--episodes", type=int, default=1, help="episodes per container (default 1)"
    )
    gen.add_argument(
        "--workers", type=int, default=1, help="parallel worker processes"
    )
    gen.add_argument(
        "--structure-only", action="store_true",
        help="generate graphs without attributes or files (timing/tuning runs)",
    )

    st = sub.add_parser("stats", help="print one stats record per container")
    st.add_argument("files", nargs="+", type=Path, metavar="FILE")

    ins = sub.add_parser("inspect", help="print header and metadata of a container")
    ins.add_argument("file", type=Path, metavar="FILE")
    ins.add_argument(
        "--lappe", type=int, default=None, metavar="K",
        help="also compute a K-column positional-encoding summary",
    )
    return parser


def _load_config(path: Path | None) -> PriorConfig:
    if path is None:
        env = os.environ.get(CONFIG_ENV)
        path = Path(env) if env else None
    return load_config(path)


def _generate_one(args: tuple[PriorConfig, int, int, str, int, bool]) -> tuple[int, int, int]:
    config, base_seed, index, out_dir, episodes, structure_only = args
    seed = derive_seed(base_seed, index)
    if structure_only:
        graph, _ = generate_graph(config, seed)
        return seed, graph.n_nodes, graph.n_edges
    dataset = generate_attributes(*generate_graph(config, seed))
    container = make_container(dataset, build_episodes(dataset, episodes))
    write_container(container, Path(out_dir) / f"{seed}.gpfn")
    return seed, dataset.graph.n_nodes, dataset.graph.n_edges


def _cmd_generate(args: argparse.Namespace) -> int:
    if args.count < 1:
        print("error: --count must be >= 1", file=sys.stderr)
        return 2
    if args.episodes < 0 or args.workers < 1:
        print("error: --episodes must be >= 0 and --workers >= 1", file=sys.stderr)
        return 2
    config = _load_config(args.config)
    if not args.structure_only:
        args.out.mkdir(parents=True, exist_ok=True)
    jobs = [
        (config, args.seed, i, str(args.out), args.episodes, args.structure_only)
        for i in range(args.count)
    ]
    start = time.perf_counter()
    if args.workers == 1:
        results = [_generate_one(job) for job in jobs]
    else:
        with multiprocessing.Pool(processes=args.workers) as pool:
            results = list(pool.imap_unordered(_generate_one, jobs, chunksize=1))
    elapsed = time.perf_counter() - start
    n_nodes = sum(r[1] for r in results)
    n_edges = sum(r[2] for r in results)
    what = "graphs" if args.structure_only else "datasets"
    rate = args.count / elapsed if elapsed > 0 else float("inf")
    print(
        f"generated {args.count} {what} in {elapsed:.2f} s "
        f"({rate:.2f} {what}/s; {n_nodes} nodes, {n_edges} edges total)"
    )
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    failures = 0
    for path in args.files:
        try:
            container = read_container(path)
        except GraphPriorError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        record = {"file": str(path)}
        record.update(compute_report(container.dataset.graph).to_dict())
        print(json.dumps(record, sort_keys=True))
    return 1 if failures else 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    try:
        container = read_container(args.file)
    except GraphPriorError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return 1
    ds = container.dataset
    task = ds.task
    print(f"file:       {args.file}")
    print(f"n_nodes:    {ds.graph.n_nodes}")
    print(f"n_edges:    {ds.graph.n_edges}")
    print(f"n_features: {ds.n_features}")
    kind = f"classification ({task.n_classes} classes)" if task.is_classification else "regression"
    print(f"task:       {kind}")
    print(f"lappe_k:    {container.lappe_k}")
    print(f"episodes:   {len(container.episodes)}")
    for i, ep in enumerate(container.episodes):
        n_ctx = int(ep.context_mask.sum())
        print(
            f"  episode {i}: {n_ctx} context nodes, "
            f"{ep.n_positives} positives, {ep.pruned_graph.n_edges} pruned edges"
        )
    print("metadata:")
    print(json.dumps(container.metadata, sort_keys=True, indent=2))
    if args.lappe is not None:
        if args.lappe < 1:
            print("error: --lappe must be >= 1", file=sys.stderr)
            return 2
        try:
            pe = laplacian_pe(ds.graph, args.lappe, stream(ds.seed, "lappe"))
        except GraphPriorError as exc:
            print(f"{args.file}: {exc}", file=sys.stderr)
            return 1
        with np.printoptions(precision=6, suppress=True):
            print(f"lappe eigenvalues ({args.lappe}): {pe.eigenvalues}")
            norms = np.linalg.norm(pe.values, axis=0)
            print(f"lappe column norms: {norms}")
    return 0


def cli(argv: list[str] | None = None) -> int:
    """Argument-driven entry point returning the process exit code."""
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return int(exc.code or 0)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "stats":
            return _cmd_stats(args)
        return _cmd_inspect(args)
    except GraphPriorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
