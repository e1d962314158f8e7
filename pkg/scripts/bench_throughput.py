#!/usr/bin/env python3
"""Measure generation throughput on the current machine.

Runs the full pipeline (structure + attributes + episode + serialization
to a temporary directory) and the structure-only path over a seed range,
then prints the rates. Numbers depend on the CPU and BLAS threading;
pin threads (OMP_NUM_THREADS=1 etc.) for comparable single-core figures.
"""

import argparse
import dataclasses
import tempfile
import time
from pathlib import Path

from graphprior import build_episodes, load_config, write_dataset
from graphprior.generate import generate_dataset, generate_graph


def bench(config, seeds, structure_only: bool, out_dir: Path | None) -> dict:
    nodes = edges = 0
    start = time.perf_counter()
    for seed in seeds:
        if structure_only:
            graph, _ = generate_graph(config, seed)
        else:
            dataset = generate_dataset(config, seed)
            graph = dataset.graph
            if out_dir is not None:
                write_dataset(
                    dataset, build_episodes(dataset, 1), out_dir / f"{seed}.gpfn"
                )
        nodes += graph.n_nodes
        edges += graph.n_edges
    elapsed = time.perf_counter() - start
    return {
        "count": len(seeds),
        "seconds": elapsed,
        "rate": len(seeds) / elapsed,
        "nodes": nodes,
        "edges": edges,
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=50, help="datasets per pass")
    parser.add_argument("--seed", type=int, default=0, help="first seed")
    parser.add_argument("--min-nodes", type=int, default=5000)
    parser.add_argument("--max-nodes", type=int, default=10000)
    parser.add_argument(
        "--no-write", action="store_true", help="skip serialization in the full pass"
    )
    args = parser.parse_args()

    config = dataclasses.replace(
        load_config(), node_count_range=(args.min_nodes, args.max_nodes)
    )
    seeds = range(args.seed, args.seed + args.count)

    structure = bench(config, seeds, structure_only=True, out_dir=None)
    print(
        f"structure only: {structure['count']} graphs in "
        f"{structure['seconds']:.2f} s = {structure['rate']:.2f}/s "
        f"({structure['nodes']} nodes, {structure['edges']} edges)"
    )

    with tempfile.TemporaryDirectory() as tmp:
        out = None if args.no_write else Path(tmp)
        full = bench(config, seeds, structure_only=False, out_dir=out)
    wrote = "without" if args.no_write else "including"
    print(
        f"full pipeline:  {full['count']} datasets in "
        f"{full['seconds']:.2f} s = {full['rate']:.2f}/s "
        f"({wrote} serialization)"
    )


if __name__ == "__main__":
    main()
