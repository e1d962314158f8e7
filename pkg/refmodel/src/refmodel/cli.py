"""Command-line harness: train on a container directory, evaluate a
checkpoint. Metrics are emitted as JSON lines on stdout.

Exit codes: 0 success, 1 data or training failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import torch

from .config import ModelConfig, TrainConfig
from .errors import RefModelError
from .eval import evaluate_icl
from .train import model_from_checkpoint, train


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refmodel",
        description="Reference in-context model over .gpfn containers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="train from scratch on a directory")
    tr.add_argument("--data", type=Path, required=True, help="container directory")
    tr.add_argument("--steps", type=int, required=True, help="optimizer steps")
    tr.add_argument("--seed", type=int, required=True)
    tr.add_argument("--out", type=Path, required=True, help="checkpoint path")
    tr.add_argument("--warmup", type=int, default=500, help="warmup steps (desk-scale default)")
    tr.add_argument("--lr", type=float, default=3e-4)
    tr.add_argument("--mgm-coefficient", type=float, default=0.1)
    tr.add_argument("--max-nodes", type=int, default=512)
    tr.add_argument("--d-model", type=int, default=32)
    tr.add_argument("--n-heads", type=int, default=2)
    tr.add_argument("--n-blocks", type=int, default=2)
    tr.add_argument("--no-adapters", action="store_true", help="ablate graph adapters")
    tr.add_argument("--log-every", type=int, default=100)

    ev = sub.add_parser("eval", help="evaluate a checkpoint on a directory")
    ev.add_argument("--ckpt", type=Path, required=True)
    ev.add_argument("--data", type=Path, required=True)
    return parser


def _cmd_train(args: argparse.Namespace) -> int:
    if args.steps < 1:
        print("error: --steps must be >= 1", file=sys.stderr)
        return 2
    model_cfg = ModelConfig(
        d_model=args.d_model,
        n_heads=args.n_heads,
        n_blocks=args.n_blocks,
        use_adapters=not args.no_adapters,
    )
    train_cfg = TrainConfig(
        learning_rate=args.lr,
        warmup_steps=args.warmup,
        total_steps=args.steps,
        mgm_coefficient=args.mgm_coefficient,
        max_nodes=args.max_nodes,
    )

    def progress(entry: dict) -> None:
        if entry["step"] % args.log_every == 0 or entry["step"] == args.steps - 1:
            print(json.dumps(entry, sort_keys=True))

    checkpoint = train(args.data, train_cfg, model_cfg, args.seed, progress=progress)
    torch.save(checkpoint, args.out)
    final = checkpoint["loss_records"][-1]["loss"]
    print(json.dumps({"checkpoint": str(args.out), "final_loss": final}, sort_keys=True))
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    checkpoint = torch.load(args.ckpt, weights_only=False)
    model = model_from_checkpoint(checkpoint)
    files = sorted(args.data.glob("*.gpfn"))
    if not files:
        print(f"error: no .gpfn files in {args.data}", file=sys.stderr)
        return 1
    report = evaluate_icl(model, files)
    for row in report["datasets"]:
        print(json.dumps(row, sort_keys=True))
    print(json.dumps({"aggregate": report["aggregate"]}, sort_keys=True))
    return 0


def cli(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "train":
            return _cmd_train(args)
        return _cmd_eval(args)
    except RefModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
