"""Command-line entry points: train a generator, serve the protocol."""

import argparse
import sys
from pathlib import Path

from .config import TrainConfig
from .data import load_pairs
from .errors import L1cganError
from .serve import serve_protocol
from .train import save_checkpoint, train


def _cmd_train(args):
    cfg = TrainConfig.from_json(args.config) if args.config else TrainConfig()
    pairs = load_pairs(args.labels, args.images)
    generator, log = train(pairs, cfg)
    ckpt = Path(args.checkpoint)
    ckpt.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(generator, cfg, ckpt)
    if args.log:
        log_path = Path(args.log)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        log.to_csv(log_path)
    final = log.rows[-1]
    print(f"{len(log)} steps, final l1 {final.gen_l1:.4f} -> {args.checkpoint}")
    return 0


def _cmd_serve(args):
    return serve_protocol(args.input_dir, args.output_dir, args.checkpoint)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="l1cgan",
        description="desk-scale conditional GAN from tri-label tiles to photos",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("train", help="fit a generator on (label, image) pairs")
    sp.add_argument("--labels", required=True, help="directory of {0,1,2} PNGs")
    sp.add_argument("--images", required=True,
                    help="directory of same-named RGB PNGs")
    sp.add_argument("--config", help="TrainConfig JSON (defaults when omitted)")
    sp.add_argument("--checkpoint", required=True,
                    help="generator checkpoint to write")
    sp.add_argument("--log", help="per-step loss CSV to write")
    sp.set_defaults(func=_cmd_train)

    sp = sub.add_parser("serve", help="translate a directory of label tiles")
    sp.add_argument("input_dir")
    sp.add_argument("output_dir")
    sp.add_argument("--checkpoint", required=True)
    sp.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (L1cganError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
