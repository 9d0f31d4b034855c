"""Command line: train a vertex predictor, infer guidance rasters.

Exit codes: 0 success, 1 domain errors (bad manifest, malformed files,
diverged training), 2 usage errors.
"""

from __future__ import annotations

import argparse
import sys

from .data import ManifestError
from .formats import FormatError, ShapeMismatch
from .infer import infer_to_file
from .losses import TrainingDiverged
from .train import TrainConfig, train


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vertextrain",
                                 description="Vertex-ness predictor training")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on an exported dataset manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--scale", default="tiny", choices=("tiny", "small", "paper"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--freeze-encoder", action="store_true")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--metrics", default=None, help="metrics CSV path")

    p = sub.add_parser("infer", help="map file -> VGM1 guidance raster")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cfg = TrainConfig(manifest=args.manifest, epochs=args.epochs,
                              batch_size=args.batch_size, lr=args.lr,
                              gamma=args.gamma, scale=args.scale,
                              seed=args.seed,
                              freeze_encoder=args.freeze_encoder,
                              checkpoint=args.checkpoint,
                              metrics_csv=args.metrics)
            outcome = train(cfg)
            print(f"best loss {outcome.best_loss:.6f}; "
                  f"checkpoint {outcome.checkpoint}")
        else:
            infer_to_file(args.checkpoint, args.map, args.out)
            print(args.out)
        return 0
    except (ManifestError, FormatError, ShapeMismatch, TrainingDiverged,
            ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
