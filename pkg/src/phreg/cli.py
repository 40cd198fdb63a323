"""Command-line entry points: generate | train | estimate-id | ph0."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .datasets import SHAPES, SyntheticSpec, generate_dataset, write_dataset
from .geometry import load_cloud_csv
from .harness import VARIANTS, ExperimentConfig, run_experiment
from .id_estimation import ph_dim_birdal, twonn
from .tda import ph0, total_persistence


def _cmd_ph0(args: argparse.Namespace) -> int:
    cloud = load_cloud_csv(args.cloud)
    intervals = ph0(cloud)
    for birth, death in intervals:
        print(f"{birth:.17g},{death:.17g}")
    total = total_persistence(cloud) if cloud.n >= 2 else 0.0
    print(f"E,{total:.17g}")
    return 0


def _cmd_estimate_id(args: argparse.Namespace) -> int:
    cloud = load_cloud_csv(args.cloud)
    if args.method == "birdal":
        est = ph_dim_birdal(cloud, reps=args.reps, rng=np.random.default_rng(args.seed))
    else:
        est = twonn(cloud, truncation=args.truncation)
    print(f"{args.method},{est.slope:.10g},{est.dimension:.10g}")
    if est.warning:
        print(f"warning: {est.warning}", file=sys.stderr)
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    splits = tuple(args.splits)
    spec = SyntheticSpec(
        shape=args.shape,
        total=args.total,
        splits=splits,
        seed=args.seed,
        mammoth_path=args.mammoth_path,
    )
    dataset, indices = generate_dataset(spec)
    write_dataset(spec, dataset, indices, args.out)
    print(f"wrote {args.shape} dataset ({args.total} points) to {args.out}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    splits = tuple(args.splits)
    spec = SyntheticSpec(
        shape=args.dataset,
        total=args.total,
        splits=splits,
        seed=args.data_seed,
        mammoth_path=args.mammoth_path,
    )
    cfg = ExperimentConfig(
        dataset=spec,
        variant=args.variant,
        lambda_d=args.lambda_d,
        lambda_t=args.lambda_t,
        epochs=args.epochs,
        lr=args.lr,
        n_m=args.nm,
        schedule_m=args.schedule_m,
        seeds=tuple(int(s) for s in args.seeds.split(",")),
        hidden=args.hidden,
        feature_dim=args.feature_dim,
        feature_layer=args.feature_layer,
        track_id_every=args.track_id,
        dump_embeddings_csv=args.dump_embeddings,
        workers=args.workers,
        out_dir=args.out,
    )
    report = run_experiment(cfg)
    for r in report.per_seed:
        if r.error is None:
            print(f"seed {r.seed}: test MSE {r.test_mse:.6g} (best epoch {r.best_epoch})")
        else:
            print(f"seed {r.seed}: FAILED - {r.error}")
    if report.mean_test_mse is not None:
        print(f"mean test MSE {report.mean_test_mse:.6g} +/- {report.std_test_mse:.6g}")
    return 0 if report.complete else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phreg")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ph0", help="print 0-dimensional persistence intervals of a cloud")
    p.add_argument("cloud", help="point-cloud CSV, one point per row")
    p.set_defaults(func=_cmd_ph0)

    p = sub.add_parser("estimate-id", help="estimate intrinsic dimension of a cloud")
    p.add_argument("cloud")
    p.add_argument("--method", choices=("birdal", "twonn"), default="twonn")
    p.add_argument("--truncation", type=float, default=0.1, help="twonn: top ratio fraction to censor")
    p.add_argument("--reps", type=int, default=5, help="birdal: subsets per size")
    p.add_argument("--seed", type=int, default=0, help="birdal: subset sampling seed")
    p.set_defaults(func=_cmd_estimate_id)

    p = sub.add_parser("generate", help="write a synthetic dataset to a directory")
    p.add_argument("--shape", choices=SHAPES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--total", type=int, default=3000)
    p.add_argument("--splits", type=int, nargs=3, default=(100, 100, 2800),
                   metavar=("TRAIN", "VAL", "TEST"))
    p.add_argument("--mammoth-path", default=None)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("train", help="run the coordinate-prediction experiment")
    p.add_argument("--dataset", choices=SHAPES, required=True)
    p.add_argument("--variant", choices=VARIANTS, default="baseline")
    p.add_argument("--lambda-d", type=float, default=None, help="default: per-shape preset")
    p.add_argument("--lambda-t", type=float, default=None, help="default: per-shape preset")
    p.add_argument("--epochs", type=int, default=10000)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seeds", default="0,1,2,3,4,5,6,7,8,9", help="comma-separated run seeds")
    p.add_argument("--nm", type=int, default=None, help="regularizer sample size (default: train size)")
    p.add_argument("--schedule-m", type=int, default=4)
    p.add_argument("--track-id", type=int, default=None, metavar="K",
                   help="record TwoNN dimension of validation features every K epochs")
    p.add_argument("--dump-embeddings", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--total", type=int, default=3000)
    p.add_argument("--splits", type=int, nargs=3, default=(100, 100, 2800),
                   metavar=("TRAIN", "VAL", "TEST"))
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--mammoth-path", default=None)
    p.add_argument("--hidden", type=int, default=100)
    p.add_argument("--feature-dim", type=int, default=None)
    p.add_argument("--feature-layer", choices=("post_act", "pre_act"), default="pre_act")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_train)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
