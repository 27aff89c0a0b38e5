import argparse
import logging
import os
import sys
from pathlib import Path

from pointhop.cli import (
    ABLATION_AXES,
    cmd_ablate,
    cmd_convert,
    cmd_eval,
    cmd_fit,
    cmd_inspect,
)
from pointhop.config import ExperimentConfig, build_config, validate_config
from pointhop.errors import DataError, NumericError
from pointhop.metrics import Metrics, format_stats, format_timings

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _add_common(p: argparse.ArgumentParser, *, seed_required: bool) -> None:
    p.add_argument("--seed", type=int, required=seed_required, default=None)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("-v", "--verbose", action="store_true")


def _add_experiment(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="Experiment config file (key = value)")
    p.add_argument("--data-root", default=None)
    p.add_argument("--cloud-points", type=int, default=None)
    p.add_argument("--out", default=None, help="Output directory")

    # PointHop
    p.add_argument("--input-points", type=int, default=None)
    p.add_argument("--unit-points", default=None, help="Comma-separated, one per unit")
    p.add_argument("--k-values", default=None, help="Comma-separated, one per unit")
    p.add_argument("--n-ac", default=None, help="Comma-separated AC filter counts")
    p.add_argument("--poolings", default=None, help="Comma-separated: max,mean,l1,l2")
    p.add_argument("--initial-attributes", choices=["xyz", "xyzrgb"], default=None)
    p.add_argument("--feature-stages", choices=["all", "last"], default=None)
    p.add_argument("--sampling", choices=["fps", "random"], default=None)
    p.add_argument("--reduction", choices=["saab", "pca"], default=None)

    # Ensemble
    p.add_argument("--ensemble", choices=["none", "HP-A", "HP-B", "HP-C", "HP-D", "all"])
    p.add_argument("--angles", default=None, help="Comma-separated rotation angles (degrees)")
    p.add_argument("--fusion", choices=["feature", "decision"], default=None)

    # Classifier
    p.add_argument("--classifier", choices=["forest", "linear"], default=None)
    p.add_argument("--n-trees", type=int, default=None)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--min-leaf", type=int, default=None)
    p.add_argument("--reg", type=float, default=None, help="Linear model L2 strength")


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="pointhop",
        description="PointHop point cloud classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="Sample meshes into packed point sets")
    p.add_argument("raw_root", type=Path)
    p.add_argument("out_root", type=Path)
    p.add_argument("--points", type=int, default=2048)
    _add_common(p, seed_required=True)

    p = sub.add_parser("fit", help="Fit pipeline and classifier, write a run bundle")
    _add_experiment(p)
    _add_common(p, seed_required=True)

    p = sub.add_parser("ensemble-fit", help="Fit a multi-branch ensemble")
    _add_experiment(p)
    _add_common(p, seed_required=True)

    p = sub.add_parser("eval", help="Evaluate a run bundle on its test split")
    p.add_argument("bundle", type=Path)
    p.add_argument("--data-root", default=None)
    p.add_argument("--test-points", type=int, default=None)
    p.add_argument("--density-sweep", action="store_true")
    _add_common(p, seed_required=False)

    p = sub.add_parser("ablate", help="Accuracy grid over ablation axes")
    _add_experiment(p)
    p.add_argument(
        "--axes",
        default=",".join(ABLATION_AXES),
        help=f"Comma-separated subset of {','.join(ABLATION_AXES)}",
    )
    _add_common(p, seed_required=True)

    p = sub.add_parser("inspect", help="Dump normalized per-point channel responses")
    p.add_argument("bundle", type=Path)
    p.add_argument("cloud", type=Path)
    p.add_argument("--unit", type=int, required=True, help="1-based unit number")
    p.add_argument("--channel", type=int, required=True)
    p.add_argument("--branch", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)
    _add_common(p, seed_required=False)
    return parser


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    cfg = build_config(args)
    validate_config(cfg)
    return cfg


def _run(args: argparse.Namespace, metrics: Metrics) -> None:
    if args.command == "convert":
        if args.points < 1:
            raise ValueError("points must be >= 1")
        cmd_convert(
            args.raw_root,
            args.out_root,
            points=args.points,
            seed=args.seed,
            workers=args.workers,
            metrics=metrics,
        )
    elif args.command in ("fit", "ensemble-fit"):
        cfg = _experiment(args)
        if args.command == "ensemble-fit" and len(cfg.ensemble_spec().branches) < 2:
            raise ValueError("ensemble-fit needs --ensemble or at least two --angles")
        cmd_fit(cfg, metrics=metrics)
    elif args.command == "eval":
        cmd_eval(
            args.bundle,
            data_root=args.data_root,
            test_points=args.test_points,
            density_sweep=args.density_sweep,
            workers=args.workers,
            metrics=metrics,
        )
    elif args.command == "ablate":
        cfg = _experiment(args)
        axes = [a.strip() for a in args.axes.split(",") if a.strip()]
        cmd_ablate(cfg, axes, metrics=metrics)
    elif args.command == "inspect":
        text = cmd_inspect(
            args.bundle, args.cloud, unit=args.unit, channel=args.channel, branch=args.branch
        )
        if args.out:
            args.out.write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)


def main(argv: list[str] | None = None) -> None:
    parser = _build_parser()
    args = parser.parse_args(argv)

    _setup_logging(args.verbose)
    logger = logging.getLogger("pointhop")
    metrics = Metrics()
    try:
        _run(args, metrics)
    except DataError as exc:
        print(str(exc), file=sys.stderr)
        raise SystemExit(EXIT_DATA) from exc
    except NumericError as exc:
        print(str(exc), file=sys.stderr)
        raise SystemExit(EXIT_NUMERIC) from exc
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from exc
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        raise SystemExit(EXIT_DATA) from exc
    finally:
        logger.info(format_stats(metrics.snapshot()))
        timings = metrics.timings()
        if timings:
            logger.info(format_timings(timings))


if __name__ == "__main__":
    main()
