from __future__ import annotations

import dataclasses
import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pointhop.classify import (
    Classifier,
    EvalReport,
    fit_linear,
    fit_random_forest,
    format_report,
    predict,
    report_from_predictions,
)
from pointhop.cli.bundle import RunBundle, dump_json, load_bundle, save_bundle
from pointhop.cli.data import (
    LoadedSplit,
    converted_name,
    load_split,
    read_entry,
    relative_name,
)
from pointhop.config import CLASSIFIERS, ExperimentConfig
from pointhop.ensemble import (
    FittedBranch,
    branch_features,
    decision_vectors,
    fit_ensemble,
    out_of_fold_decisions,
    rotate_cloud,
)
from pointhop.errors import ChannelOutOfRange, DataError
from pointhop.metrics import Metrics
from pointhop.pcio import DatasetManifest, load_manifest, write_manifest, write_point_set
from pointhop.pipeline import POOLINGS, fit_pointhop, trace
from pointhop.rng import splitmix64
from pointhop.workers import ordered_map

logger = logging.getLogger("pointhop")

DENSITY_SWEEP = (256, 512, 768, 1024)

ABLATION_AXES = ("features", "fps", "poolings", "classifier", "reduction")


def cmd_convert(
    raw_root: Path,
    out_root: Path,
    *,
    points: int,
    seed: int,
    workers: int = 1,
    metrics: Metrics | None = None,
) -> dict[str, int]:
    """Sample every mesh to a normalized packed point set and write split manifests.

    Files that fail to parse are logged and counted; if any fail the command
    raises after writing the manifests of the files that converted.
    """
    raw_root = Path(raw_root)
    out_root = Path(out_root)
    counts: dict[str, int] = {}
    failures = 0
    for split in ("train", "test"):
        manifest = load_manifest(raw_root, split)
        names = manifest.class_names
        jobs = [
            (path, label, out_root / converted_name(path, raw_root, names[label], split))
            for path, label in manifest.entries
        ]

        def convert(job: tuple[Path, int, Path]) -> tuple[Path, int] | None:
            path, label, target = job
            try:
                cloud = read_entry(path, raw_root, points=points, seed=seed)
            except DataError as exc:
                logger.warning("CONVERT FAILED %s: %s", relative_name(path, raw_root), exc)
                if metrics:
                    metrics.inc("files_failed_total")
                return None
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(write_point_set(cloud, "php"))
            if metrics:
                metrics.inc("files_converted_total")
            return target, label

        converted = [e for e in ordered_map(convert, jobs, workers) if e is not None]
        failures += len(manifest) - len(converted)
        out_root.mkdir(parents=True, exist_ok=True)
        write_manifest(
            DatasetManifest(entries=converted, class_names=manifest.class_names, split=split),
            out_root,
        )
        counts[split] = len(converted)
        logger.info(
            "CONVERT %s files=%d failed=%d", split, len(converted), len(manifest) - len(converted)
        )
    if failures:
        raise DataError(f"{failures} files failed to convert")
    return counts


def fit_classifier(
    cfg: ExperimentConfig,
    features: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    *,
    seed: int,
    metrics: Metrics | None = None,
) -> Classifier:
    if cfg.classifier == "linear":
        return fit_linear(features, labels, cfg.linear, n_classes=n_classes)
    return fit_random_forest(
        features,
        labels,
        cfg.forest,
        seed,
        n_classes=n_classes,
        workers=cfg.workers,
        metrics=metrics,
    )


def train_bundle(
    cfg: ExperimentConfig, train: LoadedSplit, *, metrics: Metrics | None = None
) -> RunBundle:
    """Fit every branch (unsupervised), then the classifier(s) on the fused output."""
    metrics = metrics or Metrics()
    spec = cfg.ensemble_spec()
    n_classes = len(train.class_names)
    with metrics.timed("pointhop"):
        branches = fit_ensemble(train.clouds, spec, workers=cfg.workers, metrics=metrics)
    with metrics.timed("features"):
        blocks = [
            branch_features(b, train.clouds, workers=cfg.workers, metrics=metrics)
            for b in branches
        ]
    branch_classifiers: tuple[Classifier, ...] = ()
    with metrics.timed("classifier"):
        if spec.fusion == "decision":
            branch_classifiers = tuple(
                fit_classifier(
                    cfg,
                    X,
                    train.labels,
                    n_classes,
                    seed=splitmix64(cfg.seed, i + 1),
                    metrics=metrics,
                )
                for i, X in enumerate(blocks)
            )
            fused = np.hstack(
                [
                    out_of_fold_decisions(
                        lambda X_fit, y_fit, s: fit_classifier(
                            cfg, X_fit, y_fit, n_classes, seed=s, metrics=metrics
                        ),
                        X,
                        train.labels,
                        n_classes,
                        seed=splitmix64(cfg.seed, i + 1),
                    )
                    for i, X in enumerate(blocks)
                ]
            )
        else:
            fused = np.hstack(blocks)
        classifier = fit_classifier(
            cfg, fused, train.labels, n_classes, seed=cfg.seed, metrics=metrics
        )
    return RunBundle(
        config=cfg,
        branches=branches,
        classifier=classifier,
        class_names=train.class_names,
        branch_classifiers=branch_classifiers,
    )


def predict_clouds(
    bundle: RunBundle,
    clouds: Sequence,
    *,
    workers: int = 1,
    input_points: int | None = None,
    metrics: Metrics | None = None,
) -> np.ndarray:
    blocks = [
        branch_features(b, clouds, workers=workers, input_points=input_points, metrics=metrics)
        for b in bundle.branches
    ]
    if bundle.branch_classifiers:
        fused = decision_vectors(bundle.branch_classifiers, blocks)
    else:
        fused = np.hstack(blocks)
    return predict(bundle.classifier, fused)


def evaluate_bundle(
    bundle: RunBundle,
    test: LoadedSplit,
    *,
    workers: int = 1,
    input_points: int | None = None,
    metrics: Metrics | None = None,
) -> EvalReport:
    if tuple(test.class_names) != tuple(bundle.class_names):
        raise DataError("test split class list differs from the training class list")
    pred = predict_clouds(
        bundle, test.clouds, workers=workers, input_points=input_points, metrics=metrics
    )
    return report_from_predictions(pred, test.labels, bundle.class_names)


def cmd_fit(cfg: ExperimentConfig, *, metrics: Metrics | None = None) -> RunBundle:
    if not cfg.out_dir:
        raise ValueError("--out is required")
    metrics = metrics or Metrics()
    start = time.perf_counter()
    with metrics.timed("load"):
        train = load_split(cfg, "train")
    bundle = train_bundle(cfg, train, metrics=metrics)
    fit_seconds = time.perf_counter() - start
    logger.info("FIT branches=%d seconds=%.1f", len(bundle.branches), fit_seconds)
    print(f"fit_time={fit_seconds:.1f}s")

    test = load_split(cfg, "test")
    with metrics.timed("evaluate"):
        report = evaluate_bundle(bundle, test, workers=cfg.workers, metrics=metrics)
    bundle = dataclasses.replace(bundle, report=report, timings=metrics.timings())
    save_bundle(bundle, Path(cfg.out_dir))
    print(format_report(report))
    _report_hp_a_subset(cfg, bundle, train, test, metrics)
    return bundle


def _report_hp_a_subset(cfg, bundle, train, test, metrics) -> None:
    """For the 20-branch preset, also score the five rotation branches on their own."""
    if cfg.ensemble != "all" or bundle.branch_classifiers:
        return
    sub = dataclasses.replace(bundle, branches=bundle.branches[:5], report=None)
    blocks = [branch_features(b, train.clouds, workers=cfg.workers) for b in sub.branches]
    classifier = fit_classifier(
        cfg, np.hstack(blocks), train.labels, len(train.class_names), seed=cfg.seed, metrics=metrics
    )
    sub = dataclasses.replace(sub, classifier=classifier)
    report = evaluate_bundle(sub, test, workers=cfg.workers)
    (Path(cfg.out_dir) / "report-hp-a.json").write_text(
        dump_json(report.to_dict()), encoding="utf-8"
    )
    print("HP-A subset: " + format_report(report))


def cmd_eval(
    bundle_path: Path,
    *,
    data_root: str | None = None,
    test_points: int | None = None,
    density_sweep: bool = False,
    workers: int = 1,
    metrics: Metrics | None = None,
) -> dict[int | None, EvalReport]:
    """Evaluate a bundle on its test split, optionally at other input densities."""
    bundle = load_bundle(bundle_path)
    cfg = dataclasses.replace(bundle.config, workers=workers)
    if data_root:
        cfg = dataclasses.replace(cfg, data_root=data_root)
    test = load_split(cfg, "test")
    densities: list[int | None] = [test_points]
    if density_sweep:
        available = min(len(c) for c in test.clouds)
        densities = [n for n in DENSITY_SWEEP if n <= available]
    reports: dict[int | None, EvalReport] = {}
    for n in densities:
        with (metrics or Metrics()).timed(f"eval{n or ''}"):
            report = evaluate_bundle(bundle, test, workers=workers, input_points=n, metrics=metrics)
        reports[n] = report
        label = "" if n is None else f"test_points={n} "
        print(label + format_report(report, per_class=not density_sweep))
    if test_points is None and not density_sweep and bundle.report is not None:
        if reports[None].to_dict() != bundle.report.to_dict():
            logger.warning("EVAL report differs from the one stored in the bundle")
    return reports


@dataclass(frozen=True)
class AblationRow:
    features: str
    fps: str
    poolings: tuple[str, ...]
    classifier: str
    reduction: str
    overall_accuracy: float
    average_accuracy: float

    def to_tsv(self) -> str:
        return "\t".join(
            [
                self.features,
                self.fps,
                "+".join(self.poolings),
                self.classifier,
                self.reduction,
                f"{self.overall_accuracy:.4f}",
                f"{self.average_accuracy:.4f}",
            ]
        )


ABLATION_HEADER = "features\tfps\tpoolings\tclassifier\treduction\toverall\taverage"


def _axis_values(cfg: ExperimentConfig, axes: Sequence[str]):
    base = cfg.pointhop
    features = ("all", "last") if "features" in axes else (base.feature_stages,)
    sampling = ("fps", "random") if "fps" in axes else (base.sampling,)
    reduction = ("saab", "pca") if "reduction" in axes else (base.reduction,)
    classifiers = CLASSIFIERS if "classifier" in axes else (cfg.classifier,)
    if "poolings" in axes:
        poolings = [(p,) for p in POOLINGS] + [POOLINGS]
    else:
        poolings = [base.poolings]
    return features, sampling, reduction, classifiers, poolings


def cmd_ablate(
    cfg: ExperimentConfig, axes: Sequence[str], *, metrics: Metrics | None = None
) -> list[AblationRow]:
    """Accuracy grid over the requested axes.

    One pipeline is fitted per (sampling, reduction) pair with every unit and
    pooling enabled; feature-stage and pooling variants are column selections
    of its features.
    """
    unknown = sorted(set(axes) - set(ABLATION_AXES))
    if unknown:
        raise ValueError(f"unknown ablation axes: {', '.join(unknown)}")
    metrics = metrics or Metrics()
    features, sampling, reduction, classifiers, pooling_sets = _axis_values(cfg, axes)
    train = load_split(cfg, "train")
    test = load_split(cfg, "test")
    n_classes = len(train.class_names)
    rows: list[AblationRow] = []
    for samp in sampling:
        for red in reduction:
            pcfg = cfg.pointhop.replace(
                sampling=samp, reduction=red, feature_stages="all", poolings=POOLINGS
            )
            with metrics.timed(f"pointhop-{samp}-{red}"):
                model = fit_pointhop(train.clouds, pcfg, workers=cfg.workers, metrics=metrics)
            branch = FittedBranch(model)
            X_train = branch_features(branch, train.clouds, workers=cfg.workers, metrics=metrics)
            X_test = branch_features(branch, test.clouds, workers=cfg.workers, metrics=metrics)
            last = (model.config.n_units - 1,)
            for feat in features:
                units = None if feat == "all" else last
                for pools in pooling_sets:
                    cols = model.layout.select(units, tuple(pools))
                    for kind in classifiers:
                        ccfg = dataclasses.replace(cfg, classifier=kind)
                        clf = fit_classifier(
                            ccfg, X_train[:, cols], train.labels, n_classes, seed=cfg.seed,
                            metrics=metrics,
                        )
                        report = report_from_predictions(
                            predict(clf, X_test[:, cols]), test.labels, train.class_names
                        )
                        row = AblationRow(
                            feat,
                            "on" if samp == "fps" else "off",
                            tuple(pools),
                            kind,
                            red,
                            report.overall_accuracy,
                            report.average_accuracy,
                        )
                        logger.info("ABLATE %s", row.to_tsv())
                        rows.append(row)
    table = "\n".join([ABLATION_HEADER] + [r.to_tsv() for r in rows]) + "\n"
    print(table, end="")
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ablation.tsv").write_text(table, encoding="utf-8")
    return rows


def cmd_inspect(
    bundle_path: Path,
    cloud_path: Path,
    *,
    unit: int,
    channel: int,
    branch: int = 0,
) -> str:
    """Retained points of ``unit`` (1-based) with the channel response scaled to [0, 1]."""
    bundle = load_bundle(bundle_path)
    if not 0 <= branch < len(bundle.branches):
        raise ChannelOutOfRange(f"branch must be between 0 and {len(bundle.branches) - 1}")
    fitted = bundle.branches[branch]
    n_units = fitted.model.config.n_units
    if not 1 <= unit <= n_units:
        raise ChannelOutOfRange(f"unit must be between 1 and {n_units}")
    dims = fitted.model.unit_dims[unit - 1]
    if not 0 <= channel < dims:
        raise ChannelOutOfRange(f"channel must be between 0 and {dims - 1} for unit {unit}")
    cfg = bundle.config
    cloud = read_entry(
        Path(cloud_path), Path(cloud_path).parent, points=cfg.cloud_points, seed=cfg.seed
    )
    if fitted.angle:
        cloud = rotate_cloud(cloud, fitted.angle)
    step = trace(fitted.model, cloud)[unit - 1]
    response = step.attributes[:, channel]
    lo, hi = float(response.min()), float(response.max())
    scaled = np.zeros_like(response) if hi <= lo else (response - lo) / (hi - lo)
    lines = [
        f"{x:.17g} {y:.17g} {z:.17g} {r:.17g}" for (x, y, z), r in zip(step.points, scaled)
    ]
    return "\n".join(lines) + "\n"
