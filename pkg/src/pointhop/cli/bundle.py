"""Run bundle directory.

    bundle.json       version, fusion, branch angles, class names, classifier kind
    config.conf       experiment config snapshot
    branch-<i>.phm    fitted PointHop model per branch
    branch-<i>.phc    per-branch classifier (decision fusion only)
    classifier.phc    final classifier
    report.json       EvalReport on the test split
    timings.json      stage wall-clock seconds

Everything except ``timings.json`` is byte-identical across runs with the same
config and seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from pointhop.classify import Classifier, EvalReport, load_classifier, save_classifier
from pointhop.config import ExperimentConfig, parse_config_text, render_config
from pointhop.ensemble import FittedBranch
from pointhop.errors import DataError, VersionMismatch
from pointhop.pipeline import load_model, save_model

BUNDLE_VERSION = 1

BUNDLE_FILE = "bundle.json"
CONFIG_FILE = "config.conf"
CLASSIFIER_FILE = "classifier.phc"
REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"


@dataclass(frozen=True)
class RunBundle:
    config: ExperimentConfig
    branches: tuple[FittedBranch, ...]
    classifier: Classifier
    class_names: tuple[str, ...]
    branch_classifiers: tuple[Classifier, ...] = ()
    report: EvalReport | None = None
    timings: dict[str, float] = field(default_factory=dict)
    version: int = BUNDLE_VERSION

    @property
    def fusion(self) -> str:
        return "decision" if self.branch_classifiers else "feature"


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def save_bundle(bundle: RunBundle, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "version": bundle.version,
        "fusion": bundle.fusion,
        "angles": [b.angle for b in bundle.branches],
        "class_names": list(bundle.class_names),
        "classifier": bundle.config.classifier,
    }
    (out_dir / BUNDLE_FILE).write_text(dump_json(meta), encoding="utf-8")
    (out_dir / CONFIG_FILE).write_text(render_config(bundle.config), encoding="utf-8")
    for i, branch in enumerate(bundle.branches):
        (out_dir / f"branch-{i}.phm").write_bytes(save_model(branch.model))
    for i, clf in enumerate(bundle.branch_classifiers):
        (out_dir / f"branch-{i}.phc").write_bytes(save_classifier(clf))
    (out_dir / CLASSIFIER_FILE).write_bytes(save_classifier(bundle.classifier))
    if bundle.report is not None:
        (out_dir / REPORT_FILE).write_text(dump_json(bundle.report.to_dict()), encoding="utf-8")
    (out_dir / TIMINGS_FILE).write_text(dump_json(bundle.timings), encoding="utf-8")


def load_bundle(path: Path) -> RunBundle:
    path = Path(path)
    meta_path = path / BUNDLE_FILE
    if not meta_path.exists():
        raise DataError(f"{path} is not a run bundle (missing {BUNDLE_FILE})")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{meta_path} is not valid JSON") from exc
    if meta.get("version") != BUNDLE_VERSION:
        raise VersionMismatch(
            f"bundle version {meta.get('version')}, reader supports {BUNDLE_VERSION}"
        )
    config = parse_config_text((path / CONFIG_FILE).read_text(encoding="utf-8"))
    angles = meta["angles"]
    branches = tuple(
        FittedBranch(load_model((path / f"branch-{i}.phm").read_bytes()), float(angle))
        for i, angle in enumerate(angles)
    )
    branch_classifiers: tuple[Classifier, ...] = ()
    if meta["fusion"] == "decision":
        branch_classifiers = tuple(
            load_classifier((path / f"branch-{i}.phc").read_bytes()) for i in range(len(angles))
        )
    report = None
    if (path / REPORT_FILE).exists():
        report = EvalReport.from_dict(json.loads((path / REPORT_FILE).read_text(encoding="utf-8")))
    timings = {}
    if (path / TIMINGS_FILE).exists():
        timings = json.loads((path / TIMINGS_FILE).read_text(encoding="utf-8"))
    return RunBundle(
        config=config,
        branches=branches,
        classifier=load_classifier((path / CLASSIFIER_FILE).read_bytes()),
        class_names=tuple(meta["class_names"]),
        branch_classifiers=branch_classifiers,
        report=report,
        timings=timings,
        version=meta["version"],
    )
