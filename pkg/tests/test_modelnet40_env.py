import dataclasses
import os
from pathlib import Path

import pytest

from pointhop.cli import cmd_ablate, cmd_eval, cmd_fit
from pointhop.config import ExperimentConfig, validate_config
from pointhop.pipeline import PointHopConfig


@pytest.fixture(scope="module")
def modelnet40() -> ExperimentConfig:
    root = os.getenv("POINTHOP_MODELNET40")
    if not root:
        pytest.skip("POINTHOP_MODELNET40 not set; skipping full dataset run")
    return ExperimentConfig(data_root=root, workers=os.cpu_count() or 1)


def _fit(base: ExperimentConfig, out: Path, **changes):
    cfg = dataclasses.replace(base, out_dir=str(out), **changes)
    validate_config(cfg)
    return cfg, cmd_fit(cfg)


@pytest.fixture(scope="module")
def compact_run(modelnet40, tmp_path_factory):
    return _fit(
        modelnet40, tmp_path_factory.mktemp("compact"), pointhop=PointHopConfig.compact_256()
    )


@pytest.fixture(scope="module")
def baseline_run(modelnet40, tmp_path_factory):
    return _fit(
        modelnet40, tmp_path_factory.mktemp("baseline"), pointhop=PointHopConfig.baseline_1024()
    )


def test_modelnet40_compact_256(compact_run):
    cfg, bundle = compact_run
    assert len(bundle.class_names) == 40
    # Reference accuracy for a single 256-point model is 0.861.
    assert bundle.report.overall_accuracy >= 0.840
    assert (Path(cfg.out_dir) / "report.json").exists()


def test_modelnet40_flower_pot_is_among_hardest(compact_run):
    _, bundle = compact_run
    per_class = dict(zip(bundle.class_names, bundle.report.per_class))
    flower_pot = per_class["flower_pot"]
    harder = [acc for acc in per_class.values() if acc is not None and acc < flower_pot]
    assert len(harder) < 3


def test_modelnet40_baseline_1024(baseline_run):
    _, bundle = baseline_run
    assert bundle.report.overall_accuracy >= 0.865


def test_modelnet40_density_robustness(baseline_run):
    cfg, _ = baseline_run
    reports = cmd_eval(Path(cfg.out_dir), density_sweep=True, workers=cfg.workers)
    assert sorted(reports) == [256, 512, 768, 1024]
    assert reports[256].overall_accuracy >= 0.7 * reports[1024].overall_accuracy


def test_modelnet40_rotation_ensemble(modelnet40, compact_run, tmp_path):
    _, single = compact_run
    _, bundle = _fit(
        modelnet40, tmp_path / "hp-a", pointhop=PointHopConfig.compact_256(), ensemble="HP-A"
    )
    assert len(bundle.branches) == 5
    assert bundle.report.overall_accuracy >= 0.860
    assert bundle.report.overall_accuracy > single.report.overall_accuracy


@pytest.mark.parametrize("operating_point", ["compact_256", "baseline_1024"])
def test_modelnet40_pooling_ensemble(modelnet40, operating_point):
    cfg = dataclasses.replace(modelnet40, pointhop=getattr(PointHopConfig, operating_point)())
    rows = cmd_ablate(cfg, ["poolings"])
    combined = [r for r in rows if len(r.poolings) == 4]
    singles = [r for r in rows if len(r.poolings) == 1]
    assert len(combined) == 1 and len(singles) == 4
    assert all(combined[0].overall_accuracy >= r.overall_accuracy for r in singles)
