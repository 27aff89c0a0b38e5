from pointhop.cli.bundle import RunBundle, load_bundle, save_bundle
from pointhop.cli.commands import (
    ABLATION_AXES,
    AblationRow,
    cmd_ablate,
    cmd_convert,
    cmd_eval,
    cmd_fit,
    cmd_inspect,
    evaluate_bundle,
    predict_clouds,
    train_bundle,
)
from pointhop.cli.data import LoadedSplit, load_split

__all__ = [
    "ABLATION_AXES",
    "AblationRow",
    "LoadedSplit",
    "RunBundle",
    "cmd_ablate",
    "cmd_convert",
    "cmd_eval",
    "cmd_fit",
    "cmd_inspect",
    "evaluate_bundle",
    "load_bundle",
    "load_split",
    "predict_clouds",
    "save_bundle",
    "train_bundle",
]
