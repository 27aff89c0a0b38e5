from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from pointhop.errors import EmptyDataset, MalformedBody, UnknownClassName

logger = logging.getLogger("pointhop")

Split = Literal["train", "test"]

CLASSES_FILE = "classes.txt"


@dataclass(frozen=True)
class DatasetManifest:
    entries: list[tuple[Path, int]]
    class_names: list[str]
    split: str

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> list[int]:
        return [label for _, label in self.entries]

    @property
    def paths(self) -> list[Path]:
        return [path for path, _ in self.entries]


def manifest_path(root: Path, split: str) -> Path:
    return root / f"{split}.tsv"


def _read_class_list(root: Path) -> list[str] | None:
    path = root / CLASSES_FILE
    if not path.exists():
        return None
    names = []
    for raw_line in path.read_text(encoding="utf-8").splitlines():
        line = raw_line.strip()
        if line and not line.startswith("#"):
            names.append(line)
    return names


def _from_manifest_file(root: Path, split: str, path: Path) -> DatasetManifest:
    rows: list[tuple[Path, str]] = []
    for lineno, raw_line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw_line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise MalformedBody(f"{path}:{lineno}: expected 'path<TAB>class_name'")
        file_path = Path(parts[0])
        if not file_path.is_absolute():
            file_path = root / file_path
        rows.append((file_path, parts[1].strip()))

    class_names = _read_class_list(root)
    if class_names is None:
        class_names = sorted({name for _, name in rows})
    ids = {name: i for i, name in enumerate(class_names)}
    entries = []
    for file_path, name in rows:
        if name not in ids:
            raise UnknownClassName(f"class {name!r} is not listed in {CLASSES_FILE}")
        entries.append((file_path, ids[name]))
    if not entries:
        raise EmptyDataset(f"manifest {path} lists no files")
    entries.sort(key=lambda e: str(e[0]))
    return DatasetManifest(entries=entries, class_names=class_names, split=split)


def _from_directory_tree(root: Path, split: str) -> DatasetManifest:
    if not root.is_dir():
        raise EmptyDataset(f"dataset root {root} does not exist")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise EmptyDataset(f"dataset root {root} contains no class directories")
    class_names = _read_class_list(root) or [p.name for p in class_dirs]
    ids = {name: i for i, name in enumerate(class_names)}
    for class_dir in class_dirs:
        if class_dir.name not in ids:
            raise UnknownClassName(f"class {class_dir.name!r} is not listed in {CLASSES_FILE}")
    entries: list[tuple[Path, int]] = []
    for name in class_names:
        split_dir = root / name / split
        if not split_dir.is_dir():
            raise EmptyDataset(f"class {name!r} has no {split} directory")
        files = sorted(split_dir.glob("*.off"))
        if not files:
            raise EmptyDataset(f"class {name!r} has no {split} files")
        entries.extend((f, ids[name]) for f in files)
    entries.sort(key=lambda e: str(e[0]))
    return DatasetManifest(entries=entries, class_names=class_names, split=split)


def load_manifest(root: Path, split: str) -> DatasetManifest:
    """Load ``<root>/<split>.tsv`` if present, else scan ``<root>/<class>/<split>/*.off``.

    Class ids follow ``classes.txt`` when present, otherwise sorted class names.
    """
    root = Path(root)
    if split not in ("train", "test"):
        raise ValueError("split must be 'train' or 'test'")
    path = manifest_path(root, split)
    if path.exists():
        manifest = _from_manifest_file(root, split, path)
    else:
        manifest = _from_directory_tree(root, split)
    logger.debug("MANIFEST %s %s entries=%d", root, split, len(manifest))
    return manifest


def write_manifest(manifest: DatasetManifest, root: Path) -> None:
    """Write ``<root>/<split>.tsv`` (paths relative to root) and ``classes.txt``."""
    root = Path(root)
    lines = []
    for file_path, label in manifest.entries:
        try:
            rel = file_path.relative_to(root)
        except ValueError:
            rel = file_path
        lines.append(f"{rel.as_posix()}\t{manifest.class_names[label]}")
    manifest_path(root, manifest.split).write_text("\n".join(lines) + "\n", encoding="utf-8")
    (root / CLASSES_FILE).write_text("\n".join(manifest.class_names) + "\n", encoding="utf-8")
