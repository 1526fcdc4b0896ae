"""
Dataset Registry
Known benchmark datasets, how to load them and which family they belong to
"""

import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from core.errors import UsageError
from core.graph import GraphDataset, select_class_pair
from core.tu_reader import load_tu_dataset


class DatasetKind(Enum):
    """X&Non-X: one coherent class vs everything else; X&Y: two coherent classes"""
    X_NON_X = "x_non_x"
    X_Y = "x_y"


@dataclass(frozen=True)
class DatasetInfo:
    name: str
    source: str
    kind: DatasetKind
    class_pair: Optional[Tuple[int, int]] = None
    optional: bool = False


REGISTRY: Dict[str, DatasetInfo] = {
    info.name: info for info in [
        DatasetInfo("DD", "DD", DatasetKind.X_NON_X),
        DatasetInfo("PROTEINS", "PROTEINS", DatasetKind.X_NON_X),
        DatasetInfo("NCI1", "NCI1", DatasetKind.X_NON_X),
        DatasetInfo("Mutagenicity", "Mutagenicity", DatasetKind.X_NON_X),
        DatasetInfo("AIDS", "AIDS", DatasetKind.X_NON_X),
        DatasetInfo("IMDB-BINARY", "IMDB-BINARY", DatasetKind.X_Y),
        DatasetInfo("ENZYMES-c0c1", "ENZYMES", DatasetKind.X_Y, (0, 1)),
        DatasetInfo("ENZYMES-c2c3", "ENZYMES", DatasetKind.X_Y, (2, 3)),
        DatasetInfo("REDDIT-c0c1", "REDDIT-MULTI-5K", DatasetKind.X_Y, (0, 1), optional=True),
        DatasetInfo("REDDIT-c2c3", "REDDIT-MULTI-5K", DatasetKind.X_Y, (2, 3), optional=True),
    ]
}

ALIASES = {"IMDB": "IMDB-BINARY"}


def dataset_kind(name: str) -> Optional[DatasetKind]:
    info = REGISTRY.get(ALIASES.get(name, name))
    return info.kind if info else None


def default_data_dir() -> Optional[Path]:
    value = os.environ.get("GLOD_DATA_DIR")
    return Path(value) if value else None


def available_datasets(data_dir: Optional[Union[str, Path]]) -> List[str]:
    """Registry names whose source folder exists under data_dir"""
    if data_dir is None:
        return []
    root = Path(data_dir)
    return [name for name, info in REGISTRY.items()
            if (root / info.source / f"{info.source}_A.txt").is_file()]


def resolve_dataset(dataset: str, data_dir: Optional[Union[str, Path]] = None) -> GraphDataset:
    """
    Load a dataset by registry name or by path to a TU directory

    Args:
        dataset: Registry name (e.g. 'DD', 'ENZYMES-c0c1') or a directory path
        data_dir: Root folder holding one sub-folder per TU dataset

    Returns:
        GraphDataset (binarized for class-pair datasets)
    """
    path = Path(dataset)
    if path.is_dir():
        return load_tu_dataset(path, path.name)

    name = ALIASES.get(dataset, dataset)
    info = REGISTRY.get(name)
    root = Path(data_dir) if data_dir else default_data_dir()

    if root is not None and info is None and (root / name / f"{name}_A.txt").is_file():
        return load_tu_dataset(root / name, name)

    if info is None or root is None or not (root / info.source).is_dir():
        valid = sorted(set(REGISTRY) | set(available_datasets(root)))
        where = f" under {root}" if root else " (set GLOD_DATA_DIR or --data-dir)"
        raise UsageError(
            f"unknown or unavailable dataset {dataset!r}{where}; valid values: {', '.join(valid)}"
        )

    loaded = load_tu_dataset(root / info.source, info.source)
    if info.class_pair is not None:
        return select_class_pair(loaded, info.class_pair, name=info.name)
    if name != info.source:
        loaded.name = info.name
    return loaded
