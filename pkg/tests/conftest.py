"""
Shared pytest setup for glod-bench
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src and fixtures to path
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests" / "fixtures"))

from core.graph import Graph, GraphDataset, LabelSource  # noqa: E402
from generate_test_data import TuDataGenerator  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "datasets: needs the TU benchmark datasets under $GLOD_DATA_DIR"
    )


def pytest_collection_modifyitems(config, items):
    if os.environ.get("GLOD_DATA_DIR"):
        return
    skip = pytest.mark.skip(reason="GLOD_DATA_DIR not set")
    for item in items:
        if "datasets" in item.keywords:
            item.add_marker(skip)


def make_dataset(graphs, classes=None, alphabet=None, name="toy") -> GraphDataset:
    classes = [0] * len(graphs) if classes is None else classes
    if alphabet is None:
        alphabet = max((int(g.node_labels.max()) + 1 for g in graphs if g.node_count), default=1)
    return GraphDataset(graphs=list(graphs), class_labels=classes, name=name,
                        label_alphabet_size=alphabet, label_source=LabelSource.SYNTHETIC)


def path_graph(n: int, labels=None) -> Graph:
    labels = np.zeros(n, dtype=np.int64) if labels is None else labels
    return Graph(n, [(i, i + 1) for i in range(n - 1)], labels)


def cycle_graph(n: int, labels=None) -> Graph:
    labels = np.zeros(n, dtype=np.int64) if labels is None else labels
    return Graph(n, [(i, (i + 1) % n) for i in range(n)], labels)


def petersen(labels=None) -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    labels = np.zeros(10, dtype=np.int64) if labels is None else labels
    return Graph(10, outer + spokes + inner, labels)


@pytest.fixture(scope="session")
def synthetic_dataset() -> GraphDataset:
    return TuDataGenerator(seed=7).binary_dataset(compact=40, diverse=40)


@pytest.fixture(scope="session")
def three_class_dataset(synthetic_dataset) -> GraphDataset:
    classes = synthetic_dataset.class_labels.copy()
    classes[np.flatnonzero(classes == 1)[:20]] = 2
    return make_dataset(synthetic_dataset.graphs, classes, alphabet=3, name="THREE")


@pytest.fixture
def data_dir() -> Path:
    return Path(os.environ["GLOD_DATA_DIR"])
