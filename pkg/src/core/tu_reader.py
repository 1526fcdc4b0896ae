"""
TU Dataset Reader
Loads and writes graph classification datasets in the TU text layout

A dataset NAME lives in a directory holding:
    NAME_A.txt                 "row, col" 1-based node ids, one edge direction per line
    NAME_graph_indicator.txt   1-based graph id of every node
    NAME_graph_labels.txt      one class value per graph
    NAME_node_labels.txt       optional, one label value per node
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from core.errors import FormatError, IngestionError
from core.graph import Graph, GraphDataset, LabelSource, compact_ids, degree_labeling
from core.io_utils import atomic_write_text

logger = logging.getLogger(__name__)

MANDATORY_SUFFIXES = ("_A.txt", "_graph_indicator.txt", "_graph_labels.txt")
NODE_LABEL_SUFFIX = "_node_labels.txt"


def _read_int_table(path: Path, columns: int) -> np.ndarray:
    """Read a comma-separated integer table; an empty file yields zero rows"""
    try:
        frame = pd.read_csv(path, header=None, sep=",", skipinitialspace=True,
                            skip_blank_lines=False, engine="c")
    except pd.errors.EmptyDataError:
        return np.empty((0, columns), dtype=np.int64)

    if frame.shape[1] < columns:
        raise FormatError(f"expected {columns} column(s), found {frame.shape[1]}",
                          path=str(path))
    frame = frame.iloc[:, :columns].copy()
    for col in frame.columns:
        numeric = pd.to_numeric(frame[col], errors="coerce")
        bad = numeric.isna() | (numeric != numeric.round())
        if bad.any():
            line = int(np.flatnonzero(bad.to_numpy())[0]) + 1
            raise FormatError(f"non-integer value {frame[col].iloc[line - 1]!r}",
                              path=str(path), line=line)
        frame[col] = numeric.astype(np.int64)
    return frame.to_numpy(dtype=np.int64)


def _require(directory: Path, name: str, suffix: str) -> Path:
    path = directory / f"{name}{suffix}"
    if not path.is_file():
        raise IngestionError(f"missing mandatory file {path.name} in {directory}",
                             path=str(path))
    return path


def load_tu_dataset(directory: Union[str, Path], name: str) -> GraphDataset:
    """
    Load a TU-format dataset into 0-based internal graphs

    Reciprocal and duplicate edge lines collapse into one undirected edge;
    self-loop lines are dropped with a warning. Without a node label file the
    graphs are labeled by node degree. Node-label ids are compacted to 0..d-1.

    Args:
        directory: Folder holding the NAME_*.txt files
        name: Dataset name (file prefix)

    Returns:
        GraphDataset
    """
    directory = Path(directory)
    edge_path, indicator_path, labels_path = (
        _require(directory, name, suffix) for suffix in MANDATORY_SUFFIXES
    )
    node_label_path = directory / f"{name}{NODE_LABEL_SUFFIX}"

    indicator = _read_int_table(indicator_path, 1)[:, 0]
    graph_values = _read_int_table(labels_path, 1)[:, 0]
    graph_count = len(graph_values)
    node_total = len(indicator)

    if node_total and (indicator.min() < 1 or indicator.max() > graph_count):
        line = int(np.flatnonzero((indicator < 1) | (indicator > graph_count))[0]) + 1
        raise FormatError(f"graph id outside 1..{graph_count}",
                          path=str(indicator_path), line=line)

    graph_of_node = indicator - 1
    node_counts = np.bincount(graph_of_node, minlength=graph_count)
    starts = np.concatenate([[0], np.cumsum(node_counts)[:-1]]).astype(np.int64)
    order = np.argsort(graph_of_node, kind="stable")
    local_index = np.empty(node_total, dtype=np.int64)
    local_index[order] = np.arange(node_total) - starts[graph_of_node[order]]

    # Edges: validate, map to (graph, local u, local v), collapse reciprocals
    pairs = _read_int_table(edge_path, 2) - 1
    if len(pairs):
        bad = (pairs < 0).any(axis=1) | (pairs >= node_total).any(axis=1)
        if bad.any():
            line = int(np.flatnonzero(bad)[0]) + 1
            raise FormatError(f"edge references unknown node (nodes are 1..{node_total})",
                              path=str(edge_path), line=line)
        cross = graph_of_node[pairs[:, 0]] != graph_of_node[pairs[:, 1]]
        if cross.any():
            line = int(np.flatnonzero(cross)[0]) + 1
            raise FormatError("edge joins nodes of two different graphs",
                              path=str(edge_path), line=line)
        loops = pairs[:, 0] == pairs[:, 1]
        if loops.any():
            logger.warning("Dropping %d self-loop line(s) from %s", int(loops.sum()), edge_path.name)
            pairs = pairs[~loops]

    if len(pairs):
        gid = graph_of_node[pairs[:, 0]]
        u = local_index[pairs[:, 0]]
        v = local_index[pairs[:, 1]]
        triples = np.unique(np.column_stack([gid, np.minimum(u, v), np.maximum(u, v)]), axis=0)
    else:
        triples = np.empty((0, 3), dtype=np.int64)
    bounds = np.searchsorted(triples[:, 0], np.arange(graph_count + 1))

    # Node labels
    if node_label_path.is_file():
        raw_labels = _read_int_table(node_label_path, 1)[:, 0]
        if len(raw_labels) != node_total:
            raise FormatError(f"{len(raw_labels)} node labels for {node_total} nodes",
                              path=str(node_label_path))
        node_labels, label_values = compact_ids(raw_labels)
        alphabet = max(len(label_values), 1)
        label_source = LabelSource.FILE
    else:
        node_labels = np.zeros(node_total, dtype=np.int64)
        label_values = np.zeros(1, dtype=np.int64)
        alphabet = 1
        label_source = LabelSource.DEGREE

    graphs = []
    for g in range(graph_count):
        members = order[starts[g]:starts[g] + node_counts[g]]
        graph_edges = triples[bounds[g]:bounds[g + 1], 1:]
        graphs.append(Graph(
            node_count=int(node_counts[g]),
            edges=graph_edges,
            node_labels=node_labels[members],
            original_node_ids=members + 1,
        ))

    class_labels, class_values = compact_ids(graph_values)
    metadata: Dict[str, object] = {
        "source_directory": str(directory),
        "class_value_map": {int(v): i for i, v in enumerate(class_values)},
        "node_label_values": label_values.tolist() if label_source == LabelSource.FILE else None,
    }
    if len(class_values) != 2:
        logger.info("%s has %d classes; select a class pair before benchmarking",
                    name, len(class_values))

    dataset = GraphDataset(
        graphs=graphs,
        class_labels=class_labels,
        name=name,
        label_alphabet_size=alphabet,
        label_source=label_source,
        metadata=metadata,
    )
    if label_source == LabelSource.DEGREE:
        dataset = degree_labeling(dataset)

    logger.info("Loaded %s: %d graphs, %d nodes, %d node labels, classes %s",
                name, graph_count, node_total, dataset.label_alphabet_size,
                dataset.class_sizes())
    return dataset


def write_tu_dataset(dataset: GraphDataset, directory: Union[str, Path],
                     name: Optional[str] = None) -> Path:
    """
    Write a dataset in the TU layout (both edge directions, 1-based ids, LF)

    Node labels are written as their compact ids, class labels as stored.
    """
    name = name or dataset.name
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    edge_lines = []
    indicator_lines = []
    label_lines = []
    offset = 0
    for g, graph in enumerate(dataset.graphs, start=1):
        for u, v in graph.edges:
            a, b = int(u) + offset + 1, int(v) + offset + 1
            edge_lines.append(f"{a}, {b}")
            edge_lines.append(f"{b}, {a}")
        indicator_lines.extend([str(g)] * graph.node_count)
        label_lines.extend(str(int(x)) for x in graph.node_labels)
        offset += graph.node_count

    def _text(lines):
        return "".join(line + "\n" for line in lines)

    atomic_write_text(directory / f"{name}_A.txt", _text(edge_lines))
    atomic_write_text(directory / f"{name}_graph_indicator.txt", _text(indicator_lines))
    atomic_write_text(directory / f"{name}_graph_labels.txt",
                      _text(str(int(c)) for c in dataset.class_labels))
    atomic_write_text(directory / f"{name}{NODE_LABEL_SUFFIX}", _text(label_lines))
    logger.info("Wrote %s (%d graphs) to %s", name, len(dataset), directory)
    return directory
