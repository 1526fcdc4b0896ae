"""
Graph and Dataset Representations
Node-labeled undirected simple graphs and labeled collections of them
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix

from core.errors import ParameterError

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def compact_ids(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Map arbitrary integer ids onto 0..d-1 in ascending order of value

    Returns:
        (compact ids, sorted distinct original values)
    """
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0:
        return values.copy(), np.empty(0, dtype=np.int64)
    distinct, inverse = np.unique(values, return_inverse=True)
    return inverse.astype(np.int64).reshape(values.shape), distinct


class Graph:
    """
    Immutable node-labeled undirected simple graph

    Edges are stored canonically as sorted (u, v) pairs with u < v.
    """

    __slots__ = ("node_count", "edges", "node_labels", "original_node_ids", "_csr")

    def __init__(self, node_count: int, edges, node_labels,
                 original_node_ids: Optional[Sequence[int]] = None):
        if node_count < 0:
            raise ParameterError(f"node_count must be >= 0, got {node_count}")

        edge_array = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edge_array.size:
            if edge_array.min() < 0 or edge_array.max() >= node_count:
                raise ParameterError(
                    f"edge endpoint outside 0..{node_count - 1}"
                )
            if np.any(edge_array[:, 0] == edge_array[:, 1]):
                raise ParameterError("self-loops are not allowed in a simple graph")
            edge_array = np.sort(edge_array, axis=1)
            canonical = np.unique(edge_array, axis=0)
            if len(canonical) != len(edge_array):
                raise ParameterError("duplicate edges are not allowed in a simple graph")
            edge_array = canonical

        labels = np.asarray(node_labels, dtype=np.int64).reshape(-1)
        if len(labels) != node_count:
            raise ParameterError(
                f"expected {node_count} node labels, got {len(labels)}"
            )
        if labels.size and labels.min() < 0:
            raise ParameterError("node labels must be non-negative")

        ids = None
        if original_node_ids is not None:
            ids = np.asarray(original_node_ids, dtype=np.int64).reshape(-1)
            if len(ids) != node_count:
                raise ParameterError("original_node_ids length must equal node_count")
            ids = _frozen(ids)

        self.node_count = int(node_count)
        self.edges = _frozen(edge_array)
        self.node_labels = _frozen(labels)
        self.original_node_ids = ids
        self._csr = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency(self) -> csr_matrix:
        """Symmetric 0/1 adjacency matrix (cached)"""
        if self._csr is None:
            n = self.node_count
            if self.edge_count:
                rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
                cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
            else:
                rows = cols = np.empty(0, dtype=np.int64)
            data = np.ones(len(rows), dtype=np.float64)
            adj = csr_matrix((data, (rows, cols)), shape=(n, n))
            adj.sort_indices()
            self._csr = adj
        return self._csr

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.reshape(-1), minlength=self.node_count).astype(np.int64)

    def neighbor_index(self) -> Tuple[np.ndarray, np.ndarray]:
        """CSR (indptr, indices) view of the neighbor lists"""
        adj = self.adjacency()
        return adj.indptr, adj.indices

    def edge_set(self) -> set:
        return {(int(u), int(v)) for u, v in self.edges}

    def with_labels(self, node_labels) -> "Graph":
        return Graph(self.node_count, self.edges, node_labels, self.original_node_ids)

    def with_edges(self, edges) -> "Graph":
        return Graph(self.node_count, edges, self.node_labels, self.original_node_ids)

    def permuted(self, permutation: Sequence[int]) -> "Graph":
        """Relabel node i as permutation[i]"""
        perm = np.asarray(permutation, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.node_count)):
            raise ParameterError("permutation must be a bijection of the node indices")
        labels = np.empty_like(self.node_labels)
        labels[perm] = self.node_labels
        edges = perm[self.edges] if self.edge_count else self.edges
        return Graph(self.node_count, edges, labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.node_count == other.node_count
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.node_labels, other.node_labels))

    def __hash__(self):
        return hash((self.node_count, self.edges.tobytes(), self.node_labels.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


class LabelSource(Enum):
    """Where node labels came from"""
    FILE = "file"
    DEGREE = "degree"
    SYNTHETIC = "synthetic"


@dataclass(eq=False)
class GraphDataset:
    """Ordered collection of graphs with per-graph class labels"""
    graphs: List[Graph]
    class_labels: np.ndarray
    name: str
    label_alphabet_size: int
    label_source: LabelSource = LabelSource.FILE
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.class_labels = np.asarray(self.class_labels, dtype=np.int64).reshape(-1)
        if len(self.class_labels) != len(self.graphs):
            raise ParameterError(
                f"{len(self.class_labels)} class labels for {len(self.graphs)} graphs"
            )
        for index, graph in enumerate(self.graphs):
            if graph.node_count and graph.node_labels.max() >= self.label_alphabet_size:
                raise ParameterError(
                    f"graph {index} uses label id {graph.node_labels.max()} "
                    f">= alphabet size {self.label_alphabet_size}"
                )

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.class_labels)

    @property
    def is_binary(self) -> bool:
        return len(self.classes) == 2

    def class_sizes(self) -> Dict[int, int]:
        values, counts = np.unique(self.class_labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def subset(self, indices: Sequence[int], name: Optional[str] = None) -> "GraphDataset":
        """Graphs at `indices` (order kept); the label alphabet is unchanged"""
        idx = np.asarray(indices, dtype=np.int64)
        meta = dict(self.metadata)
        meta["parent"] = self.name
        return GraphDataset(
            graphs=[self.graphs[i] for i in idx],
            class_labels=self.class_labels[idx],
            name=name or self.name,
            label_alphabet_size=self.label_alphabet_size,
            label_source=self.label_source,
            metadata=meta,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphDataset):
            return NotImplemented
        return (self.name == other.name
                and self.label_alphabet_size == other.label_alphabet_size
                and np.array_equal(self.class_labels, other.class_labels)
                and len(self.graphs) == len(other.graphs)
                and all(a == b for a, b in zip(self.graphs, other.graphs)))


class PerturbationKind(Enum):
    LABEL_FLIP = "label_flip"
    EDGE_REWIRE = "edge_rewire"


@dataclass(frozen=True)
class PerturbationSpec:
    """A controlled perturbation: m label flips or r edge-pair rewirings"""
    kind: PerturbationKind
    magnitude: int
    seed: int
    from_label: int = 0
    to_label: int = 1

    def __post_init__(self):
        if self.magnitude < 0:
            raise ParameterError(f"magnitude must be >= 0, got {self.magnitude}")


def degree_labeling(dataset: GraphDataset, replace: bool = True) -> GraphDataset:
    """
    Label every node by its degree, then compact ids over the whole dataset

    Args:
        dataset: Input dataset
        replace: When False, a dataset whose labels came from a label file is
            returned unchanged

    Returns:
        New GraphDataset with degree-derived labels
    """
    if not replace and dataset.label_source == LabelSource.FILE:
        return dataset

    raw = [graph.degrees() for graph in dataset.graphs]
    flat = np.concatenate(raw) if raw else np.empty(0, dtype=np.int64)
    compact, distinct = compact_ids(flat)

    graphs = []
    offset = 0
    for graph, degrees in zip(dataset.graphs, raw):
        labels = compact[offset:offset + len(degrees)]
        offset += len(degrees)
        graphs.append(graph.with_labels(labels))

    meta = dict(dataset.metadata)
    meta["degree_values"] = distinct.tolist()
    logger.debug("Degree labeling of %s: %d distinct degrees", dataset.name, len(distinct))
    return GraphDataset(
        graphs=graphs,
        class_labels=dataset.class_labels.copy(),
        name=dataset.name,
        label_alphabet_size=max(len(distinct), 1),
        label_source=LabelSource.DEGREE,
        metadata=meta,
    )


def recompact_labels(graphs: List[Graph]) -> Tuple[List[Graph], int]:
    """Re-compact node label ids over a list of graphs"""
    raw = [graph.node_labels for graph in graphs]
    flat = np.concatenate(raw) if raw else np.empty(0, dtype=np.int64)
    compact, distinct = compact_ids(flat)
    out = []
    offset = 0
    for graph in graphs:
        n = graph.node_count
        out.append(graph.with_labels(compact[offset:offset + n]))
        offset += n
    return out, max(len(distinct), 1)


def select_class_pair(dataset: GraphDataset, classes: Tuple[int, int],
                      name: Optional[str] = None) -> GraphDataset:
    """
    Keep two classes of a multi-class dataset and binarize them (a -> 0, b -> 1)
    """
    first, second = (int(c) for c in classes)
    if first == second:
        raise ParameterError("class pair must name two different classes")
    present = set(dataset.classes.tolist())
    missing = [c for c in (first, second) if c not in present]
    if missing:
        raise ParameterError(f"classes {missing} not present in {dataset.name}")

    keep = np.flatnonzero(np.isin(dataset.class_labels, [first, second]))
    graphs, alphabet = recompact_labels([dataset.graphs[i] for i in keep])
    binary = (dataset.class_labels[keep] == second).astype(np.int64)

    meta = dict(dataset.metadata)
    meta["class_pair"] = [first, second]
    return GraphDataset(
        graphs=graphs,
        class_labels=binary,
        name=name or f"{dataset.name}(c{first}&c{second})",
        label_alphabet_size=alphabet,
        label_source=dataset.label_source,
        metadata=meta,
    )


def dataset_statistics(dataset: GraphDataset) -> pd.DataFrame:
    """Per-class summary: #graphs, #node labels, avg #nodes, avg #edges, avg degree"""
    rows = []
    for cls in dataset.classes:
        members = [g for g, c in zip(dataset.graphs, dataset.class_labels) if c == cls]
        nodes = np.array([g.node_count for g in members], dtype=float)
        edges = np.array([g.edge_count for g in members], dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            degree = np.where(nodes > 0, 2.0 * edges / np.maximum(nodes, 1), 0.0)
        rows.append({
            "dataset": dataset.name,
            "class": int(cls),
            "graphs": len(members),
            "node_labels": (dataset.label_alphabet_size
                            if dataset.label_source == LabelSource.FILE else None),
            "avg_nodes": round(float(nodes.mean()), 2),
            "avg_edges": round(float(edges.mean()), 2),
            "avg_degree": round(float(degree.mean()), 2),
        })
    return pd.DataFrame(rows)
