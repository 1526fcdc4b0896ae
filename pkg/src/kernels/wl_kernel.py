"""
Weisfeiler-Leman Subtree Kernel
Iterative relabeling by (own label, sorted neighbor labels) and label-count dot products
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from core.errors import ParameterError
from core.graph import GraphDataset
from kernels.kernel_matrix import KernelMatrix

logger = logging.getLogger(__name__)

Signature = Tuple[int, Tuple[int, ...]]


@dataclass
class WlLabelTable:
    """
    Dataset-wide compressed label dictionaries

    tables[l - 1] maps the iteration-l signature (previous label, sorted
    neighbor labels) to its dense id; ids follow first encounter over graphs
    in dataset order and nodes in index order.
    """
    base_alphabet_size: int
    tables: List[Dict[Signature, int]] = field(default_factory=list)

    def alphabet_size(self, iteration: int) -> int:
        if iteration == 0:
            return self.base_alphabet_size
        return len(self.tables[iteration - 1])

    @property
    def iterations(self) -> int:
        return len(self.tables)


def wl_relabel(dataset: GraphDataset, L: int) -> Tuple[List[List[np.ndarray]], WlLabelTable]:
    """
    Run L rounds of WL relabeling over a dataset with one shared table

    Returns:
        (labels[g][l] = label array of graph g at iteration l, label table)
    """
    if L < 0:
        raise ParameterError(f"L must be >= 0, got {L}")

    table = WlLabelTable(base_alphabet_size=dataset.label_alphabet_size)
    labels = [[graph.node_labels.copy()] for graph in dataset.graphs]
    neighbor_lists = []
    for graph in dataset.graphs:
        indptr, indices = graph.neighbor_index()
        indices = indices.tolist()
        neighbor_lists.append([indices[indptr[v]:indptr[v + 1]]
                               for v in range(graph.node_count)])

    for iteration in range(1, L + 1):
        compressed: Dict[Signature, int] = {}
        for g, adjacency in enumerate(neighbor_lists):
            previous = labels[g][-1].tolist()
            current = []
            for v, neighbors in enumerate(adjacency):
                signature = (previous[v], tuple(sorted(previous[u] for u in neighbors)))
                new_id = compressed.get(signature)
                if new_id is None:
                    new_id = len(compressed)
                    compressed[signature] = new_id
                current.append(new_id)
            labels[g].append(np.asarray(current, dtype=np.int64))
        table.tables.append(compressed)
        logger.debug("WL iteration %d on %s: %d labels", iteration, dataset.name, len(compressed))

    return labels, table


def count_matrix(label_arrays: List[np.ndarray], alphabet_size: int) -> csr_matrix:
    """Sparse (graphs x labels) label-count matrix"""
    rows = np.concatenate([np.full(len(a), g, dtype=np.int64)
                           for g, a in enumerate(label_arrays)]) if label_arrays else np.empty(0, np.int64)
    cols = np.concatenate(label_arrays) if label_arrays else np.empty(0, np.int64)
    data = np.ones(len(cols), dtype=np.float64)
    counts = csr_matrix((data, (rows, cols)), shape=(len(label_arrays), max(alphabet_size, 1)))
    counts.sum_duplicates()
    return counts


def gram_from_counts(counts: csr_matrix) -> np.ndarray:
    gram = (counts @ counts.T).toarray()
    return 0.5 * (gram + gram.T)


def wl_kernel(dataset: GraphDataset, L: int) -> KernelMatrix:
    """
    WL subtree kernel: per-iteration dot products of label-count vectors

    Args:
        dataset: Labeled graphs
        L: Number of relabeling iterations (slices 0..L)

    Returns:
        KernelMatrix with L+1 slices
    """
    labels, table = wl_relabel(dataset, L)
    slices = []
    for iteration in range(L + 1):
        counts = count_matrix([per_graph[iteration] for per_graph in labels],
                              table.alphabet_size(iteration))
        slices.append(gram_from_counts(counts))

    logger.info("WL kernel on %s: N=%d, L=%d, final alphabet %d",
                dataset.name, len(dataset), L, table.alphabet_size(L))
    return KernelMatrix(
        per_iteration=slices,
        kernel="wl",
        params={"L": L, "normalization": "cosine of cumulative and of each slice"},
    )
