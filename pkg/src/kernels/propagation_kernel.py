"""
Propagation Kernel
Label distributions diffused with T = D^-1 A and binned by a random-projection LSH
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.sparse import csr_matrix, diags

from core.errors import ParameterError
from core.graph import Graph, GraphDataset
from kernels.kernel_matrix import KernelMatrix
from kernels.wl_kernel import count_matrix, gram_from_counts

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PkHashSpec:
    """
    One-dimensional 1-stable LSH per iteration: floor((x . u + b) / w)

    Directions and offsets of iteration l depend only on (seed, l), so they
    are shared across all graphs and do not change with L.
    """
    bin_width: float
    dimension: int
    seed: int

    def __post_init__(self):
        if not self.bin_width > 0:
            raise ParameterError(f"bin width must be > 0, got {self.bin_width}")

    def parameters(self, iteration: int):
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, iteration]))
        direction = rng.standard_normal(self.dimension)
        offset = rng.uniform(0.0, self.bin_width)
        return direction, offset

    def hash_rows(self, features: np.ndarray, iteration: int) -> np.ndarray:
        direction, offset = self.parameters(iteration)
        return np.floor((features @ direction + offset) / self.bin_width).astype(np.int64)


def transition_matrix(graph: Graph) -> csr_matrix:
    """Row-stochastic T = D^-1 A; isolated nodes keep their mass (T_vv = 1)"""
    adj = graph.adjacency()
    degrees = np.asarray(adj.sum(axis=1)).reshape(-1)
    isolated = degrees == 0
    if isolated.any():
        adj = adj + diags(isolated.astype(np.float64), format="csr")
        degrees = np.where(isolated, 1.0, degrees)
    return csr_matrix(diags(1.0 / degrees) @ adj)


def pk_propagate(graph: Graph, L: int, alphabet_size: Optional[int] = None) -> List[np.ndarray]:
    """
    Feature matrices X_0..X_L with X_0 one-hot labels and X_{l+1} = T X_l

    Every row of every X_l sums to 1.
    """
    if L < 0:
        raise ParameterError(f"L must be >= 0, got {L}")
    d = alphabet_size or (int(graph.node_labels.max()) + 1 if graph.node_count else 1)
    features = np.zeros((graph.node_count, d), dtype=np.float64)
    features[np.arange(graph.node_count), graph.node_labels] = 1.0

    transition = transition_matrix(graph)
    out = [features]
    for _ in range(L):
        features = transition @ features
        out.append(np.asarray(features))
    return out


def pk_kernel(dataset: GraphDataset, L: int, w: float = 0.1, seed: int = 0) -> KernelMatrix:
    """
    Propagation kernel: per-iteration dot products of LSH bin-count histograms

    Args:
        dataset: Labeled graphs
        L: Number of propagation steps (slices 0..L)
        w: Bin width of the hash
        seed: Seed of the hash directions and offsets

    Returns:
        KernelMatrix with L+1 slices
    """
    spec = PkHashSpec(bin_width=w, dimension=dataset.label_alphabet_size, seed=seed)
    propagated = [pk_propagate(graph, L, dataset.label_alphabet_size) for graph in dataset.graphs]

    slices = []
    for iteration in range(L + 1):
        binned = [spec.hash_rows(per_graph[iteration], iteration) for per_graph in propagated]
        flat = np.concatenate(binned) if binned else np.empty(0, dtype=np.int64)
        distinct, dense = np.unique(flat, return_inverse=True)
        dense = dense.reshape(-1)
        arrays = []
        offset = 0
        for bins in binned:
            arrays.append(dense[offset:offset + len(bins)])
            offset += len(bins)
        slices.append(gram_from_counts(count_matrix(arrays, len(distinct))))
        logger.debug("PK iteration %d on %s: %d occupied bins", iteration, dataset.name, len(distinct))

    logger.info("PK kernel on %s: N=%d, L=%d, w=%g, seed=%d", dataset.name, len(dataset), L, w, seed)
    return KernelMatrix(
        per_iteration=slices,
        kernel="pk",
        params={"L": L, "w": w, "seed": seed,
                "normalization": "cosine of cumulative and of each slice"},
    )
