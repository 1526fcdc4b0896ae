"""
FGSD Graph Embedding
Histogram of harmonic spectral distances between all node pairs (labels ignored)
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd
from scipy.linalg import eigh
from scipy.spatial.distance import pdist, squareform

from core.errors import ParameterError
from core.graph import Graph, GraphDataset
from core.io_utils import write_frame

logger = logging.getLogger(__name__)

EIGEN_CUTOFF = 1e-8
DEFAULT_MAX_NODES = 2_000


@dataclass
class Embedding:
    """N x B matrix of spectral-distance histograms"""
    vectors: np.ndarray
    bin_width: float
    range_max: float
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def bins(self) -> int:
        return self.vectors.shape[1]

    def bin_edges(self) -> np.ndarray:
        return np.linspace(0.0, self.range_max, self.bins + 1)

    def restricted(self, indices) -> "Embedding":
        idx = np.asarray(indices, dtype=np.int64)
        return Embedding(self.vectors[idx], self.bin_width, self.range_max, dict(self.params))

    def to_csv(self, path: Union[str, Path]) -> Path:
        """One row per graph; header names each bin by its [left:right) edges"""
        edges = self.bin_edges()
        columns = [f"{lo:.6g}:{hi:.6g}" for lo, hi in zip(edges[:-1], edges[1:])]
        frame = pd.DataFrame(self.vectors, columns=columns)
        frame.insert(0, "graph_index", np.arange(len(frame)))
        return write_frame(frame, path)


def laplacian(graph: Graph, kind: str = "combinatorial") -> np.ndarray:
    adj = graph.adjacency().toarray()
    degrees = adj.sum(axis=1)
    if kind == "combinatorial":
        return np.diag(degrees) - adj
    if kind == "normalized":
        with np.errstate(divide="ignore"):
            inv_sqrt = np.where(degrees > 0, 1.0 / np.sqrt(degrees), 0.0)
        lap = np.eye(graph.node_count) - inv_sqrt[:, None] * adj * inv_sqrt[None, :]
        lap[degrees == 0, degrees == 0] = 0.0
        return lap
    raise ParameterError(f"unknown Laplacian kind {kind!r}")


def harmonic_spectral_distances(graph: Graph, kind: str = "combinatorial") -> np.ndarray:
    """
    S(x,y) = sum over non-zero eigenpairs of (1/lambda) (phi(x) - phi(y))^2

    For a connected graph with the combinatorial Laplacian this is the
    effective resistance between x and y.
    """
    n = graph.node_count
    if n == 0:
        return np.zeros((0, 0))
    values, vectors = eigh(laplacian(graph, kind))
    cutoff = EIGEN_CUTOFF * max(float(values.max()), 1.0)
    keep = values > cutoff
    green = (vectors[:, keep] / values[keep]) @ vectors[:, keep].T
    diag = np.diag(green)
    distances = diag[:, None] + diag[None, :] - 2.0 * green
    distances = 0.5 * (distances + distances.T)
    np.fill_diagonal(distances, 0.0)
    return np.clip(distances, 0.0, None)


def fgsd_embed(dataset: GraphDataset, bins: int = 200, range_max: float = 20.0,
               laplacian_kind: str = "combinatorial",
               max_nodes: int = DEFAULT_MAX_NODES) -> Embedding:
    """
    Embed every graph as a histogram of its n^2 ordered-pair spectral distances

    Values above range_max are clamped into the last bin, so each row sums
    to n^2.

    Args:
        dataset: Graphs (node labels are ignored)
        bins: Number of equal-width bins over [0, range_max]
        range_max: Upper end of the histogram range
        laplacian_kind: 'combinatorial' (L = D - A) or 'normalized'
        max_nodes: Larger graphs are rejected; pass None to allow any size

    Returns:
        Embedding
    """
    if bins < 1 or not range_max > 0:
        raise ParameterError(f"need bins >= 1 and range_max > 0, got {bins}, {range_max}")
    if any(graph.node_count == 0 for graph in dataset.graphs):
        raise ParameterError("FGSD needs non-empty graphs")
    if max_nodes is not None:
        largest = max((graph.node_count for graph in dataset.graphs), default=0)
        if largest > max_nodes:
            raise ParameterError(
                f"{dataset.name} has a graph with {largest} nodes > max_nodes={max_nodes}"
            )

    edges = np.linspace(0.0, range_max, bins + 1)
    vectors = np.zeros((len(dataset), bins), dtype=np.float64)
    for index, graph in enumerate(dataset.graphs):
        values = np.clip(harmonic_spectral_distances(graph, laplacian_kind).reshape(-1),
                         0.0, range_max)
        counts, _ = np.histogram(values, bins=edges)
        vectors[index] = counts

    logger.info("FGSD embedding of %s: N=%d, bins=%d, range=[0,%g], %s Laplacian",
                dataset.name, len(dataset), bins, range_max, laplacian_kind)
    return Embedding(
        vectors=vectors,
        bin_width=range_max / bins,
        range_max=range_max,
        params={"bins": bins, "range_max": range_max, "f": "harmonic",
                "laplacian": laplacian_kind, "histogram": "raw counts"},
    )


def embedding_distance(embedding: Embedding) -> np.ndarray:
    """Pairwise Euclidean distances between embedding rows"""
    if len(embedding.vectors) < 2:
        return np.zeros((len(embedding.vectors),) * 2)
    return squareform(pdist(embedding.vectors, metric="euclidean"))


def embedding_similarity(distances: np.ndarray) -> np.ndarray:
    """Similarity 1 - d / max(d); all-ones when every distance is zero"""
    largest = float(np.max(distances)) if distances.size else 0.0
    if largest == 0.0:
        return np.ones_like(distances, dtype=np.float64)
    return 1.0 - distances / largest
