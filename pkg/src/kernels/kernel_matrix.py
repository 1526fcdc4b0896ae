"""
Kernel Matrices
Per-iteration Gram matrices, their cumulative sum and cosine normalizations
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from core.errors import InputError
from core.io_utils import atomic_write_text


def normalize_gram(gram: np.ndarray) -> np.ndarray:
    """
    Cosine-normalize a Gram matrix: K(i,j) / sqrt(K(i,i) K(j,j))

    Rows/columns with a zero diagonal stay zero.
    """
    gram = np.asarray(gram, dtype=np.float64)
    diag = np.clip(np.diag(gram), 0.0, None)
    # sqrt of the product keeps K(i,j) == K(i,i) == K(j,j) at exactly 1.0
    denom = np.sqrt(np.outer(diag, diag))
    normalized = np.zeros_like(gram)
    np.divide(gram, denom, out=normalized, where=denom > 0)
    normalized[np.diag_indices_from(normalized)] = np.where(diag > 0, 1.0, 0.0)
    return normalized


@dataclass
class KernelMatrix:
    """
    Kernel over a dataset

    per_iteration[l] holds the unnormalized dot products of iteration l
    (l = 0..L); cumulative is their sum.
    """
    per_iteration: List[np.ndarray]
    kernel: str
    params: Dict[str, Any] = field(default_factory=dict)
    cumulative: np.ndarray = field(init=False)
    normalized_cumulative: np.ndarray = field(init=False)
    normalized_per_iteration: List[np.ndarray] = field(init=False)

    def __post_init__(self):
        if not self.per_iteration:
            raise InputError("a kernel matrix needs at least one iteration slice")
        shape = self.per_iteration[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise InputError(f"kernel slices must be square, got {shape}")
        for gram in self.per_iteration:
            if gram.shape != shape:
                raise InputError("all iteration slices must share one shape")
        self.per_iteration = [np.asarray(g, dtype=np.float64) for g in self.per_iteration]
        self.cumulative = np.sum(self.per_iteration, axis=0)
        self.normalized_cumulative = normalize_gram(self.cumulative)
        self.normalized_per_iteration = [normalize_gram(g) for g in self.per_iteration]

    @property
    def size(self) -> int:
        return self.per_iteration[0].shape[0]

    @property
    def iterations(self) -> int:
        """L, the highest iteration index held"""
        return len(self.per_iteration) - 1

    def upto(self, iterations: int) -> "KernelMatrix":
        """Kernel restricted to iterations 0..iterations"""
        if iterations < 0 or iterations > self.iterations:
            raise InputError(f"iterations must be in 0..{self.iterations}, got {iterations}")
        params = dict(self.params, L=iterations)
        return KernelMatrix(self.per_iteration[:iterations + 1], self.kernel, params)

    def restricted(self, indices: Sequence[int]) -> "KernelMatrix":
        """Kernel over the graphs at `indices` (slice-mode)"""
        idx = np.asarray(indices, dtype=np.int64)
        grid = np.ix_(idx, idx)
        params = dict(self.params, sliced=True)
        return KernelMatrix([g[grid] for g in self.per_iteration], self.kernel, params)

    def cumulative_normalized_upto(self, iterations: int) -> np.ndarray:
        return normalize_gram(np.sum(self.per_iteration[:iterations + 1], axis=0))

    def to_csv(self, path: Union[str, Path], which: str = "normalized_cumulative",
               iteration: Optional[int] = None) -> Path:
        """Full matrix, row-major, 9 significant digits"""
        if which == "normalized_cumulative":
            matrix = self.normalized_cumulative
        elif which == "cumulative":
            matrix = self.cumulative
        elif which == "per_iteration":
            matrix = self.per_iteration[iteration]
        elif which == "normalized_per_iteration":
            matrix = self.normalized_per_iteration[iteration]
        else:
            raise InputError(f"unknown matrix selector {which!r}")
        return write_matrix_csv(matrix, path)


def write_matrix_csv(matrix: np.ndarray, path: Union[str, Path]) -> Path:
    frame = pd.DataFrame(matrix)
    text = frame.to_csv(index=False, header=False, float_format="%.9g", lineterminator="\n")
    return atomic_write_text(path, text)


def kernel_distance(matrix: KernelMatrix) -> np.ndarray:
    """Distance 1 - normalized cumulative similarity; symmetric, zero diagonal, in [0,1]"""
    return similarity_to_distance(matrix.normalized_cumulative)


def similarity_to_distance(similarity: np.ndarray) -> np.ndarray:
    distance = 1.0 - np.asarray(similarity, dtype=np.float64)
    distance = 0.5 * (distance + distance.T)
    np.clip(distance, 0.0, 1.0, out=distance)
    np.fill_diagonal(distance, 0.0)
    return distance
