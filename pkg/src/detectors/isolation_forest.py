"""
Isolation Forest
Random-axis, random-threshold isolation trees over embedding vectors
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from core.errors import InputError, ParameterError
from detectors.score_vector import ScoreVector

logger = logging.getLogger(__name__)


def harmonic_number(m: int) -> float:
    """H(m) = 1 + 1/2 + ... + 1/m, summed exactly term by term"""
    if m <= 0:
        return 0.0
    return float(np.sum(1.0 / np.arange(1, m + 1, dtype=np.float64)))


def average_path_length(m: int) -> float:
    """c(m) = 2 H(m-1) - 2 (m-1) / m; the mean unsuccessful-search depth in a BST of m keys"""
    if m <= 1:
        return 0.0
    return 2.0 * harmonic_number(m - 1) - 2.0 * (m - 1) / m


@dataclass
class IsolationTree:
    """Array-encoded tree; leaves have feature -1"""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    size: np.ndarray
    depth: np.ndarray

    def path_lengths(self, data: np.ndarray) -> np.ndarray:
        node = np.zeros(len(data), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            current = node[rows]
            goes_left = data[rows, self.feature[current]] < self.threshold[current]
            node[rows] = np.where(goes_left, self.left[current], self.right[current])
            active[rows] = self.feature[node[rows]] >= 0
        leaf_correction = np.array([average_path_length(int(s)) for s in self.size])
        return self.depth[node] + leaf_correction[node]


def build_tree(sample: np.ndarray, height_limit: int, rng: np.random.Generator) -> IsolationTree:
    feature, threshold, left, right, size, depth = [], [], [], [], [], []

    def new_node(count: int, level: int) -> int:
        for column, value in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1),
                              (size, count), (depth, level)):
            column.append(value)
        return len(feature) - 1

    stack = [(new_node(len(sample), 0), np.arange(len(sample)))]
    while stack:
        node, rows = stack.pop()
        level = depth[node]
        if level >= height_limit or len(rows) <= 1:
            continue
        points = sample[rows]
        low, high = points.min(axis=0), points.max(axis=0)
        splittable = np.flatnonzero(high > low)
        if len(splittable) == 0:
            continue
        attribute = int(rng.choice(splittable))
        cut = rng.uniform(low[attribute], high[attribute])
        goes_left = points[:, attribute] < cut
        feature[node] = attribute
        threshold[node] = cut
        left[node] = new_node(int(goes_left.sum()), level + 1)
        right[node] = new_node(int((~goes_left).sum()), level + 1)
        stack.append((left[node], rows[goes_left]))
        stack.append((right[node], rows[~goes_left]))

    return IsolationTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        size=np.asarray(size, dtype=np.int64),
        depth=np.asarray(depth, dtype=np.float64),
    )


def _tree_path_lengths(data: np.ndarray, seed: np.random.SeedSequence,
                       sample_size: int, height_limit: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rows = rng.choice(len(data), size=sample_size, replace=False)
    tree = build_tree(data[rows], height_limit, rng)
    return tree.path_lengths(data)


def isolation_forest(embedding: np.ndarray, trees: int = 100, subsample: int = 256,
                     seed: int = 0, truth: Optional[np.ndarray] = None,
                     n_jobs: int = 1) -> ScoreVector:
    """
    Isolation Forest anomaly scores

    Every tree draws min(subsample, N) points without replacement and grows to
    depth ceil(log2 of that size). Tree seeds are spawned from `seed`, so the
    scores do not depend on n_jobs.

    Args:
        embedding: N x B feature matrix
        trees: Number of trees
        subsample: Points per tree
        seed: Forest seed
        truth: Optional outlier flags carried into the ScoreVector
        n_jobs: joblib workers

    Returns:
        ScoreVector with scores 2^(-mean path length / c(sample size)) in (0, 1]
    """
    data = np.asarray(embedding, dtype=np.float64)
    if data.ndim != 2:
        raise InputError(f"embedding must be 2-D, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise InputError("embedding contains non-finite values")
    n = data.shape[0]
    if n < 2:
        raise ParameterError(f"Isolation Forest needs N >= 2, got {n}")
    if trees < 1 or subsample < 2:
        raise ParameterError(f"need trees >= 1 and subsample >= 2, got {trees}, {subsample}")

    sample_size = min(subsample, n)
    height_limit = int(np.ceil(np.log2(sample_size)))
    children = np.random.SeedSequence(seed).spawn(trees)
    lengths = Parallel(n_jobs=n_jobs)(
        delayed(_tree_path_lengths)(data, child, sample_size, height_limit) for child in children
    )
    mean_length = np.mean(np.vstack(lengths), axis=0)
    scores = np.power(2.0, -mean_length / average_path_length(sample_size))

    logger.debug("Isolation Forest: N=%d, %d trees, sample %d, height limit %d",
                 n, trees, sample_size, height_limit)
    return ScoreVector(scores=scores, truth=truth, method="iforest",
                       config={"trees": trees, "subsample": subsample, "seed": seed})
