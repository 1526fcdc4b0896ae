"""
Local Outlier Factor
LOF computed from a full precomputed distance matrix, tied k-th neighbors included
"""

import logging
from typing import Optional

import numpy as np

from core.errors import InputError, ParameterError
from detectors.score_vector import ScoreVector

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-9


def validate_distances(distances: np.ndarray) -> np.ndarray:
    distances = np.asarray(distances, dtype=np.float64)
    if distances.ndim != 2 or distances.shape[0] != distances.shape[1]:
        raise InputError(f"distance matrix must be square, got shape {distances.shape}")
    if not np.all(np.isfinite(distances)):
        raise InputError("distance matrix contains non-finite values")
    if np.any(distances < 0):
        raise InputError("distance matrix contains negative values")
    if not np.allclose(distances, distances.T, atol=SYMMETRY_TOLERANCE, rtol=0.0):
        raise InputError("distance matrix is not symmetric")
    return distances


def k_neighborhoods(distances: np.ndarray, k: int):
    """
    k-distance of every point and its neighborhood mask

    The neighborhood of i holds every j != i with d(i,j) <= k-distance(i),
    so it can be larger than k when distances tie.
    """
    masked = distances.copy()
    np.fill_diagonal(masked, np.inf)
    k_distance = np.partition(masked, k - 1, axis=1)[:, k - 1]
    neighbors = masked <= k_distance[:, None]
    return k_distance, neighbors


def local_reachability_density(distances: np.ndarray, k_distance: np.ndarray,
                               neighbors: np.ndarray) -> np.ndarray:
    reach = np.maximum(distances, k_distance[None, :])
    mean_reach = np.where(neighbors, reach, 0.0).sum(axis=1) / neighbors.sum(axis=1)
    with np.errstate(divide="ignore"):
        return np.where(mean_reach > 0, 1.0 / mean_reach, np.inf)


def lof(distances: np.ndarray, k: int = 20, truth: Optional[np.ndarray] = None) -> ScoreVector:
    """
    Local Outlier Factor of every point

    Args:
        distances: Symmetric N x N distance matrix with zero diagonal
        k: Neighborhood size
        truth: Optional outlier flags carried into the ScoreVector

    Returns:
        ScoreVector with score = LOF (about 1 for inliers, larger for outliers)
    """
    distances = validate_distances(distances)
    n = distances.shape[0]
    if k < 1 or n <= k:
        raise ParameterError(f"LOF needs 1 <= k < N, got k={k}, N={n}")

    k_distance, neighbors = k_neighborhoods(distances, k)
    lrd = local_reachability_density(distances, k_distance, neighbors)

    neighbor_lrd = np.where(neighbors, lrd[None, :], 0.0).sum(axis=1) / neighbors.sum(axis=1)
    both_infinite = np.isinf(neighbor_lrd) & np.isinf(lrd)
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = neighbor_lrd / lrd
    scores[both_infinite] = 1.0
    duplicates = int(np.isinf(lrd).sum())
    if duplicates:
        logger.debug("LOF: %d points with infinite density (duplicates)", duplicates)
    scores = np.nan_to_num(scores, nan=1.0, posinf=np.finfo(np.float64).max)

    return ScoreVector(scores=scores, truth=truth, method="lof", config={"k": k})
