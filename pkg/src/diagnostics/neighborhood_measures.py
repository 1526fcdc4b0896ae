"""
Neighborhood Measures
NN-Radius (local density proxy) and NN-Disagreement% (class-mixing proxy)
"""

from typing import Dict

import numpy as np
import pandas as pd

from core.errors import InputError, ParameterError

HISTOGRAM_BINS = 20


def _distances(similarity: np.ndarray) -> np.ndarray:
    similarity = np.asarray(similarity, dtype=np.float64)
    if similarity.ndim != 2 or similarity.shape[0] != similarity.shape[1]:
        raise InputError(f"similarity matrix must be square, got shape {similarity.shape}")
    distances = 1.0 - similarity
    np.fill_diagonal(distances, np.inf)
    return distances


def _check_k(n: int, k: int):
    if k < 1 or n <= k:
        raise ParameterError(f"need 1 <= k < N, got k={k}, N={n}")


def nn_radius(similarity: np.ndarray, k: int = 20) -> np.ndarray:
    """radius(i) = k-th smallest 1 - similarity(i, j) over j != i"""
    distances = _distances(similarity)
    _check_k(len(distances), k)
    return np.partition(distances, k - 1, axis=1)[:, k - 1]


def nn_disagreement(similarity: np.ndarray, labels, k: int = 20) -> np.ndarray:
    """
    Percentage of graphs within NN-Radius of i whose label differs from i's

    Graphs exactly at the radius count as inside.
    """
    distances = _distances(similarity)
    labels = np.asarray(labels).reshape(-1)
    if len(labels) != len(distances):
        raise InputError(f"{len(labels)} labels for {len(distances)} graphs")
    _check_k(len(distances), k)
    radius = np.partition(distances, k - 1, axis=1)[:, k - 1]
    inside = distances <= radius[:, None]
    differs = labels[None, :] != labels[:, None]
    return 100.0 * (inside & differs).sum(axis=1) / inside.sum(axis=1)


def group_histograms(values: np.ndarray, groups, measure: str,
                     value_range=(0.0, 1.0), bins: int = HISTOGRAM_BINS) -> pd.DataFrame:
    """
    Per-group histogram with equal-width bins (group, measure, bin_left, bin_right, count)

    Values are clipped into the range so every graph is counted once.
    """
    values = np.asarray(values, dtype=np.float64)
    groups = np.asarray(groups).reshape(-1)
    edges = np.linspace(value_range[0], value_range[1], bins + 1)
    clipped = np.clip(values, value_range[0], value_range[1])
    rows = []
    for group in np.unique(groups):
        counts, _ = np.histogram(clipped[groups == group], bins=edges)
        for left, right, count in zip(edges[:-1], edges[1:], counts):
            rows.append({"group": group.item() if hasattr(group, "item") else group,
                         "measure": measure, "bin_left": left, "bin_right": right,
                         "count": int(count)})
    return pd.DataFrame(rows)


def measure_histograms(radius: np.ndarray, disagreement: np.ndarray, groups) -> pd.DataFrame:
    """Radius over [0,1] and disagreement (as a fraction) over [0,1], 20 bins each"""
    return pd.concat([
        group_histograms(radius, groups, "nn_radius"),
        group_histograms(np.asarray(disagreement) / 100.0, groups, "nn_disagreement"),
    ], ignore_index=True)


def summarize_by_group(values: np.ndarray, groups) -> Dict:
    groups = np.asarray(groups).reshape(-1)
    return {g.item(): float(np.mean(values[groups == g])) for g in np.unique(groups)}
