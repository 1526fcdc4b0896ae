"""
Classical MDS
Torgerson scaling of a distance matrix into two dimensions
"""

import logging
from typing import Tuple

import numpy as np
from scipy.linalg import eigh

from core.errors import InputError

logger = logging.getLogger(__name__)

SIGN_TOLERANCE = 1e-12
SIGN_CONVENTION = ("axis sign: positive third moment, "
                   "else first nonzero coordinate positive")


def double_centered(distances: np.ndarray) -> np.ndarray:
    """B = -1/2 J D^2 J with J = I - 11'/N"""
    squared = np.asarray(distances, dtype=np.float64) ** 2
    row_mean = squared.mean(axis=1, keepdims=True)
    col_mean = squared.mean(axis=0, keepdims=True)
    b = -0.5 * (squared - row_mean - col_mean + squared.mean())
    return 0.5 * (b + b.T)


def torgerson_eigenpairs(distances: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors of the double-centered matrix"""
    distances = np.asarray(distances, dtype=np.float64)
    if distances.ndim != 2 or distances.shape[0] != distances.shape[1]:
        raise InputError(f"distance matrix must be square, got shape {distances.shape}")
    if not np.allclose(distances, distances.T, atol=1e-9, rtol=0.0):
        raise InputError("distance matrix is not symmetric")
    values, vectors = eigh(double_centered(distances))
    order = np.argsort(values)[::-1]
    return values[order], vectors[:, order]


def _orient(vector: np.ndarray) -> np.ndarray:
    """Sign fixed by the third moment, else by the first nonzero coordinate"""
    skew = float(np.sum(vector ** 3))
    if abs(skew) > SIGN_TOLERANCE:
        return vector if skew > 0 else -vector
    nonzero = np.flatnonzero(np.abs(vector) > SIGN_TOLERANCE)
    if len(nonzero) and vector[nonzero[0]] < 0:
        return -vector
    return vector


def classical_mds(distances: np.ndarray, dims: int = 2) -> np.ndarray:
    """
    N x dims coordinates = top eigenvectors scaled by sqrt(max(lambda, 0))

    Negative eigenvalues among the kept ones are clamped to zero and logged.
    """
    n = len(distances)
    if n == 0:
        return np.zeros((0, dims))
    values, vectors = torgerson_eigenpairs(distances)
    top = values[:dims]
    if np.any(top < 0):
        logger.warning("MDS: clamping %d negative eigenvalue(s) %s to 0",
                       int(np.sum(top < 0)), np.round(top[top < 0], 9).tolist())
    negative_mass = float(-values[values < 0].sum())
    if negative_mass > 0:
        logger.debug("MDS: negative eigenvalue mass %.6g vs positive %.6g",
                     negative_mass, float(values[values > 0].sum()))

    coordinates = np.zeros((n, dims))
    for axis in range(min(dims, n)):
        coordinates[:, axis] = _orient(vectors[:, axis]) * np.sqrt(max(values[axis], 0.0))
    return coordinates
