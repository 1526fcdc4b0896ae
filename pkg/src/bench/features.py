"""
Feature Spaces
Kernel matrices or embeddings for a dataset, plus the detector dispatch on top of them
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from core.errors import ParameterError
from core.graph import GraphDataset
from core.provenance import dataset_fingerprint
from detectors.isolation_forest import isolation_forest
from detectors.lof import lof
from detectors.ocsvm import ocsvm
from detectors.score_vector import ScoreVector
from kernels.fgsd_embedding import Embedding, embedding_distance, embedding_similarity, fgsd_embed
from kernels.kernel_cache import KernelCache
from kernels.kernel_matrix import KernelMatrix, kernel_distance
from kernels.propagation_kernel import pk_kernel
from kernels.wl_kernel import wl_kernel
from bench.method_spec import DetectorKind, FeatureKind, MethodSpec

logger = logging.getLogger(__name__)


def rbf_kernel(vectors: np.ndarray, gamma: Optional[float] = None) -> np.ndarray:
    """exp(-gamma ||x - y||^2); gamma defaults to 1 / (B * var(X))"""
    vectors = np.asarray(vectors, dtype=np.float64)
    if gamma is None:
        spread = vectors.shape[1] * vectors.var()
        gamma = 1.0 / spread if spread > 0 else 1.0
    squared = squareform(pdist(vectors, metric="sqeuclidean")) if len(vectors) > 1 \
        else np.zeros((len(vectors), len(vectors)))
    return np.exp(-gamma * squared)


@dataclass
class FeatureSpace:
    """Either a kernel matrix (wl, pk) or an embedding (fgsd) over one dataset"""
    feature: FeatureKind
    kernel: Optional[KernelMatrix] = None
    embedding: Optional[Embedding] = None

    @property
    def size(self) -> int:
        if self.kernel is not None:
            return self.kernel.size
        return len(self.embedding.vectors)

    @property
    def iterations(self) -> Optional[int]:
        return self.kernel.iterations if self.kernel is not None else None

    def truncate(self, L: int) -> "FeatureSpace":
        """Kernel over iterations 0..L; embeddings have no iterations and are returned as is"""
        if self.kernel is None:
            return self
        return FeatureSpace(self.feature, kernel=self.kernel.upto(L))

    def restrict(self, indices: Sequence[int]) -> "FeatureSpace":
        if self.kernel is not None:
            return FeatureSpace(self.feature, kernel=self.kernel.restricted(indices))
        return FeatureSpace(self.feature, embedding=self.embedding.restricted(indices))

    def distances(self) -> np.ndarray:
        if self.kernel is not None:
            return kernel_distance(self.kernel)
        return embedding_distance(self.embedding)

    def similarity(self, iteration: Optional[int] = None, cumulative: bool = True) -> np.ndarray:
        """
        Pairwise similarity in [0, 1]

        Kernels: normalized cumulative up to `iteration` (default: all) or, with
        cumulative=False, the normalized slice of that iteration. Embeddings:
        1 - distance / max distance.
        """
        if self.kernel is None:
            return embedding_similarity(self.distances())
        if iteration is None:
            iteration = self.kernel.iterations
        if cumulative:
            return self.kernel.cumulative_normalized_upto(iteration)
        return self.kernel.normalized_per_iteration[iteration]

    def score(self, spec: MethodSpec, truth: Optional[np.ndarray] = None,
              seed: int = 0, n_jobs: int = 1) -> ScoreVector:
        """Run the method's detector on this feature space"""
        if spec.detector == DetectorKind.LOF:
            result = lof(self.distances(), k=spec.k, truth=truth)
        elif spec.detector == DetectorKind.OCSVM:
            if self.kernel is not None:
                gram = self.kernel.normalized_cumulative
            else:
                gram = rbf_kernel(self.embedding.vectors)
            result = ocsvm(gram, nu=spec.nu, truth=truth)
        else:
            if self.embedding is None:
                raise ParameterError("Isolation Forest needs an embedding, not a kernel matrix")
            result = isolation_forest(self.embedding.vectors, trees=spec.trees,
                                      subsample=spec.subsample, seed=seed,
                                      truth=truth, n_jobs=n_jobs)
        result.method = spec.name
        result.config = dict(result.config, **spec.feature_params())
        return result


def _compute(dataset: GraphDataset, spec: MethodSpec) -> FeatureSpace:
    if spec.feature == FeatureKind.WL:
        return FeatureSpace(spec.feature, kernel=wl_kernel(dataset, spec.L))
    if spec.feature == FeatureKind.PK:
        return FeatureSpace(spec.feature, kernel=pk_kernel(dataset, spec.L, w=spec.w, seed=spec.pk_seed))
    embedding = fgsd_embed(dataset, bins=spec.bins, range_max=spec.range_max,
                           laplacian_kind=spec.laplacian)
    return FeatureSpace(spec.feature, embedding=embedding)


def compute_features(dataset: GraphDataset, spec: MethodSpec,
                     cache: Optional[KernelCache] = None) -> FeatureSpace:
    """
    Feature space of `dataset` under `spec`, read from or written to `cache`

    Cache keys combine the dataset name, a fingerprint of its graphs and the
    feature parameters, so a down-sampled variant never hits the full-data entry.
    """
    if cache is None:
        return _compute(dataset, spec)

    key = dict(spec.feature_params(), dataset=dataset.name,
               fingerprint=dataset_fingerprint(dataset), size=len(dataset))
    arrays = cache.load(key)
    if arrays is not None:
        if spec.feature.is_kernel:
            kernel = KernelMatrix(per_iteration=list(arrays), kernel=spec.feature.value,
                                  params=dict(spec.feature_params(), cached=True))
            return FeatureSpace(spec.feature, kernel=kernel)
        embedding = Embedding(vectors=arrays[0], bin_width=spec.range_max / spec.bins,
                              range_max=spec.range_max, params=spec.feature_params())
        return FeatureSpace(spec.feature, embedding=embedding)

    space = _compute(dataset, spec)
    if space.kernel is not None:
        cache.store(key, space.kernel.per_iteration)
    else:
        cache.store(key, [space.embedding.vectors])
    return space
