"""
Down-sampled Benchmark Variants
Keep one class intact as inliers, retain a fraction of the other as outliers
"""

import math
from dataclasses import dataclass

import numpy as np

from core.errors import ParameterError
from core.graph import GraphDataset

ROUNDING_RULE = "max(1, floor(rate * N_dc + 0.5))"


@dataclass(frozen=True)
class BenchmarkVariant:
    """One down-sampling of a binary dataset"""
    source: str
    downsampled_class: int
    rate: float
    seed: int
    member_indices: np.ndarray
    truth: np.ndarray

    @property
    def outlier_count(self) -> int:
        return int(self.truth.sum())

    @property
    def inlier_count(self) -> int:
        return int(len(self.truth) - self.truth.sum())

    def dataset(self, source: GraphDataset) -> GraphDataset:
        """The variant's graphs, in source order"""
        return source.subset(
            self.member_indices,
            name=f"{self.source}[dc={self.downsampled_class},rate={self.rate:g},seed={self.seed}]",
        )


def outlier_count(rate: float, class_size: int) -> int:
    return max(1, int(math.floor(rate * class_size + 0.5)))


def require_binary(dataset: GraphDataset):
    if not dataset.is_binary:
        raise ParameterError(
            f"{dataset.name} has classes {dataset.classes.tolist()}, benchmarks need exactly two; "
            "pick a pair with select_class_pair or a class-pair registry name such as ENZYMES-c0c1"
        )


def downsample(dataset: GraphDataset, dc: int, rate: float, seed: int) -> BenchmarkVariant:
    """
    Build a variant with class `dc` down-sampled to outliers

    Args:
        dataset: Binary dataset
        dc: Class whose graphs become outliers
        rate: Fraction of class dc retained, 0 < rate <= 1
        seed: Sampling seed

    Returns:
        BenchmarkVariant with members in source order
    """
    if not 0 < rate <= 1:
        raise ParameterError(f"rate must be in (0, 1], got {rate}")
    require_binary(dataset)
    labels = dataset.class_labels
    if dc not in set(labels.tolist()):
        raise ParameterError(f"class {dc} not present in {dataset.name}")
    candidates = np.flatnonzero(labels == dc)
    inliers = np.flatnonzero(labels != dc)
    if len(inliers) == 0:
        raise ParameterError(f"{dataset.name} has no graphs outside class {dc}")

    count = min(outlier_count(rate, len(candidates)), len(candidates))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(candidates, size=count, replace=False)

    members = np.sort(np.concatenate([inliers, chosen]))
    members.setflags(write=False)
    truth = labels[members] == dc
    truth.setflags(write=False)
    return BenchmarkVariant(
        source=dataset.name,
        downsampled_class=int(dc),
        rate=float(rate),
        seed=int(seed),
        member_indices=members,
        truth=truth,
    )
