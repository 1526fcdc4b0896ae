"""
Benchmark Runner
Down-sampled variants scored over seeds, rate sweeps and iteration sweeps
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from core.errors import ParameterError, UsageError
from core.graph import GraphDataset
from kernels.kernel_cache import KernelCache
from bench.downsampling import ROUNDING_RULE, BenchmarkVariant, downsample, require_binary
from bench.features import FeatureSpace, compute_features
from bench.method_spec import MethodSpec
from bench.metrics import roc_auc, roc_auc_from_arrays

logger = logging.getLogger(__name__)

DEFAULT_SEEDS = tuple(range(10))
DEFAULT_RATES = (0.05, 0.1, 0.2, 0.4, 0.6, 0.85)
DEFAULT_ITERATIONS = tuple(range(1, 12))
FEATURE_MODES = ("recompute", "slice")
NORMALIZATION = "normalized cumulative kernel (cosine of the summed slices)"


@dataclass
class BenchmarkResult:
    """AUCs of one (dataset, method, dc, rate) cell over its seeds"""
    dataset: str
    method: MethodSpec
    dc: int
    rate: float
    seeds: List[int]
    aucs: List[float]
    mode: str = "recompute"
    outliers: List[int] = field(default_factory=list)
    inliers: List[int] = field(default_factory=list)

    @property
    def mean_auc(self) -> float:
        return float(np.mean(self.aucs))

    @property
    def std(self) -> float:
        return float(np.std(self.aucs))

    @property
    def config(self) -> Dict:
        config = self.method.to_dict()
        config.update(dataset=self.dataset, rate=self.rate, mode=self.mode,
                      rounding=ROUNDING_RULE, normalization=NORMALIZATION)
        return config

    def results_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "dataset": self.dataset,
            "method": self.method.name,
            "dc": self.dc,
            "rate": self.rate,
            "L": self.method.L,
            "seed": self.seeds,
            "auc": self.aucs,
            "mode": self.mode,
        })

    def summary_row(self) -> Dict:
        return {
            "dataset": self.dataset,
            "method": self.method.name,
            "dc": self.dc,
            "mean_auc": self.mean_auc,
            "std": self.std,
            "rate": self.rate,
            "L": self.method.L,
            "seeds": len(self.seeds),
            "mode": self.mode,
        }


def _check_mode(mode: str):
    if mode not in FEATURE_MODES:
        raise ParameterError(f"feature mode must be one of {FEATURE_MODES}, got {mode!r}")


def _variant_aucs(dataset: GraphDataset, spec: MethodSpec, variant: BenchmarkVariant,
                  iterations: Sequence[int], full: Optional[FeatureSpace],
                  cache: Optional[KernelCache]) -> Tuple[Dict[int, float], Tuple[int, int]]:
    """
    AUC of one variant at each iteration count, features computed once at the largest

    Also returns the (hits, misses) this call added to the cache counters, which
    are lost with the cache copy when the call runs in a worker process.
    """
    before = (cache.hits, cache.misses) if cache is not None else (0, 0)
    top = spec.with_iterations(max(iterations))
    if full is not None:
        features = full.restrict(variant.member_indices)
    else:
        features = compute_features(variant.dataset(dataset), top, cache)

    aucs = {}
    for L in iterations:
        scores = features.truncate(L).score(top.with_iterations(L), truth=variant.truth,
                                            seed=variant.seed)
        aucs[L] = roc_auc(scores)
    logger.debug("%s %s dc=%d seed=%d: %s", dataset.name, spec.name, variant.downsampled_class,
                 variant.seed, {L: round(a, 4) for L, a in aucs.items()})
    counts = (cache.hits - before[0], cache.misses - before[1]) if cache is not None else (0, 0)
    return aucs, counts


def _evaluate(dataset: GraphDataset, spec: MethodSpec, dc: int, rate: float,
              seeds: Sequence[int], iterations: Sequence[int], mode: str,
              cache: Optional[KernelCache], full: Optional[FeatureSpace],
              n_jobs: int):
    _check_mode(mode)
    if mode == "slice" and full is None:
        full = compute_features(dataset, spec.with_iterations(max(iterations)), cache)
    variants = [downsample(dataset, dc, rate, seed) for seed in seeds]
    start = (cache.hits, cache.misses) if cache is not None else (0, 0)
    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(_variant_aucs)(dataset, spec, variant, iterations,
                               full if mode == "slice" else None, cache)
        for variant in variants
    )
    per_seed = [aucs for aucs, _ in outcomes]
    if cache is not None:
        cache.hits = start[0] + sum(counts[0] for _, counts in outcomes)
        cache.misses = start[1] + sum(counts[1] for _, counts in outcomes)
    return variants, per_seed


def run_benchmark(dataset: GraphDataset, spec: MethodSpec, dc: int, rate: float = 0.1,
                  seeds: Iterable[int] = DEFAULT_SEEDS, mode: str = "recompute",
                  cache: Optional[KernelCache] = None,
                  full_features: Optional[FeatureSpace] = None,
                  n_jobs: int = 1) -> BenchmarkResult:
    """
    Mean and std of ROC-AUC over down-sampled variants

    Args:
        dataset: Binary dataset
        spec: Feature space + detector
        dc: Down-sampled (outlier) class
        rate: Fraction of class dc retained
        seeds: One variant per seed
        mode: 'recompute' builds features on each variant; 'slice' restricts
            full-data features to the variant members
        cache: Optional kernel cache
        full_features: Precomputed full-data features for slice mode
        n_jobs: joblib workers over seeds

    Returns:
        BenchmarkResult
    """
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ParameterError("at least one seed is required")
    require_binary(dataset)
    variants, per_seed = _evaluate(dataset, spec, dc, rate, seeds, [spec.L], mode,
                                   cache, full_features, n_jobs)
    result = BenchmarkResult(
        dataset=dataset.name, method=spec, dc=int(dc), rate=float(rate), seeds=seeds,
        aucs=[aucs[spec.L] for aucs in per_seed], mode=mode,
        outliers=[v.outlier_count for v in variants],
        inliers=[v.inlier_count for v in variants],
    )
    logger.info("%s %s dc=%d rate=%g: AUC %.3f (%.3f) over %d seeds",
                dataset.name, spec.name, dc, rate, result.mean_auc, result.std, len(seeds))
    return result


def sweep_rate(dataset: GraphDataset, spec: MethodSpec,
               rates: Sequence[float] = DEFAULT_RATES, dcs: Sequence[int] = (0, 1),
               seeds: Iterable[int] = DEFAULT_SEEDS, mode: str = "recompute",
               cache: Optional[KernelCache] = None, n_jobs: int = 1) -> pd.DataFrame:
    """Long-format AUC-vs-rate table: dataset, method, dc, rate, L, mean_auc, std"""
    require_binary(dataset)
    seeds = list(seeds)
    full = compute_features(dataset, spec, cache) if mode == "slice" else None
    rows = []
    for dc in dcs:
        for rate in rates:
            result = run_benchmark(dataset, spec, dc, rate, seeds, mode, cache, full, n_jobs)
            row = result.summary_row()
            rows.append({key: row[key] for key in
                         ("dataset", "method", "dc", "rate", "L", "mean_auc", "std")})
    return pd.DataFrame(rows)


def sweep_iterations(dataset: GraphDataset, spec: MethodSpec,
                     iterations: Sequence[int] = DEFAULT_ITERATIONS, rate: float = 0.1,
                     seeds: Iterable[int] = DEFAULT_SEEDS, mode: str = "recompute",
                     cache: Optional[KernelCache] = None, n_jobs: int = 1) -> pd.DataFrame:
    """
    Gap-vs-L table: dataset, method, L, auc0, std0, auc1, std1, gap

    Kernels are computed once per variant at the largest L and truncated;
    relabeling tables and hash parameters of iteration l do not depend on L.
    """
    if not spec.feature.is_kernel:
        raise UsageError(f"iteration sweep needs a kernel feature space, got {spec.feature.value}")
    iterations = sorted(set(int(L) for L in iterations))
    if not iterations or iterations[0] < 0:
        raise ParameterError(f"iterations must be non-empty and >= 0, got {iterations}")
    require_binary(dataset)
    seeds = list(seeds)

    per_class = {}
    for dc in (0, 1):
        _, per_seed = _evaluate(dataset, spec, dc, rate, seeds, iterations, mode, cache, None, n_jobs)
        per_class[dc] = per_seed

    rows = []
    for L in iterations:
        auc0 = np.array([aucs[L] for aucs in per_class[0]])
        auc1 = np.array([aucs[L] for aucs in per_class[1]])
        rows.append({
            "dataset": dataset.name,
            "method": spec.name,
            "L": L,
            "auc0": float(auc0.mean()),
            "std0": float(auc0.std()),
            "auc1": float(auc1.mean()),
            "std1": float(auc1.std()),
            "gap": abs(float(auc0.mean()) - float(auc1.mean())),
        })
    logger.info("%s %s: iteration sweep over L=%s done", dataset.name, spec.name, iterations)
    return pd.DataFrame(rows)


def full_data_auc(dataset: GraphDataset, spec: MethodSpec,
                  cache: Optional[KernelCache] = None, seed: int = 0) -> Dict[int, float]:
    """
    Two-class AUC on the whole dataset with each class in turn taken as positive

    The two values sum to 1.
    """
    require_binary(dataset)
    features = compute_features(dataset, spec, cache)
    scores = features.score(spec, seed=seed)
    return {int(c): roc_auc_from_arrays(scores.scores, dataset.class_labels == c)
            for c in dataset.classes}
