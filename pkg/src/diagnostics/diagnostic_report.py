"""
Diagnostic Reports
Per-iteration similarity, MDS, NN-Radius and NN-Disagreement% panels plus CSV bundles
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from core.errors import ParameterError
from core.graph import GraphDataset
from core.io_utils import write_frame, write_json
from core.provenance import build_manifest, dataset_fingerprint
from kernels.kernel_cache import KernelCache
from kernels.kernel_matrix import similarity_to_distance, write_matrix_csv
from bench.downsampling import downsample
from bench.features import compute_features
from bench.method_spec import MethodSpec
from diagnostics.mds import SIGN_CONVENTION, classical_mds
from diagnostics.neighborhood_measures import measure_histograms, nn_disagreement, nn_radius

logger = logging.getLogger(__name__)

GROUPINGS = ("class", "variant")


@dataclass
class DiagnosticSlice:
    """All four panels at one iteration"""
    iteration: int
    similarity: np.ndarray
    coordinates: np.ndarray
    radius: np.ndarray
    disagreement: np.ndarray
    histograms: pd.DataFrame


@dataclass
class DiagnosticReport:
    dataset: str
    method: str
    k: int
    grouping: str
    groups: np.ndarray
    slices: List[DiagnosticSlice] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def iterations(self) -> List[int]:
        return [s.iteration for s in self.slices]

    def slice(self, iteration: int) -> DiagnosticSlice:
        for item in self.slices:
            if item.iteration == iteration:
                return item
        raise KeyError(iteration)

    def group_means(self, measure: str) -> pd.DataFrame:
        """Mean radius or disagreement per (iteration, group)"""
        rows = []
        for item in self.slices:
            values = item.radius if measure == "nn_radius" else item.disagreement
            for group in np.unique(self.groups):
                rows.append({"iteration": item.iteration, "group": group,
                             "mean": float(values[self.groups == group].mean())})
        return pd.DataFrame(rows)


def full_diagnostic(dataset: GraphDataset, spec: MethodSpec, iterations: Sequence[int],
                    grouping: str = "class", k: int = 20, dc: int = 0, rate: float = 0.1,
                    seed: int = 0, cumulative: bool = True,
                    cache: Optional[KernelCache] = None) -> DiagnosticReport:
    """
    Measurement panels per iteration on full data or on one down-sampled variant

    Args:
        dataset: Binary dataset
        spec: Feature space (the detector part is not used)
        iterations: Iterations to report; ignored for embeddings (one slice, 0)
        grouping: 'class' (full data, class labels) or 'variant' (inlier/outlier
            flags of downsample(dataset, dc, rate, seed))
        k: Neighbor count for both measures
        cumulative: Normalized cumulative similarity up to each iteration, or
            the normalized per-iteration slice
        cache: Optional kernel cache

    Returns:
        DiagnosticReport
    """
    if grouping not in GROUPINGS:
        raise ParameterError(f"grouping must be one of {GROUPINGS}, got {grouping!r}")
    iterations = sorted(set(int(i) for i in iterations)) if spec.feature.is_kernel else [0]
    if not iterations or iterations[0] < 0:
        raise ParameterError(f"iterations must be non-empty and >= 0, got {iterations}")

    config = dict(spec.to_dict(), grouping=grouping, k=k, iterations=iterations,
                  similarity="normalized cumulative" if cumulative else "normalized per-iteration",
                  mds=f"classical (Torgerson); {SIGN_CONVENTION}")
    if grouping == "variant":
        variant = downsample(dataset, dc, rate, seed)
        subject = variant.dataset(dataset)
        groups = np.where(variant.truth, "outlier", "inlier")
        config.update(dc=dc, rate=rate, seed=seed)
    else:
        subject = dataset
        groups = dataset.class_labels.copy()

    if len(subject) <= k:
        raise ParameterError(f"k={k} needs more than {k} graphs, {subject.name} has {len(subject)}")

    features = compute_features(subject, spec.with_iterations(max(iterations)), cache)
    report = DiagnosticReport(dataset=dataset.name, method=spec.feature.value, k=k,
                              grouping=grouping, groups=groups, config=config)
    report.config["fingerprint"] = dataset_fingerprint(dataset)

    for iteration in iterations:
        similarity = features.similarity(iteration if spec.feature.is_kernel else None,
                                         cumulative=cumulative)
        radius = nn_radius(similarity, k)
        disagreement = nn_disagreement(similarity, groups, k)
        coordinates = classical_mds(similarity_to_distance(similarity))
        report.slices.append(DiagnosticSlice(
            iteration=iteration,
            similarity=similarity,
            coordinates=coordinates,
            radius=radius,
            disagreement=disagreement,
            histograms=measure_histograms(radius, disagreement, groups),
        ))
        logger.debug("Diagnostics %s L=%d: mean radius %.4f, mean disagreement %.2f%%",
                     subject.name, iteration, radius.mean(), disagreement.mean())

    logger.info("Diagnostics for %s (%s, %s grouping): %d slices",
                dataset.name, spec.feature.value, grouping, len(report.slices))
    return report


def write_bundle(report: DiagnosticReport, directory: Union[str, Path]) -> List[Path]:
    """
    similarity_L{l}.csv, mds_L{l}.csv, radius_L{l}.csv, disagreement_L{l}.csv,
    histograms_L{l}.csv per slice, then manifest.json
    """
    directory = Path(directory)
    written = []
    index = np.arange(len(report.groups))
    for item in report.slices:
        tag = f"L{item.iteration}"
        written.append(write_matrix_csv(item.similarity, directory / f"similarity_{tag}.csv"))
        written.append(write_frame(pd.DataFrame({
            "index": index, "x": item.coordinates[:, 0], "y": item.coordinates[:, 1],
            "group": report.groups,
        }), directory / f"mds_{tag}.csv"))
        written.append(write_frame(pd.DataFrame({
            "index": index, "group": report.groups, "radius": item.radius,
        }), directory / f"radius_{tag}.csv"))
        written.append(write_frame(pd.DataFrame({
            "index": index, "group": report.groups, "disagreement": item.disagreement,
        }), directory / f"disagreement_{tag}.csv"))
        written.append(write_frame(item.histograms, directory / f"histograms_{tag}.csv"))

    manifest = build_manifest("diag", report.config, [p.name for p in written],
                              inputs={report.dataset: report.config.get("fingerprint", "")})
    written.append(write_json(manifest, directory / "manifest.json"))
    return written
