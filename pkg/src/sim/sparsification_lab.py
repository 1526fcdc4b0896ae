"""
Sparsification Lab
WL distance between a k-regular graph and its perturbed copy, per iteration, averaged over rounds
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from core.errors import ParameterError
from core.graph import Graph, GraphDataset, LabelSource, PerturbationKind, PerturbationSpec
from core.graph_generators import apply_perturbation, generate_k_regular
from kernels.wl_kernel import wl_kernel

logger = logging.getLogger(__name__)

LABEL_A = 0
LABEL_B = 1
CURVE_COLUMNS = ["case", "n", "k", "magnitude", "iteration", "mean_distance", "std", "rounds"]


@dataclass(frozen=True)
class SimConfig:
    """
    One simulation: case 1 flips m labels in each copy of an all-A graph,
    case 2 rewires r edge pairs in one copy of a randomly A/B labeled graph
    """
    n: int
    k: int
    case: int
    magnitudes: Sequence[int]
    iterations: int = 10
    rounds: int = 100
    seed: int = 0
    label_probability: float = 0.5

    def __post_init__(self):
        if self.case not in (1, 2):
            raise ParameterError(f"case must be 1 or 2, got {self.case}")
        if (self.n * self.k) % 2 != 0:
            raise ParameterError(f"n*k must be even, got n={self.n}, k={self.k}")
        if self.rounds < 1:
            raise ParameterError(f"rounds must be >= 1, got {self.rounds}")
        if self.iterations < 0:
            raise ParameterError(f"iterations must be >= 0, got {self.iterations}")
        if any(m < 0 for m in self.magnitudes):
            raise ParameterError(f"magnitudes must be >= 0, got {list(self.magnitudes)}")
        if self.case == 1 and any(m > self.n for m in self.magnitudes):
            raise ParameterError(f"cannot flip more than n={self.n} labels: {list(self.magnitudes)}")

    @property
    def kind(self) -> PerturbationKind:
        return PerturbationKind.LABEL_FLIP if self.case == 1 else PerturbationKind.EDGE_REWIRE


@dataclass
class SimCurve:
    """Mean and std of the distance at iterations 0..L for one magnitude"""
    case: int
    n: int
    k: int
    magnitude: int
    mean: np.ndarray
    std: np.ndarray
    rounds: int
    samples: Optional[np.ndarray] = field(repr=False, default=None)

    @property
    def standard_error(self) -> np.ndarray:
        return self.std / np.sqrt(self.rounds)


def wl_distance_curve(first: Graph, second: Graph, iterations: int) -> np.ndarray:
    """1 - normalized cumulative WL similarity up to each iteration 0..L"""
    pair = GraphDataset(graphs=[first, second], class_labels=[0, 0], name="pair",
                        label_alphabet_size=2, label_source=LabelSource.SYNTHETIC)
    kernel = wl_kernel(pair, iterations)
    similarity = np.array([kernel.cumulative_normalized_upto(l)[0, 1]
                           for l in range(iterations + 1)])
    return np.clip(1.0 - similarity, 0.0, 1.0)


def _seed_int(sequence: np.random.SeedSequence) -> int:
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _round(config: SimConfig, round_index: int) -> np.ndarray:
    """Distances (magnitudes x iterations) of one round; the base graph is shared by all magnitudes"""
    graph_seq, label_seq, *perturb_seqs = np.random.SeedSequence(
        [config.seed, round_index]).spawn(2 + 2 * len(config.magnitudes))
    base = generate_k_regular(config.n, config.k, _seed_int(graph_seq))
    if config.case == 2:
        rng = np.random.default_rng(label_seq)
        base = base.with_labels(np.where(rng.random(config.n) < config.label_probability,
                                         LABEL_A, LABEL_B))

    out = np.zeros((len(config.magnitudes), config.iterations + 1))
    for row, magnitude in enumerate(config.magnitudes):
        first_seq, second_seq = perturb_seqs[2 * row], perturb_seqs[2 * row + 1]
        if config.case == 1:
            first = apply_perturbation(base, PerturbationSpec(
                config.kind, magnitude, _seed_int(first_seq), LABEL_A, LABEL_B))
        else:
            first = base
        second = apply_perturbation(base, PerturbationSpec(
            config.kind, magnitude, _seed_int(second_seq), LABEL_A, LABEL_B))
        out[row] = wl_distance_curve(first, second, config.iterations)
    return out


def run_simulation(config: SimConfig, n_jobs: int = 1) -> List[SimCurve]:
    """All magnitudes of one config, rounds spread over joblib workers"""
    per_round = Parallel(n_jobs=n_jobs)(
        delayed(_round)(config, index) for index in range(config.rounds)
    )
    samples = np.stack(per_round)  # rounds x magnitudes x iterations
    curves = []
    for row, magnitude in enumerate(config.magnitudes):
        values = samples[:, row, :]
        curves.append(SimCurve(case=config.case, n=config.n, k=config.k, magnitude=int(magnitude),
                               mean=values.mean(axis=0), std=values.std(axis=0),
                               rounds=config.rounds, samples=values))
    logger.info("Simulation case %d (n=%d, k=%d): magnitudes %s over %d rounds",
                config.case, config.n, config.k, list(config.magnitudes), config.rounds)
    return curves


def case1_curve(config: SimConfig, n_jobs: int = 1) -> List[SimCurve]:
    """Label flips: m random flips in each of two copies of an all-A graph"""
    if config.case != 1:
        raise ParameterError(f"case1_curve needs case=1, got {config.case}")
    return run_simulation(config, n_jobs)


def case2_curve(config: SimConfig, n_jobs: int = 1) -> List[SimCurve]:
    """Edge rewiring: r double-edge swaps in one copy of a randomly labeled graph"""
    if config.case != 2:
        raise ParameterError(f"case2_curve needs case=2, got {config.case}")
    return run_simulation(config, n_jobs)


def vary_k_curve(n: int, ks: Sequence[int], magnitude: int, case: int = 1,
                 iterations: int = 10, rounds: int = 100, seed: int = 0,
                 n_jobs: int = 1) -> Dict[int, SimCurve]:
    """One curve per degree k at a fixed magnitude"""
    curves = {}
    for k in ks:
        config = SimConfig(n=n, k=k, case=case, magnitudes=[magnitude],
                           iterations=iterations, rounds=rounds, seed=seed)
        curves[int(k)] = run_simulation(config, n_jobs)[0]
    return curves


def curves_to_frame(curves: Sequence[SimCurve]) -> pd.DataFrame:
    """Long format: case, n, k, magnitude, iteration, mean_distance, std, rounds"""
    rows = []
    for curve in curves:
        for iteration, (mean, std) in enumerate(zip(curve.mean, curve.std)):
            rows.append({"case": curve.case, "n": curve.n, "k": curve.k,
                         "magnitude": curve.magnitude, "iteration": iteration,
                         "mean_distance": float(mean), "std": float(std),
                         "rounds": curve.rounds})
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)
