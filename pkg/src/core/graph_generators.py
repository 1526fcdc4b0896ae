"""
Synthetic Graphs and Controlled Perturbations
k-regular generation, label flips and degree-preserving edge rewiring
"""

import logging
from collections import defaultdict
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from core.errors import GenerationError, ParameterError, RewiringError
from core.graph import Graph, PerturbationKind, PerturbationSpec

logger = logging.getLogger(__name__)

MAX_GENERATION_ATTEMPTS = 10_000
MAX_SWAP_FAILURES = 1_000


def _suitable(edges: Set[Tuple[int, int]], leftover: Dict[int, int]) -> bool:
    """True when at least one leftover stub pair can still form a new edge"""
    if not leftover:
        return True
    nodes = list(leftover)
    for i, a in enumerate(nodes):
        for b in nodes[:i]:
            pair = (a, b) if a < b else (b, a)
            if pair not in edges:
                return True
    return False


def _pairing_attempt(n: int, k: int, rng: np.random.Generator,
                     strict: bool) -> Optional[Set[Tuple[int, int]]]:
    """One pairing-model attempt; None when the attempt is rejected"""
    edges: Set[Tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n, dtype=np.int64), k)

    while len(stubs):
        rng.shuffle(stubs)
        leftover: Dict[int, int] = defaultdict(int)
        for s1, s2 in stubs.reshape(-1, 2).tolist():
            pair = (s1, s2) if s1 < s2 else (s2, s1)
            if s1 != s2 and pair not in edges:
                edges.add(pair)
            elif strict:
                return None
            else:
                leftover[s1] += 1
                leftover[s2] += 1

        if not _suitable(edges, leftover):
            return None
        stubs = np.array([node for node, count in sorted(leftover.items())
                          for _ in range(count)], dtype=np.int64)
    return edges


def generate_k_regular(n: int, k: int, seed: int, strict: bool = False) -> Graph:
    """
    Random simple k-regular graph on n nodes (all nodes labeled 0)

    Stubs are paired uniformly at random. In the default mode, pairs that
    would form a self-loop or multi-edge are re-paired among themselves and an
    attempt is rejected only when no valid pairing remains; with strict=True
    any attempt containing a self-loop or multi-edge is rejected outright.
    Attempts repeat until success, up to MAX_GENERATION_ATTEMPTS.

    Args:
        n: Number of nodes
        k: Degree of every node (k < n, n*k even)
        seed: RNG seed; output is deterministic given the seed
        strict: Full rejection of any sample with a self-loop or multi-edge

    Returns:
        Graph with every degree equal to k
    """
    if n < 0 or k < 0:
        raise ParameterError(f"n and k must be non-negative, got n={n}, k={k}")
    if (n * k) % 2 != 0:
        raise ParameterError(f"n*k must be even, got n={n}, k={k}")
    if k >= n and not (n == 0 and k == 0):
        raise ParameterError(f"k must be smaller than n, got n={n}, k={k}")

    labels = np.zeros(n, dtype=np.int64)
    if k == 0:
        return Graph(n, [], labels)

    rng = np.random.default_rng(seed)
    for attempt in range(1, MAX_GENERATION_ATTEMPTS + 1):
        edges = _pairing_attempt(n, k, rng, strict)
        if edges is not None:
            logger.debug("Generated (%d,%d)-regular graph after %d attempt(s)", k, n, attempt)
            return Graph(n, sorted(edges), labels)

    raise GenerationError(
        f"no simple ({k},{n})-regular graph after {MAX_GENERATION_ATTEMPTS} attempts"
    )


def flip_labels(graph: Graph, m: int, from_label: int, to_label: int, seed: int) -> Graph:
    """Relabel exactly m uniformly chosen nodes carrying from_label to to_label"""
    if m < 0:
        raise ParameterError(f"m must be >= 0, got {m}")
    candidates = np.flatnonzero(graph.node_labels == from_label)
    if len(candidates) < m:
        raise ParameterError(
            f"only {len(candidates)} node(s) carry label {from_label}, cannot flip {m}"
        )
    if m == 0:
        return graph

    rng = np.random.default_rng(seed)
    chosen = rng.choice(candidates, size=m, replace=False)
    labels = graph.node_labels.copy()
    labels[chosen] = to_label
    return graph.with_labels(labels)


def rewire_edges(graph: Graph, r: int, seed: int) -> Graph:
    """
    Apply r degree-preserving double-edge swaps

    A swap picks edges (a,b),(c,d) with four distinct endpoints and replaces
    them by (a,d),(c,b) when neither new edge exists. Failed picks are redrawn,
    up to MAX_SWAP_FAILURES consecutive failures per swap.
    """
    if r < 0:
        raise ParameterError(f"r must be >= 0, got {r}")
    if r == 0:
        return graph
    if graph.edge_count < 2:
        raise ParameterError("rewiring needs at least 2 edges")

    rng = np.random.default_rng(seed)
    edge_list: List[Tuple[int, int]] = [tuple(e) for e in graph.edges.tolist()]
    present = set(edge_list)
    m = len(edge_list)

    for swap in range(r):
        failures = 0
        while True:
            i, j = rng.choice(m, size=2, replace=False)
            a, b = edge_list[i]
            c, d = edge_list[j]
            if rng.random() < 0.5:
                c, d = d, c
            new_one = (min(a, d), max(a, d))
            new_two = (min(c, b), max(c, b))
            distinct = len({a, b, c, d}) == 4
            if distinct and new_one not in present and new_two not in present:
                present.discard(edge_list[i])
                present.discard(edge_list[j])
                present.add(new_one)
                present.add(new_two)
                edge_list[i] = new_one
                edge_list[j] = new_two
                break
            failures += 1
            if failures >= MAX_SWAP_FAILURES:
                raise RewiringError(
                    f"swap {swap + 1}/{r}: {MAX_SWAP_FAILURES} consecutive invalid picks"
                )

    return graph.with_edges(sorted(edge_list))


def apply_perturbation(graph: Graph, spec: PerturbationSpec) -> Graph:
    if spec.kind == PerturbationKind.LABEL_FLIP:
        if spec.magnitude > graph.node_count:
            raise ParameterError(
                f"cannot flip {spec.magnitude} labels on {graph.node_count} nodes"
            )
        return flip_labels(graph, spec.magnitude, spec.from_label, spec.to_label, spec.seed)
    return rewire_edges(graph, spec.magnitude, spec.seed)
