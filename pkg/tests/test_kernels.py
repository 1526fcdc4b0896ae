"""
Tests for the WL and propagation kernels, Gram normalization and the kernel cache
"""

import numpy as np
import pytest

from bench.features import compute_features
from bench.method_spec import parse_method
from core.errors import InputError, ParameterError
from core.graph import Graph
from kernels.kernel_cache import CACHE_MAGIC, KernelCache
from kernels.kernel_matrix import KernelMatrix, kernel_distance, normalize_gram
from kernels.propagation_kernel import pk_kernel, pk_propagate, transition_matrix
from kernels.wl_kernel import wl_kernel, wl_relabel
from conftest import cycle_graph, make_dataset, path_graph


def random_graph(rng: np.random.Generator, n: int, p: float, alphabet: int = 3) -> Graph:
    upper = np.triu(rng.random((n, n)) < p, k=1)
    return Graph(n, np.column_stack(np.nonzero(upper)), rng.integers(0, alphabet, size=n))


class TestWeisfeilerLeman:
    def test_path_versus_triangle(self):
        dataset = make_dataset([path_graph(3), cycle_graph(3)])
        kernel = wl_kernel(dataset, 1)

        np.testing.assert_array_equal(kernel.per_iteration[0], [[9, 9], [9, 9]])
        np.testing.assert_array_equal(kernel.per_iteration[1], [[5, 3], [3, 9]])
        np.testing.assert_array_equal(kernel.cumulative, [[14, 12], [12, 18]])
        assert kernel.normalized_cumulative[0, 1] == pytest.approx(12 / np.sqrt(14 * 18))

    def test_relabel_table_is_shared(self):
        dataset = make_dataset([path_graph(3), cycle_graph(3)])
        labels, table = wl_relabel(dataset, 2)
        assert table.alphabet_size(0) == 1
        assert table.alphabet_size(1) == 2
        assert labels[0][1].tolist() == [0, 1, 0]
        assert labels[1][1].tolist() == [1, 1, 1]

    def test_negative_iterations(self):
        with pytest.raises(ParameterError):
            wl_kernel(make_dataset([path_graph(2)]), -1)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        graph = random_graph(rng, 12, 0.3)
        other = random_graph(rng, 10, 0.4)
        shuffled = graph.permuted(rng.permutation(12))
        kernel = wl_kernel(make_dataset([graph, shuffled, other], alphabet=3), 4)
        for gram in kernel.per_iteration:
            np.testing.assert_array_equal(gram[0], gram[1])

    def test_per_iteration_dot_products_never_grow(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            pair = [random_graph(rng, int(rng.integers(4, 15)), 0.3) for _ in range(2)]
            kernel = wl_kernel(make_dataset(pair, alphabet=3), 6)
            cross = [gram[0, 1] for gram in kernel.per_iteration]
            assert all(b <= a for a, b in zip(cross, cross[1:]))

    def test_truncation_equals_direct_computation(self, synthetic_dataset):
        full = wl_kernel(synthetic_dataset, 5)
        direct = wl_kernel(synthetic_dataset, 2)
        np.testing.assert_allclose(full.upto(2).normalized_cumulative, direct.normalized_cumulative)

    def test_normalized_kernel_is_psd(self, synthetic_dataset):
        kernel = wl_kernel(synthetic_dataset, 3).normalized_cumulative
        eigenvalues = np.linalg.eigvalsh(kernel)
        assert eigenvalues.min() >= -1e-6 * eigenvalues.max()
        np.testing.assert_allclose(np.diag(kernel), 1.0)
        assert kernel.min() >= 0.0 and kernel.max() <= 1.0 + 1e-12


class TestPropagationKernel:
    def test_rows_stay_distributions(self):
        graph = Graph(4, [(0, 1), (1, 2)], [0, 1, 2, 1])
        for features in pk_propagate(graph, 4, alphabet_size=3):
            np.testing.assert_allclose(features.sum(axis=1), 1.0)

    def test_isolated_node_keeps_its_mass(self):
        graph = Graph(3, [(0, 1)], [0, 1, 2])
        assert transition_matrix(graph)[2, 2] == 1.0
        last = pk_propagate(graph, 3, alphabet_size=3)[-1]
        np.testing.assert_array_equal(last[2], [0.0, 0.0, 1.0])

    def test_uniform_labels_share_one_bin(self):
        kernel = pk_kernel(make_dataset([cycle_graph(5), cycle_graph(6)]), L=3, w=0.1, seed=0)
        for gram in kernel.per_iteration:
            np.testing.assert_array_equal(gram, [[25, 30], [30, 36]])

    def test_truncation_and_seed_determinism(self, synthetic_dataset):
        full = pk_kernel(synthetic_dataset, 4, w=0.1, seed=3)
        direct = pk_kernel(synthetic_dataset, 2, w=0.1, seed=3)
        for a, b in zip(full.upto(2).per_iteration, direct.per_iteration):
            np.testing.assert_array_equal(a, b)

    def test_bin_width_must_be_positive(self, synthetic_dataset):
        with pytest.raises(ParameterError):
            pk_kernel(synthetic_dataset, 2, w=0.0)


class TestKernelMatrix:
    def test_zero_diagonal_rows_stay_zero(self):
        gram = np.array([[4.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
        normalized = normalize_gram(gram)
        np.testing.assert_allclose(normalized[0], [1.0, 1.0, 0.0])
        np.testing.assert_array_equal(normalized[2], [0.0, 0.0, 0.0])

    def test_distance_properties(self, synthetic_dataset):
        distances = kernel_distance(wl_kernel(synthetic_dataset, 3))
        np.testing.assert_array_equal(distances, distances.T)
        np.testing.assert_array_equal(np.diag(distances), 0.0)
        assert distances.min() >= 0.0 and distances.max() <= 1.0

    def test_restricted_matches_subset(self):
        graphs = [path_graph(3), cycle_graph(4), path_graph(5), cycle_graph(3)]
        dataset = make_dataset(graphs)
        full = wl_kernel(dataset, 2).restricted([1, 3])
        sub = wl_kernel(dataset.subset([1, 3]), 2)
        np.testing.assert_allclose(full.normalized_cumulative, sub.normalized_cumulative)

    def test_upto_range(self):
        kernel = KernelMatrix([np.eye(2), np.eye(2)], kernel="wl")
        assert kernel.iterations == 1
        with pytest.raises(InputError):
            kernel.upto(2)


class TestKernelCache:
    def test_store_then_load(self, tmp_path):
        cache = KernelCache(tmp_path)
        config = {"kernel": "wl", "L": 2, "dataset": "toy"}
        arrays = [np.arange(4.0).reshape(2, 2), np.eye(2)]
        cache.store(config, arrays)

        loaded = cache.load(config)
        assert cache.hits == 1
        for a, b in zip(arrays, loaded):
            np.testing.assert_array_equal(a, b)
        assert cache.path_for(config).read_bytes().startswith(CACHE_MAGIC)

    def test_unknown_key_is_a_miss(self, tmp_path):
        cache = KernelCache(tmp_path)
        assert cache.load({"kernel": "pk", "L": 1}) is None
        assert cache.misses == 1

    def test_corrupt_entry_is_a_miss(self, tmp_path):
        cache = KernelCache(tmp_path)
        config = {"kernel": "wl", "L": 1}
        path = cache.store(config, [np.eye(3)])
        path.write_bytes(b"garbage")
        assert cache.load(config) is None
        assert cache.misses == 1

    def test_compute_features_reuses_entry(self, tmp_path, synthetic_dataset):
        cache = KernelCache(tmp_path)
        spec = parse_method("wl+lof", L=2)
        first = compute_features(synthetic_dataset, spec, cache)
        second = compute_features(synthetic_dataset, spec, cache)
        assert cache.hits == 1 and cache.misses == 1
        np.testing.assert_allclose(first.kernel.normalized_cumulative,
                                   second.kernel.normalized_cumulative)

    def test_variant_does_not_hit_full_data_entry(self, tmp_path, synthetic_dataset):
        cache = KernelCache(tmp_path)
        spec = parse_method("wl+lof", L=1)
        compute_features(synthetic_dataset, spec, cache)
        compute_features(synthetic_dataset.subset(range(10)), spec, cache)
        assert cache.hits == 0 and cache.misses == 2
