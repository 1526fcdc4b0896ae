"""
Tests for graph containers, the TU reader and the synthetic generators
"""

import numpy as np
import pytest

from core.errors import FormatError, IngestionError, ParameterError, RewiringError
from core.graph import (
    Graph, LabelSource, PerturbationKind, PerturbationSpec, dataset_statistics,
    degree_labeling, select_class_pair,
)
from core.graph_generators import apply_perturbation, flip_labels, generate_k_regular, rewire_edges
from core.tu_reader import load_tu_dataset, write_tu_dataset
from conftest import cycle_graph, make_dataset, path_graph
from generate_test_data import write_raw_tu


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)], np.zeros(n, dtype=np.int64))


class TestGraph:
    def test_edges_are_canonical(self):
        graph = Graph(3, [(2, 1), (0, 1)], [0, 0, 0])
        assert graph.edges.tolist() == [[0, 1], [1, 2]]
        assert graph.degrees().tolist() == [1, 2, 1]

    def test_self_loop_rejected(self):
        with pytest.raises(ParameterError):
            Graph(2, [(1, 1)], [0, 0])

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ParameterError):
            Graph(2, [(0, 1), (1, 0)], [0, 0])

    def test_label_count_must_match(self):
        with pytest.raises(ParameterError):
            Graph(3, [(0, 1)], [0, 0])

    def test_permuted_keeps_structure(self):
        graph = path_graph(4, np.array([0, 1, 2, 0]))
        permuted = graph.permuted([3, 2, 1, 0])
        assert permuted.edge_set() == {(2, 3), (1, 2), (0, 1)}
        assert permuted.node_labels.tolist() == [0, 2, 1, 0]
        assert sorted(permuted.degrees()) == sorted(graph.degrees())


class TestTuReader:
    def test_load_collapses_reciprocal_duplicate_and_loop_lines(self, tmp_path):
        write_raw_tu(tmp_path, "TOY",
                     edges=["1, 2", "2, 1", "2, 3", "3, 3", "1, 2", "4, 5"],
                     indicator=[1, 1, 1, 2, 2],
                     graph_labels=[-1, 1],
                     node_labels=[5, 7, 5, 9, 7])
        dataset = load_tu_dataset(tmp_path, "TOY")

        assert len(dataset) == 2
        assert dataset.graphs[0].edge_set() == {(0, 1), (1, 2)}
        assert dataset.graphs[1].edge_set() == {(0, 1)}
        assert dataset.class_labels.tolist() == [0, 1]
        assert dataset.metadata["class_value_map"] == {-1: 0, 1: 1}
        assert dataset.graphs[0].node_labels.tolist() == [0, 1, 0]
        assert dataset.graphs[1].node_labels.tolist() == [2, 1]
        assert dataset.label_alphabet_size == 3
        assert dataset.label_source == LabelSource.FILE

    def test_missing_node_labels_fall_back_to_degree(self, tmp_path):
        write_raw_tu(tmp_path, "DEG", edges=["1, 2", "2, 3", "4, 5"],
                     indicator=[1, 1, 1, 2, 2], graph_labels=[0, 1])
        dataset = load_tu_dataset(tmp_path, "DEG")

        assert dataset.label_source == LabelSource.DEGREE
        assert dataset.label_alphabet_size == 2
        assert dataset.graphs[0].node_labels.tolist() == [0, 1, 0]
        assert dataset.graphs[1].node_labels.tolist() == [0, 0]

    def test_missing_mandatory_file(self, tmp_path):
        write_raw_tu(tmp_path, "BROKEN", edges=["1, 2"], indicator=[1, 1], graph_labels=[0])
        (tmp_path / "BROKEN_graph_labels.txt").unlink()
        with pytest.raises(IngestionError):
            load_tu_dataset(tmp_path, "BROKEN")

    def test_edge_across_graphs_reports_line(self, tmp_path):
        write_raw_tu(tmp_path, "CROSS", edges=["1, 2", "2, 3"],
                     indicator=[1, 1, 2], graph_labels=[0, 1])
        with pytest.raises(FormatError) as info:
            load_tu_dataset(tmp_path, "CROSS")
        assert info.value.line == 2

    def test_non_integer_value(self, tmp_path):
        write_raw_tu(tmp_path, "TEXT", edges=["1, 2"], indicator=[1, "x"], graph_labels=[0])
        with pytest.raises(FormatError):
            load_tu_dataset(tmp_path, "TEXT")

    def test_unknown_node_id(self, tmp_path):
        write_raw_tu(tmp_path, "FAR", edges=["1, 9"], indicator=[1, 1], graph_labels=[0])
        with pytest.raises(FormatError):
            load_tu_dataset(tmp_path, "FAR")

    def test_round_trip(self, tmp_path, synthetic_dataset):
        write_tu_dataset(synthetic_dataset, tmp_path / "SYNTH")
        loaded = load_tu_dataset(tmp_path / "SYNTH", "SYNTH")
        assert loaded == synthetic_dataset

    def test_written_files_use_lf_and_both_directions(self, tmp_path):
        dataset = make_dataset([path_graph(2)], name="ONE")
        write_tu_dataset(dataset, tmp_path)
        assert (tmp_path / "ONE_A.txt").read_bytes() == b"1, 2\n2, 1\n"


class TestDatasetTransforms:
    def test_degree_labeling_compacts_over_dataset(self):
        dataset = make_dataset([path_graph(3), cycle_graph(4)])
        labeled = degree_labeling(dataset)
        assert labeled.label_alphabet_size == 2
        assert labeled.graphs[0].node_labels.tolist() == [0, 1, 0]
        assert labeled.graphs[1].node_labels.tolist() == [1, 1, 1, 1]
        assert labeled.metadata["degree_values"] == [1, 2]

    def test_degree_labeling_keeps_file_labels_unless_replaced(self):
        dataset = make_dataset([path_graph(3)])
        dataset.label_source = LabelSource.FILE
        assert degree_labeling(dataset, replace=False) is dataset

    def test_select_class_pair_binarizes(self):
        graphs = [path_graph(2), path_graph(3), cycle_graph(3), path_graph(4)]
        dataset = make_dataset(graphs, classes=[0, 1, 2, 2], name="MULTI")
        pair = select_class_pair(dataset, (0, 2))
        assert len(pair) == 3
        assert pair.class_labels.tolist() == [0, 1, 1]
        assert pair.name == "MULTI(c0&c2)"
        assert pair.metadata["class_pair"] == [0, 2]

    def test_select_class_pair_rejects_missing_class(self):
        dataset = make_dataset([path_graph(2), path_graph(3)], classes=[0, 1])
        with pytest.raises(ParameterError):
            select_class_pair(dataset, (0, 5))

    def test_statistics_per_class(self):
        dataset = make_dataset([path_graph(3), path_graph(5), cycle_graph(4)], classes=[0, 0, 1])
        stats = dataset_statistics(dataset).set_index("class")
        assert stats.loc[0, "graphs"] == 2
        assert stats.loc[0, "avg_nodes"] == 4.0
        assert stats.loc[0, "avg_edges"] == 3.0
        assert stats.loc[1, "avg_degree"] == 2.0


class TestKRegular:
    @pytest.mark.parametrize("n,k", [(10, 3), (20, 4), (50, 5), (11, 4)])
    def test_every_degree_is_k(self, n, k):
        graph = generate_k_regular(n, k, seed=1)
        assert graph.node_count == n
        assert np.all(graph.degrees() == k)
        assert graph.edge_count == n * k // 2

    def test_strict_mode(self):
        graph = generate_k_regular(10, 3, seed=4, strict=True)
        assert np.all(graph.degrees() == 3)

    def test_deterministic_given_seed(self):
        assert generate_k_regular(30, 5, seed=9) == generate_k_regular(30, 5, seed=9)

    def test_odd_stub_count(self):
        with pytest.raises(ParameterError):
            generate_k_regular(5, 3, seed=0)

    def test_three_regular_on_four_nodes_is_k4(self):
        graph = generate_k_regular(4, 3, seed=2)
        assert graph.edge_set() == {(a, b) for a in range(4) for b in range(a + 1, 4)}

    def test_degree_too_large(self):
        with pytest.raises(ParameterError):
            generate_k_regular(4, 4, seed=0)


class TestPerturbations:
    def test_flip_exactly_m(self):
        base = generate_k_regular(20, 3, seed=0)
        flipped = flip_labels(base, 5, from_label=0, to_label=1, seed=2)
        assert int(np.sum(flipped.node_labels == 1)) == 5
        assert flipped.edge_set() == base.edge_set()

    def test_flip_zero_is_identity(self):
        base = generate_k_regular(10, 3, seed=0)
        assert flip_labels(base, 0, 0, 1, seed=0) == base

    def test_flip_more_than_available(self):
        with pytest.raises(ParameterError):
            flip_labels(cycle_graph(4), 5, 0, 1, seed=0)

    def test_rewire_preserves_degrees_and_labels(self):
        base = generate_k_regular(30, 4, seed=3)
        rewired = rewire_edges(base, 10, seed=5)
        assert np.array_equal(rewired.degrees(), base.degrees())
        assert rewired.edge_count == base.edge_count
        assert rewired.edge_set() != base.edge_set()
        assert np.array_equal(rewired.node_labels, base.node_labels)

    def test_rewire_zero_is_identity(self):
        base = generate_k_regular(10, 3, seed=0)
        assert rewire_edges(base, 0, seed=1) == base

    @pytest.mark.parametrize("seed", range(10))
    def test_rewire_four_cycle_stays_a_simple_cycle(self, seed):
        square = cycle_graph(4)
        rewired = rewire_edges(square, 1, seed=seed)
        assert rewired.edge_count == 4
        assert np.all(rewired.degrees() == 2)
        assert all(a != b for a, b in rewired.edge_set())
        assert rewired.edge_set() != square.edge_set()

    def test_rewire_complete_graph_fails(self):
        with pytest.raises(RewiringError):
            rewire_edges(complete_graph(4), 1, seed=0)

    def test_rewire_needs_two_edges(self):
        with pytest.raises(ParameterError):
            rewire_edges(path_graph(2), 1, seed=0)

    def test_apply_perturbation_dispatch(self):
        base = generate_k_regular(10, 3, seed=0)
        flipped = apply_perturbation(base, PerturbationSpec(PerturbationKind.LABEL_FLIP, 2, seed=1))
        assert int(flipped.node_labels.sum()) == 2
        with pytest.raises(ParameterError):
            apply_perturbation(base, PerturbationSpec(PerturbationKind.LABEL_FLIP, 11, seed=1))
        with pytest.raises(ParameterError):
            PerturbationSpec(PerturbationKind.EDGE_REWIRE, -1, seed=0)
