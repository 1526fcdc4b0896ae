"""
Tests for down-sampling, ROC-AUC, method specs, the benchmark runner and flip reports
"""

import numpy as np
import pandas as pd
import pytest

from bench.benchmark_runner import (
    BenchmarkResult, full_data_auc, run_benchmark, sweep_iterations, sweep_rate,
)
from bench.downsampling import downsample, outlier_count
from bench.features import compute_features, rbf_kernel
from bench.flip_report import FlipClass, FlipReport, classify, flip_report, flip_table
from bench.method_spec import DetectorKind, FeatureKind, all_methods, parse_method
from bench.metrics import roc_auc, roc_auc_from_arrays
from core.errors import ParameterError, ReportError, UndefinedAucError, UsageError
from detectors.score_vector import ScoreVector
from kernels.kernel_cache import KernelCache


class TestDownsampling:
    @pytest.mark.parametrize("rate,size,expected", [
        (0.1, 40, 4), (0.05, 10, 1), (0.01, 10, 1), (0.25, 10, 3), (0.15, 10, 2), (1.0, 7, 7),
    ])
    def test_outlier_count(self, rate, size, expected):
        assert outlier_count(rate, size) == expected

    def test_variant_members(self, synthetic_dataset):
        variant = downsample(synthetic_dataset, dc=0, rate=0.1, seed=3)
        labels = synthetic_dataset.class_labels

        assert variant.outlier_count == 4
        assert variant.inlier_count == 40
        assert np.all(np.diff(variant.member_indices) > 0)
        np.testing.assert_array_equal(variant.truth, labels[variant.member_indices] == 0)
        assert set(np.flatnonzero(labels == 1)) <= set(variant.member_indices.tolist())

    def test_variant_is_deterministic(self, synthetic_dataset):
        first = downsample(synthetic_dataset, dc=1, rate=0.2, seed=7)
        second = downsample(synthetic_dataset, dc=1, rate=0.2, seed=7)
        np.testing.assert_array_equal(first.member_indices, second.member_indices)

    def test_variant_dataset_keeps_source_order(self, synthetic_dataset):
        variant = downsample(synthetic_dataset, dc=1, rate=0.1, seed=0)
        subset = variant.dataset(synthetic_dataset)
        assert len(subset) == 44
        assert subset.graphs[0] == synthetic_dataset.graphs[variant.member_indices[0]]
        assert subset.metadata["parent"] == synthetic_dataset.name

    def test_invalid_rate_and_class(self, synthetic_dataset):
        with pytest.raises(ParameterError):
            downsample(synthetic_dataset, dc=0, rate=0.0, seed=0)
        with pytest.raises(ParameterError):
            downsample(synthetic_dataset, dc=0, rate=1.5, seed=0)
        with pytest.raises(ParameterError):
            downsample(synthetic_dataset, dc=3, rate=0.1, seed=0)

    def test_multi_class_dataset_is_rejected(self, three_class_dataset):
        with pytest.raises(ParameterError, match="select_class_pair"):
            downsample(three_class_dataset, dc=0, rate=0.1, seed=0)
        spec = parse_method("wl+lof", L=1, k=5)
        with pytest.raises(ParameterError):
            run_benchmark(three_class_dataset, spec, dc=0, seeds=[0])
        with pytest.raises(ParameterError):
            sweep_rate(three_class_dataset, spec, rates=[0.1], seeds=[0], mode="slice")
        with pytest.raises(ParameterError):
            sweep_iterations(three_class_dataset, spec, [1], seeds=[0])


class TestRocAuc:
    def test_worked_example(self):
        assert roc_auc_from_arrays([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)

    def test_ties_count_half(self):
        assert roc_auc_from_arrays([1.0, 1.0, 1.0, 1.0], [0, 1, 0, 1]) == 0.5

    def test_perfect_and_reversed(self):
        assert roc_auc_from_arrays([0.1, 0.2, 0.9], [0, 0, 1]) == 1.0
        assert roc_auc_from_arrays([0.9, 0.2, 0.1], [0, 0, 1]) == 0.0

    def test_complement_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            scores = rng.normal(size=30).round(1)
            truth = rng.random(30) < 0.3
            truth[:2] = [True, False]
            total = roc_auc_from_arrays(scores, truth) + roc_auc_from_arrays(scores, ~truth)
            assert abs(total - 1.0) < 1e-12

    def test_single_class_is_undefined(self):
        with pytest.raises(UndefinedAucError):
            roc_auc_from_arrays([0.1, 0.2], [1, 1])
        with pytest.raises(UndefinedAucError):
            roc_auc(ScoreVector([0.1, 0.2]))


class TestMethodSpec:
    def test_parse(self):
        spec = parse_method("PK+OCSVM", L=3, w=0.05)
        assert spec.feature == FeatureKind.PK and spec.detector == DetectorKind.OCSVM
        assert spec.name == "pk+ocsvm"
        assert spec.feature_params() == {"kernel": "pk", "L": 3, "w": 0.05, "seed": 0}

    @pytest.mark.parametrize("text", ["wl", "gin+lof", "wl+knn", "wl+iforest", "pk+iforest"])
    def test_rejected(self, text):
        with pytest.raises(UsageError):
            parse_method(text)

    def test_all_methods(self):
        names = {spec.name for spec in all_methods()}
        assert len(names) == 7
        assert "fgsd+iforest" in names and "wl+iforest" not in names


class TestFlipClassification:
    @pytest.mark.parametrize("auc0,auc1,expected", [
        (0.186, 0.815, FlipClass.FLIP),
        (0.730, 0.349, FlipClass.FLIP),
        (0.603, 0.651, FlipClass.BOTH_BETTER),
        (0.2, 0.4, FlipClass.BOTH_WORSE),
        (0.5, 0.7, FlipClass.INDETERMINATE),
    ])
    def test_classify(self, auc0, auc1, expected):
        assert classify(auc0, auc1) == expected

    def test_report_gap_and_sum(self):
        report = FlipReport("DD", "wl+lof", 0.186, 0.024, 0.815, 0.020)
        assert report.gap == pytest.approx(0.629)
        assert report.auc_sum == pytest.approx(1.001)
        assert report.row()["classification"] == "performance_flip"


def result(dc: int, aucs, seeds=(0, 1, 2), rate: float = 0.1) -> BenchmarkResult:
    return BenchmarkResult(dataset="TOY", method=parse_method("wl+lof"), dc=dc, rate=rate,
                           seeds=list(seeds), aucs=list(aucs))


class TestFlipReport:
    def test_combines_both_variants(self):
        report = flip_report([result(0, [0.2, 0.3, 0.1]), result(1, [0.8, 0.7, 0.9])])
        assert report.auc0 == pytest.approx(0.2)
        assert report.auc1 == pytest.approx(0.8)
        assert report.std0 == pytest.approx(np.std([0.2, 0.3, 0.1]))
        assert report.classification == FlipClass.FLIP

    def test_missing_variant(self):
        with pytest.raises(ReportError):
            flip_report([result(0, [0.2, 0.3, 0.1])])

    def test_mismatched_seeds(self):
        with pytest.raises(ReportError):
            flip_report([result(0, [0.2, 0.3, 0.1]), result(1, [0.8, 0.7], seeds=(0, 1))])

    def test_mismatched_config(self):
        with pytest.raises(ReportError):
            flip_report([result(0, [0.2, 0.3, 0.1]), result(1, [0.8, 0.7, 0.9], rate=0.2)])

    def test_table_and_aggregates(self):
        summary = pd.DataFrame([
            {"dataset": "A", "method": "wl+lof", "dc": 0, "mean_auc": 0.2},
            {"dataset": "A", "method": "wl+lof", "dc": 1, "mean_auc": 0.8},
            {"dataset": "B", "method": "wl+lof", "dc": 0, "mean_auc": 0.6},
            {"dataset": "B", "method": "wl+lof", "dc": 1, "mean_auc": 0.65},
            {"dataset": "C", "method": "wl+lof", "dc": 0, "mean_auc": 0.4},
        ])
        table, aggregates = flip_table(summary, {"A": "x_y", "B": "x_non_x", "C": "x_y"})

        by_dataset = table.set_index("dataset")
        assert by_dataset.loc["A", "classification"] == "performance_flip"
        assert by_dataset.loc["B", "classification"] == "both_better_than_random"
        assert by_dataset.loc["C", "classification"] == "incomplete"
        assert by_dataset.loc["A", "gap"] == pytest.approx(0.6)

        scopes = aggregates.set_index("scope")
        assert scopes.loc["all", "cases"] == 2
        assert scopes.loc["all", "gap_ge_0_2"] == pytest.approx(0.5)
        assert scopes.loc["all", "flips"] == 1
        assert scopes.loc["x_y", "gap_ge_0_4"] == pytest.approx(1.0)
        assert scopes.loc["x_non_x", "gap_ge_0_2"] == pytest.approx(0.0)

    def test_table_needs_columns(self):
        with pytest.raises(ReportError):
            flip_table(pd.DataFrame([{"dataset": "A", "dc": 0}]))

    def test_table_never_pairs_different_configs(self):
        summary = pd.DataFrame([
            {"dataset": "A", "method": "wl+lof", "dc": 0, "mean_auc": 0.2, "rate": 0.1, "L": 5},
            {"dataset": "A", "method": "wl+lof", "dc": 1, "mean_auc": 0.8, "rate": 0.6, "L": 1},
        ])
        table, aggregates = flip_table(summary)
        assert len(table) == 2
        assert set(table["classification"]) == {"incomplete"}
        assert list(table.columns[:4]) == ["dataset", "method", "L", "rate"]
        assert aggregates.set_index("scope").loc["all", "cases"] == 0

    def test_table_keeps_each_config_apart(self):
        rows = []
        for L, (auc0, auc1) in ((1, (0.45, 0.55)), (5, (0.2, 0.8))):
            for dc, auc in ((0, auc0), (1, auc1)):
                rows.append({"dataset": "A", "method": "wl+lof", "dc": dc, "mean_auc": auc,
                             "rate": 0.1, "L": L, "mode": "slice", "seeds": 10})
        table, _ = flip_table(pd.DataFrame(rows))
        by_l = table.set_index("L")
        assert by_l.loc[1, "gap"] == pytest.approx(0.1)
        assert by_l.loc[5, "gap"] == pytest.approx(0.6)

    def test_table_flags_conflicting_runs(self):
        summary = pd.DataFrame([
            {"dataset": "A", "method": "wl+lof", "dc": 0, "mean_auc": 0.2, "L": 5},
            {"dataset": "A", "method": "wl+lof", "dc": 0, "mean_auc": 0.3, "L": 5},
            {"dataset": "A", "method": "wl+lof", "dc": 1, "mean_auc": 0.8, "L": 5},
        ])
        table, _ = flip_table(summary)
        assert len(table) == 1
        assert table.loc[0, "classification"] == "conflicting"
        assert np.isnan(table.loc[0, "gap"])

    def test_table_tolerates_repeated_identical_rows(self):
        row = {"dataset": "A", "method": "wl+lof", "mean_auc": 0.2, "L": 5}
        summary = pd.DataFrame([dict(row, dc=0), dict(row, dc=0), dict(row, dc=1, mean_auc=0.7)])
        table, _ = flip_table(summary)
        assert table.loc[0, "classification"] == "performance_flip"


class TestBenchmarkRunner:
    def test_cache_counts_survive_worker_processes(self, synthetic_dataset, tmp_path):
        cache = KernelCache(tmp_path)
        spec = parse_method("wl+lof", L=1, k=5)
        run_benchmark(synthetic_dataset, spec, 0, 0.1, [0, 1, 2], cache=cache, n_jobs=2)
        assert (cache.hits, cache.misses) == (0, 3)
        run_benchmark(synthetic_dataset, spec, 0, 0.1, [0, 1, 2], cache=cache, n_jobs=2)
        assert (cache.hits, cache.misses) == (3, 3)

    def test_single_diverse_outlier_among_compact_inliers(self, synthetic_dataset):
        spec = parse_method("wl+lof", L=2, k=3)
        outcome = run_benchmark(synthetic_dataset, spec, dc=1, rate=0.02, seeds=[0, 1, 2])
        assert len(outcome.aucs) == 3
        assert outcome.outliers == [1, 1, 1] and outcome.inliers == [40, 40, 40]
        assert outcome.mean_auc > 0.9

    def test_results_frame_and_summary(self, synthetic_dataset):
        spec = parse_method("wl+ocsvm", L=1)
        outcome = run_benchmark(synthetic_dataset, spec, dc=0, rate=0.2, seeds=[0, 1])
        frame = outcome.results_frame()
        assert list(frame["seed"]) == [0, 1]
        assert set(frame["method"]) == {"wl+ocsvm"}
        row = outcome.summary_row()
        assert row["mean_auc"] == pytest.approx(np.mean(outcome.aucs))
        assert 0.0 <= row["mean_auc"] <= 1.0

    def test_slice_mode_equals_recompute_for_wl(self, synthetic_dataset):
        spec = parse_method("wl+lof", L=3, k=5)
        recompute = run_benchmark(synthetic_dataset, spec, dc=0, seeds=[0, 1, 2])
        sliced = run_benchmark(synthetic_dataset, spec, dc=0, seeds=[0, 1, 2], mode="slice")
        np.testing.assert_allclose(recompute.aucs, sliced.aucs)

    def test_fgsd_iforest_runs(self, synthetic_dataset):
        spec = parse_method("fgsd+iforest", trees=20, bins=40)
        outcome = run_benchmark(synthetic_dataset, spec, dc=1, seeds=[0, 1])
        assert all(0.0 <= auc <= 1.0 for auc in outcome.aucs)

    def test_unknown_mode_and_empty_seeds(self, synthetic_dataset):
        spec = parse_method("wl+lof", L=1, k=5)
        with pytest.raises(ParameterError):
            run_benchmark(synthetic_dataset, spec, dc=0, seeds=[0], mode="cached")
        with pytest.raises(ParameterError):
            run_benchmark(synthetic_dataset, spec, dc=0, seeds=[])

    def test_sweep_rate_table(self, synthetic_dataset):
        spec = parse_method("wl+lof", L=1, k=3)
        frame = sweep_rate(synthetic_dataset, spec, rates=[0.1, 0.2], seeds=[0, 1])
        assert list(frame.columns) == ["dataset", "method", "dc", "rate", "L", "mean_auc", "std"]
        assert len(frame) == 4

    def test_sweep_iterations_table(self, synthetic_dataset):
        spec = parse_method("wl+lof", k=5)
        frame = sweep_iterations(synthetic_dataset, spec, iterations=[2, 1], seeds=[0, 1])
        assert list(frame["L"]) == [1, 2]
        np.testing.assert_allclose(frame["gap"], (frame["auc0"] - frame["auc1"]).abs())

    def test_sweep_iterations_matches_single_runs(self, synthetic_dataset):
        spec = parse_method("pk+lof", k=5)
        frame = sweep_iterations(synthetic_dataset, spec, iterations=[1, 3], seeds=[0, 1])
        single = run_benchmark(synthetic_dataset, spec.with_iterations(1), dc=0, seeds=[0, 1])
        assert frame.loc[0, "auc0"] == pytest.approx(single.mean_auc)

    def test_sweep_iterations_needs_kernel(self, synthetic_dataset):
        with pytest.raises(UsageError):
            sweep_iterations(synthetic_dataset, parse_method("fgsd+lof"), iterations=[1])

    def test_full_data_aucs_are_complementary(self, synthetic_dataset):
        aucs = full_data_auc(synthetic_dataset, parse_method("wl+lof", L=2, k=5))
        assert aucs[0] + aucs[1] == pytest.approx(1.0, abs=1e-12)


class TestFeatureSpace:
    def test_rbf_kernel_default_gamma(self):
        vectors = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]])
        gram = rbf_kernel(vectors)
        gamma = 1.0 / (2 * vectors.var())
        assert gram[0, 1] == pytest.approx(np.exp(-2.0 * gamma))
        np.testing.assert_allclose(np.diag(gram), 1.0)

    def test_restrict_matches_variant_for_fgsd(self, synthetic_dataset):
        spec = parse_method("fgsd+lof", bins=40)
        full = compute_features(synthetic_dataset, spec)
        variant = downsample(synthetic_dataset, dc=0, rate=0.1, seed=1)
        direct = compute_features(variant.dataset(synthetic_dataset), spec)
        np.testing.assert_array_equal(full.restrict(variant.member_indices).embedding.vectors,
                                      direct.embedding.vectors)

    def test_score_tags_method(self, synthetic_dataset):
        spec = parse_method("wl+lof", L=1, k=5)
        scores = compute_features(synthetic_dataset, spec).score(spec)
        assert scores.method == "wl+lof"
        assert scores.config["kernel"] == "wl"
