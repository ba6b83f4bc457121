"""Assignments, relevance ranking, report payloads, ARI, stability, baseline."""

import numpy as np
import pytest

import binmix
from binmix import analysis as an, em
from binmix.dataset import SplitPair
from binmix.errors import ParameterError, RankInfeasibleError
from binmix.params import MixtureParams
from conftest import pair_counting_ari, random_admissible_model, separable_model


def fitted_model(data, k):
    init = binmix.asvtd(data, k)
    refined, _ = em.em_refine(data, init)
    return an.assign(refined, data)


class TestAssign:
    def test_hand_case(self):
        params = MixtureParams(
            means=np.array([[0.9, 0.1], [0.9, 0.1]]), weights=np.array([0.5, 0.5])
        )
        dense = np.array([[1.0, 1.0], [0.0, 0.0], [1.0, 1.0]])
        data = binmix.BinaryDataset.from_dense(dense, row_ids=("a", "b", "c"))
        model = an.assign(params, data)
        assert model.assignments.tolist() == [0, 1, 0]
        assert model.cluster_sizes.tolist() == [2, 1]
        assert model.posteriors.shape == (3, 2)
        assert np.allclose(model.posteriors.sum(axis=1), 1.0)

    def test_sizes_count_every_row(self):
        data, _ = binmix.generate_synthetic(10, 3, 500, seed=0)
        model = fitted_model(data, 3)
        assert int(model.cluster_sizes.sum()) == 500
        expected = np.bincount(model.assignments, minlength=3)
        assert np.array_equal(model.cluster_sizes, expected)

    def test_empty_cluster_keeps_zero_size(self):
        params = MixtureParams(
            means=np.array([[0.9, 0.5], [0.9, 0.5]]), weights=np.array([0.99, 0.01])
        )
        dense = np.ones((4, 2))
        data = binmix.BinaryDataset.from_dense(
            dense, row_ids=tuple("abcd")
        )
        model = an.assign(params, data)
        assert model.cluster_sizes.tolist() == [4, 0]


class TestRelevance:
    def test_hand_scores(self):
        means = np.array([[0.8, 0.2], [0.4, 0.6]])
        weights = np.array([0.5, 0.5])
        params = MixtureParams(means=means, weights=weights)
        lam = 0.6
        table = an.relevance(params, lam=lam)
        marginal = means @ weights
        for i in range(2):
            for j in range(2):
                expected = lam * np.log(means[i, j]) + (1 - lam) * np.log(
                    means[i, j] / marginal[i]
                )
                assert table.scores[i, j] == pytest.approx(expected, abs=1e-12)

    def test_lambda_one_is_frequency_ranking(self):
        rng = np.random.default_rng(5)
        params = random_admissible_model(rng, d=12, k=3)
        table = an.relevance(params, lam=1.0)
        for j in range(3):
            freq_rank = np.argsort(-params.means[:, j], kind="stable")
            assert list(table.top_lists[j]) == [int(i) for i in freq_rank]

    def test_lambda_zero_scores_flat_feature_zero(self):
        # A feature with identical frequency in every cluster has lift 1.
        means = np.array([[0.3, 0.3], [0.7, 0.1]])
        params = MixtureParams(means=means, weights=np.array([0.4, 0.6]))
        table = an.relevance(params, lam=0.0)
        assert table.scores[0, 0] == pytest.approx(0.0, abs=1e-12)
        assert table.scores[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_top_lists_sorted_by_score(self):
        rng = np.random.default_rng(6)
        params = random_admissible_model(rng, d=15, k=4)
        table = an.relevance(params, lam=0.6)
        for j in range(4):
            ordered = [table.scores[i, j] for i in table.top_lists[j]]
            assert all(a >= b - 1e-15 for a, b in zip(ordered, ordered[1:]))

    @pytest.mark.parametrize("lam", [-0.01, 1.01])
    def test_lambda_out_of_range(self, lam):
        params = MixtureParams(means=np.array([[0.5]]), weights=np.array([1.0]))
        with pytest.raises(ParameterError):
            an.relevance(params, lam=lam)


class TestReport:
    @pytest.fixture()
    def small_case(self):
        records = [
            ("p1", ["428", "401", "250"]),
            ("p2", ["428", "401", "272"]),
            ("p3", ["003", "008", "250"]),
            ("p4", ["003", "008", "272"]),
            ("p5", ["428", "401", "250"]),
        ]
        data, vocab = binmix.ingest(
            (rid, codes) for rid, codes in records
        )
        params = MixtureParams(
            means=np.array(
                [
                    # codes sorted: 003, 008, 250, 272, 401, 428
                    [0.01, 0.95],
                    [0.01, 0.95],
                    [0.5, 0.5],
                    [0.4, 0.4],
                    [0.95, 0.01],
                    [0.95, 0.01],
                ]
            ),
            weights=np.array([0.6, 0.4]),
        )
        model = an.assign(params, data)
        return data, vocab, model

    def test_chart_orders_by_frequency_then_code(self, small_case):
        data, vocab, model = small_case
        report = an.build_report(model, data, vocab, top_chart=6, top_heatmap=6)
        chart = report.frequency_chart
        # Global frequencies: 428 3/5, 401 3/5, 250 3/5, 272 2/5, 003 2/5, 008 2/5.
        assert list(chart.features) == ["250", "401", "428", "003", "008", "272"]
        assert chart.global_frequency[:3] == pytest.approx([0.6, 0.6, 0.6])
        assert chart.global_frequency[3:] == pytest.approx([0.4, 0.4, 0.4])

    def test_chart_per_cluster_matches_posterior_mix(self, small_case):
        data, vocab, model = small_case
        report = an.build_report(model, data, vocab, top_chart=6, top_heatmap=6)
        chart = report.frequency_chart
        # Oracle: fraction of each cluster's members carrying the code.
        dense = data.to_dense()
        for pos, code in enumerate(chart.features):
            col = vocab.index[code]
            for j in range(2):
                members = dense[model.assignments == j]
                expected = members[:, col].mean() if len(members) else 0.0
                assert chart.per_cluster[pos, j] == pytest.approx(expected, abs=1e-12)

    def test_heatmap_blocks_partition_rows(self, small_case):
        data, vocab, model = small_case
        report = an.build_report(model, data, vocab, top_chart=6, top_heatmap=6)
        blocks = report.heatmap.blocks
        assert [b.cluster for b in blocks] == [0, 1]
        all_ids = [rid for b in blocks for rid in b.row_ids]
        assert sorted(all_ids) == sorted(data.row_ids)
        for block in blocks:
            for local, rid in enumerate(block.row_ids):
                global_idx = data.row_ids.index(rid)
                assert model.assignments[global_idx] == block.cluster
                dense_row = data.to_dense()[global_idx]
                for pos, code in enumerate(report.heatmap.features):
                    assert block.cells[local, pos] == dense_row[vocab.index[code]]

    def test_empty_cluster_gets_empty_block(self):
        data, vocab = binmix.ingest([("r1", ["111", "222", "333"])], min_codes=3)
        params = MixtureParams(
            means=np.array([[0.9, 0.1], [0.9, 0.1], [0.9, 0.1]]),
            weights=np.array([0.9, 0.1]),
        )
        model = an.assign(params, data)
        report = an.build_report(model, data, vocab, top_chart=3, top_heatmap=3)
        assert model.cluster_sizes.tolist() == [1, 0]
        empty = report.heatmap.blocks[1]
        assert empty.row_ids == ()
        assert empty.cells.shape == (0, 3)

    def test_top_counts_clamped_to_vocabulary(self, small_case):
        data, vocab, model = small_case
        report = an.build_report(model, data, vocab, top_chart=100, top_heatmap=100)
        assert len(report.frequency_chart.features) == len(vocab)
        assert len(report.heatmap.features) == len(vocab)

    @pytest.mark.parametrize("kwargs", [{"top_chart": 0}, {"top_heatmap": -1}])
    def test_rejects_nonpositive_tops(self, small_case, kwargs):
        data, vocab, model = small_case
        with pytest.raises(ParameterError):
            an.build_report(model, data, vocab, **kwargs)

    def test_payload_is_json_ready_and_rounded(self, small_case):
        import json

        data, vocab, model = small_case
        payload = an.report_payload(model, data, vocab, lam=0.6)
        text = json.dumps(payload)  # must not raise
        assert json.loads(text) == payload
        assert payload["n_rows"] == 5
        assert payload["sizes"] == [int(s) for s in model.cluster_sizes]
        for value in payload["frequency_chart"]["global_frequency"]:
            assert value == float(f"{value:.12g}")
        rel = payload["relevance"]
        assert rel["lambda"] == 0.6
        table = an.relevance(model.params, 0.6)
        for cluster_entry in rel["clusters"]:
            j = cluster_entry["cluster"]
            for rank, item in enumerate(cluster_entry["items"]):
                i = table.top_lists[j][rank]
                assert item["code"] == vocab.codes[i]
                assert item["score"] == float(f"{table.scores[i, j]:.12g}")
                assert item["frequency"] == float(f"{model.params.means[i, j]:.12g}")

    def test_payload_deterministic(self, small_case):
        import json

        data, vocab, model = small_case
        a = json.dumps(an.report_payload(model, data, vocab), sort_keys=True)
        b = json.dumps(an.report_payload(model, data, vocab), sort_keys=True)
        assert a == b


class TestAdjustedRandIndex:
    def test_frozen_examples(self):
        # Values produced by the pair-enumeration oracle.
        assert an.adjusted_rand_index([0, 0, 1, 1], [0, 0, 1, 2]) == pytest.approx(
            0.5714285714285715
        )
        assert an.adjusted_rand_index(
            [0, 0, 0, 1, 1, 1], [0, 0, 1, 1, 2, 2]
        ) == pytest.approx(0.24242424242424246)
        assert an.adjusted_rand_index([0, 0, 1, 1], [0, 1, 2, 3]) == pytest.approx(0.0)

    def test_perfect_and_permuted(self):
        labels = [0, 1, 2, 0, 1, 2, 1]
        assert an.adjusted_rand_index(labels, labels) == 1.0
        relabeled = [{0: 2, 1: 0, 2: 1}[v] for v in labels]
        assert an.adjusted_rand_index(labels, relabeled) == 1.0

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            n = int(rng.integers(2, 40))
            a = rng.integers(0, 4, size=n)
            b = rng.integers(0, 3, size=n)
            assert an.adjusted_rand_index(a, b) == pytest.approx(
                pair_counting_ari(a, b), abs=1e-12
            )

    def test_degenerate_single_cluster_both_sides(self):
        assert an.adjusted_rand_index([0, 0, 0], [5, 5, 5]) == 1.0

    def test_all_singletons_both_sides(self):
        assert an.adjusted_rand_index([0, 1, 2], [2, 1, 0]) == 1.0

    def test_independent_labelings_score_near_zero(self):
        rng = np.random.default_rng(10)
        a = rng.integers(0, 3, size=2000)
        b = rng.integers(0, 3, size=2000)
        assert abs(an.adjusted_rand_index(a, b)) < 0.05

    def test_errors(self):
        with pytest.raises(ParameterError):
            an.adjusted_rand_index([0, 1], [0])
        with pytest.raises(ParameterError):
            an.adjusted_rand_index([0], [0])
        with pytest.raises(ParameterError):
            an.adjusted_rand_index([[0, 1]], [[0, 1]])


class TestStability:
    def test_duplicate_split_gives_perfect_agreement(self):
        data, _ = binmix.generate_synthetic(12, 3, 400, seed=3)
        everything = np.arange(data.n_rows)
        split = SplitPair(
            subset_a=everything, subset_b=everything, intersection=everything
        )
        ari = an.stability_check(data, 3, split=split)
        assert ari == 1.0

    def test_separable_data_is_stable(self):
        params = separable_model(20, 3, seed=21)
        data, _ = binmix.sample_from_params(params, 4000, 22)
        ari = an.stability_check(data, 3, overlap=0.5, seed=1)
        assert ari > 0.9

    def test_infeasible_k_propagates(self):
        data, _ = binmix.generate_synthetic(4, 2, 60, seed=0)
        with pytest.raises(RankInfeasibleError):
            an.stability_check(data, 10)

    def test_bad_overlap(self):
        data, _ = binmix.generate_synthetic(4, 2, 60, seed=0)
        with pytest.raises(ParameterError):
            an.stability_check(data, 2, overlap=1.5)


class TestKmeansBaseline:
    def test_shape_and_range(self):
        data, _ = binmix.generate_synthetic(8, 3, 200, seed=1)
        labels = an.kmeans_baseline(data, 3, seed=0)
        assert labels.shape == (200,)
        assert set(np.unique(labels)) <= {0, 1, 2}

    def test_deterministic_given_seed(self):
        data, _ = binmix.generate_synthetic(8, 3, 200, seed=1)
        a = an.kmeans_baseline(data, 3, seed=5)
        b = an.kmeans_baseline(data, 3, seed=5)
        assert np.array_equal(a, b)

    def test_recovers_separable_clusters(self):
        params = separable_model(15, 3, seed=2)
        data, labels = binmix.sample_from_params(params, 1500, 3)
        predicted = an.kmeans_baseline(data, 3, seed=0)
        assert an.adjusted_rand_index(predicted, labels) > 0.5

    def test_k_larger_than_n_raises(self):
        data, _ = binmix.generate_synthetic(4, 2, 5, seed=0)
        with pytest.raises(ParameterError):
            an.kmeans_baseline(data, 6)
