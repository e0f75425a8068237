#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for centroid geometry."""
import unittest

import numpy as np

from pymaui.embeddingstore import ALL, build_haystack, sample_queries
from pymaui.exceptions import DataError, DegenerateCentroidError
from pymaui.geometry import (
    binned_curve,
    centroid,
    centroid_distances,
    distance_histogram,
    distance_to_centroid,
    geometry_report,
    mean_rank_per_author,
    min_max_normalize,
    spearman,
)
from pymaui.ranking import MODE_FULL, MODE_TOP_K, RankTable, rank_batch
from pymaui.synth import generate
from tests.store_factory import authors, isotropic_spec, query, unit


class TestCentroid(unittest.TestCase):
    def test_mean(self):
        c = centroid(authors([[1, 0], [0, 1]]))
        np.testing.assert_allclose(c, [0.5, 0.5])

    def test_singleton(self):
        c = centroid(authors([[0.6, 0.8]]))
        np.testing.assert_allclose(c, [0.6, 0.8])

    def test_cancellation_is_degenerate(self):
        c = centroid(authors([[1, 0], [-1, 0]]))
        np.testing.assert_allclose(c, [0.0, 0.0])

        with self.assertRaises(DegenerateCentroidError) as ctx:
            distance_to_centroid(unit([1, 0]), c)
        self.assertIn("degenerate centroid", str(ctx.exception))

    def test_empty(self):
        with self.assertRaises(DataError):
            centroid([])


class TestDistance(unittest.TestCase):
    def test_examples(self):
        c = np.array([2.0, 0.0])
        self.assertAlmostEqual(distance_to_centroid(unit([1, 0]), c), 0.0)
        self.assertAlmostEqual(distance_to_centroid(unit([0, 1]), c), 1.0)
        self.assertAlmostEqual(distance_to_centroid(unit([-1, 0]), c), 2.0)

    def test_scale_invariant(self):
        v = unit([0.3, 0.7, -0.2])
        c = np.array([0.5, 0.1, 0.4])
        self.assertAlmostEqual(
            distance_to_centroid(v, c), distance_to_centroid(v, 7.5 * c)
        )

    def test_vectorised_matches_scalar(self):
        rng = np.random.default_rng(0)
        haystack = authors(rng.standard_normal((20, 5)))
        c = centroid(haystack)
        distances = centroid_distances(haystack, c)

        for a, d in zip(haystack, distances):
            self.assertAlmostEqual(distance_to_centroid(a.vector, c), d)
            self.assertTrue(0.0 <= d <= 2.0)


class TestNormalize(unittest.TestCase):
    def test_examples(self):
        np.testing.assert_allclose(min_max_normalize([2, 4, 6]), [0, 0.5, 1])
        np.testing.assert_allclose(min_max_normalize([5, 5]), [0, 0])

    def test_extremes_are_exact(self):
        values = min_max_normalize([0.31, 0.77, 0.12, 1.93])
        self.assertEqual(values.min(), 0.0)
        self.assertEqual(values.max(), 1.0)

    def test_empty(self):
        with self.assertRaises(DataError):
            min_max_normalize([])


class TestMeanRank(unittest.TestCase):
    def test_from_table(self):
        table = RankTable(
            ["a", "b", "c"], ["q0", "q1"], ["a", "b"],
            np.array([[1, 2, 3], [3, 1, 2]], dtype=np.int32),
        )
        self.assertEqual(
            mean_rank_per_author(table), {"a": 2.0, "b": 1.5, "c": 2.5}
        )
        self.assertEqual(
            mean_rank_per_author(table, exclude_self=True),
            {"a": 3.0, "b": 2.0, "c": 2.5},
        )

    def test_top_k_slices_rejected(self):
        rng = np.random.default_rng(1)
        haystack = authors(rng.standard_normal((5, 3)))
        queries = [
            query(rng.standard_normal(3), a.author_id, "q%d" % i)
            for i, a in enumerate(haystack)
        ]
        slices = rank_batch(queries, haystack, MODE_TOP_K, k=2)

        with self.assertRaises(DataError):
            mean_rank_per_author(slices)

    def test_random_permutations(self):
        rng = np.random.default_rng(2)
        n_haystack, n_queries = 40, 4000
        ranks = np.array(
            [rng.permutation(n_haystack) + 1 for _ in range(n_queries)],
            dtype=np.int32,
        )
        ids = ["a%02d" % j for j in range(n_haystack)]
        table = RankTable(ids, ["q%d" % i for i in range(n_queries)],
                          [ids[0]] * n_queries, ranks)
        table.check_permutations()

        means = mean_rank_per_author(table)
        middle = (n_haystack + 1) / 2
        self.assertAlmostEqual(
            sum(means.values()) / n_haystack, middle, places=9
        )
        for value in means.values():
            # standard error is about 0.18
            self.assertLess(abs(value - middle), 1.0)


class TestBinnedCurve(unittest.TestCase):
    def test_two_bins(self):
        curve = binned_curve([0.1, 0.9], [10, 100], 2)
        self.assertEqual(
            [(b.center, b.mean, b.count) for b in curve],
            [(0.25, 10.0, 1), (0.75, 100.0, 1)],
        )

    def test_empty_bins(self):
        curve = binned_curve([0.0, 0.01, 0.02], [1, 2, 3], 4)
        self.assertEqual([b.count for b in curve], [3, 0, 0, 0])
        self.assertEqual(curve[0].mean, 2.0)
        self.assertIsNone(curve[1].mean)

    def test_upper_edge_in_last_bin(self):
        curve = binned_curve([1.0], [5], 20)
        self.assertEqual(curve[-1].count, 1)

    def test_constant_function(self):
        rng = np.random.default_rng(3)
        curve = binned_curve(rng.random(200), [7.5] * 200, 10)
        for b in curve:
            if b.count:
                self.assertEqual(b.mean, 7.5)

    def test_length_mismatch(self):
        with self.assertRaises(DataError):
            binned_curve([0.1, 0.2], [1], 2)


class TestSpearman(unittest.TestCase):
    def test_monotone(self):
        self.assertAlmostEqual(spearman([1, 2, 3, 4], [10, 20, 30, 40]), 1.0)
        self.assertAlmostEqual(spearman([1, 2, 3, 4], [4, 3, 2, 1]), -1.0)

    def test_hand_computed(self):
        self.assertAlmostEqual(spearman([1, 2, 3, 4], [2, 1, 4, 3]), 0.6)

    def test_ties(self):
        # midranks [1.5, 1.5, 3] against [1, 2, 3]
        self.assertAlmostEqual(
            spearman([1, 1, 2], [1, 2, 3]), 0.8660254037844387
        )

    def test_zero_variance(self):
        with self.assertRaises(DataError):
            spearman([1, 1, 1], [1, 2, 3])

    def test_too_short(self):
        with self.assertRaises(DataError):
            spearman([1, 2], [1, 2])


class TestHistogram(unittest.TestCase):
    def test_all_zero(self):
        histogram = distance_histogram([0.0] * 5, 4)
        self.assertEqual([n for _, n in histogram], [5, 0, 0, 0])
        self.assertEqual([c for c, _ in histogram], [0.25, 0.75, 1.25, 1.75])

    def test_counts_preserved(self):
        rng = np.random.default_rng(4)
        values = rng.uniform(0, 2, size=2000)
        histogram = distance_histogram(values, 20)

        counts = np.array([n for _, n in histogram])
        self.assertEqual(counts.sum(), 2000)
        # roughly uniform: every bin within 5 standard deviations of 100
        self.assertTrue(np.all(np.abs(counts - 100) < 5 * np.sqrt(95)))

    def test_two_in_last_bin(self):
        histogram = distance_histogram([2.0], 20)
        self.assertEqual(histogram[-1][1], 1)

    def test_empty(self):
        with self.assertRaises(DataError):
            distance_histogram([], 20)


class TestGeometryReport(unittest.TestCase):
    def test_isotropic_population(self):
        store = generate(isotropic_spec(n_authors=300, seed=5))
        haystack = build_haystack(store)
        queries = sample_queries(
            store, store.query_author_ids, 1, ALL, seed=5
        )
        table = rank_batch(queries, haystack, MODE_FULL)
        report = geometry_report(haystack, table)

        self.assertEqual(len(report.authors), 300)
        self.assertEqual(report.correlation.n, 300)
        self.assertGreater(report.correlation.coefficient, 0.5)

        normalized = [a.normalized_distance for a in report.authors]
        self.assertEqual(min(normalized), 0.0)
        self.assertEqual(max(normalized), 1.0)
        self.assertEqual(sum(b.count for b in report.curve), 300)
        self.assertEqual(sum(n for _, n in report.histogram), 300)
        self.assertAlmostEqual(
            np.mean([a.mean_rank for a in report.authors]), 301 / 2
        )

        data = report.to_dict()
        self.assertEqual(len(data["curve"]), 20)
        self.assertIn("spearman", data)

    def undefined_correlation(self, vectors):
        haystack = authors(vectors)
        queries = [
            query(v, "a%d" % i, "q%d" % i) for i, v in enumerate(vectors)
        ]
        table = rank_batch(queries, haystack, MODE_FULL)

        with self.assertLogs("pymaui", "WARNING") as logs:
            report = geometry_report(haystack, table)
        self.assertIn("no correlation reported", logs.output[0])
        return report

    def test_two_authors_have_no_correlation(self):
        report = self.undefined_correlation([[1, 0], [0.6, 0.8]])

        self.assertIsNone(report.correlation.coefficient)
        self.assertEqual(report.correlation.n, 2)
        self.assertIsNone(report.to_dict()["spearman"]["coefficient"])

    def test_equidistant_authors_have_no_correlation(self):
        report = self.undefined_correlation(np.eye(4))

        self.assertIsNone(report.correlation.coefficient)
        self.assertEqual([a.distance for a in report.authors], [0.5] * 4)
        self.assertEqual(sum(b.count for b in report.curve), 4)


if __name__ == "__main__":
    unittest.main()
