#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for exact cosine ranking."""
import unittest

import numpy as np

from pymaui.embeddingstore import AuthorEmbedding, QueryEmbedding
from pymaui.exceptions import ConfigError, DataError, InvariantError
from pymaui.ranking import (
    MODE_FULL,
    MODE_TOP_K,
    RankTable,
    rank_batch,
    rank_query,
    rank_sums,
    reciprocal_rank,
    similarity,
)
from tests.store_factory import authors, query, unit


def oracle_ranks(query_vector, haystack):
    """Naive full sort by (-similarity, author_id)."""
    scored = sorted(
        haystack,
        key=lambda a: (-float(np.dot(query_vector, a.vector)), a.author_id),
    )
    position = {a.author_id: r for r, a in enumerate(scored, start=1)}
    return np.array([position[a.author_id] for a in haystack])


def random_instance(rng, n_haystack, dimension, n_duplicates):
    vectors = rng.standard_normal((n_haystack, dimension))
    # copy some rows onto others to force exact ties
    for _ in range(n_duplicates):
        source, target = rng.integers(0, n_haystack, size=2)
        vectors[target] = vectors[source]

    ids = ["x%04d" % i for i in rng.permutation(n_haystack)]
    haystack = [
        AuthorEmbedding(author_id, unit(v), 1)
        for author_id, v in zip(ids, vectors)
    ]
    return haystack


def random_queries(rng, haystack, n_queries, dimension):
    queries = []
    for i in range(n_queries):
        true_author = haystack[rng.integers(0, len(haystack))]
        if i % 3 == 0:
            # a query identical to an author vector
            vector = true_author.vector
        else:
            vector = unit(rng.standard_normal(dimension))
        queries.append(
            QueryEmbedding("q%d" % i, true_author.author_id, vector, ())
        )
    return queries


class TestSimilarity(unittest.TestCase):
    def test_similarity(self):
        self.assertAlmostEqual(similarity(unit([1, 1]), unit([1, 1])), 1.0)
        self.assertAlmostEqual(similarity([1.0, 0.0], [0.0, 1.0]), 0.0)
        self.assertAlmostEqual(similarity([1.0, 0.0], [-1.0, 0.0]), -1.0)

    def test_dimension_mismatch(self):
        with self.assertRaises(DataError):
            similarity([1.0, 0.0], [1.0, 0.0, 0.0])


class TestRankQuery(unittest.TestCase):
    def test_simple_order(self):
        haystack = authors([[1, 0], [0, 1], [1, 1]])
        ranks = rank_query(query([1, 0.1]), haystack)
        self.assertEqual(list(ranks), [1, 3, 2])

    def test_ties_broken_by_author_id(self):
        haystack = [
            AuthorEmbedding("b", unit([1, 0]), 1),
            AuthorEmbedding("a", unit([1, 0]), 1),
            AuthorEmbedding("c", unit([0, 1]), 1),
        ]
        ranks = rank_query(query([1, 0], "c"), haystack)
        self.assertEqual(list(ranks), [2, 1, 3])

    def test_single_author(self):
        ranks = rank_query(query([1, 0]), authors([[0, 1]]))
        self.assertEqual(list(ranks), [1])

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(2024)

        for _ in range(50):
            n_haystack = int(rng.integers(2, 501))
            dimension = int(rng.integers(2, 65))
            haystack = random_instance(
                rng, n_haystack, dimension, n_duplicates=n_haystack // 10
            )
            for q in random_queries(rng, haystack, 3, dimension):
                np.testing.assert_array_equal(
                    rank_query(q, haystack), oracle_ranks(q.vector, haystack)
                )

    def test_empty_haystack(self):
        with self.assertRaises(DataError):
            rank_query(query([1, 0]), [])

    def test_duplicate_ids(self):
        haystack = [
            AuthorEmbedding("a", unit([1, 0]), 1),
            AuthorEmbedding("a", unit([0, 1]), 1),
        ]
        with self.assertRaises(DataError):
            rank_query(query([1, 0]), haystack)

    def test_dimension_mismatch(self):
        with self.assertRaises(DataError):
            rank_query(query([1, 0, 0]), authors([[1, 0], [0, 1]]))


class TestRankBatch(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(7)
        self.haystack = random_instance(rng, 120, 16, n_duplicates=10)
        self.queries = random_queries(rng, self.haystack, 70, 16)

    def test_full_table_is_permutation(self):
        table = rank_batch(self.queries, self.haystack, MODE_FULL)

        self.assertIsInstance(table, RankTable)
        self.assertEqual(table.ranks.shape, (70, 120))
        self.assertEqual(list(table.haystack_ids),
                         sorted(a.author_id for a in self.haystack))
        table.check_permutations()

        n = table.n_haystack
        np.testing.assert_array_equal(
            table.ranks.sum(axis=1), np.full(70, n * (n + 1) // 2)
        )

    def test_full_matches_rank_query(self):
        table = rank_batch(self.queries, self.haystack, MODE_FULL)

        for i, q in enumerate(self.queries[:10]):
            ranks = rank_query(q, self.haystack)
            for author, rank in zip(self.haystack, ranks):
                self.assertEqual(
                    table.ranks[i, table.column(author.author_id)], rank
                )

    def test_top_k_is_prefix_of_full(self):
        table = rank_batch(self.queries, self.haystack, MODE_FULL)
        slices = rank_batch(self.queries, self.haystack, MODE_TOP_K, k=7)

        for i, s in enumerate(slices):
            self.assertEqual(s.query_id, self.queries[i].query_id)
            self.assertEqual(len(s.author_ids), 7)
            self.assertEqual(
                [table.ranks[i, table.column(a)] for a in s.author_ids],
                list(range(1, 8)),
            )
            self.assertEqual(
                list(s.scores), sorted(s.scores, reverse=True)
            )
            self.assertEqual(s.needle_rank, table.needle_ranks()[i])

    def test_threads_do_not_change_output(self):
        one = rank_batch(
            self.queries, self.haystack, MODE_FULL, threads=1, chunk_size=16
        )
        eight = rank_batch(
            self.queries, self.haystack, MODE_FULL, threads=8, chunk_size=16
        )
        np.testing.assert_array_equal(one.ranks, eight.ranks)

        one = rank_batch(self.queries, self.haystack, MODE_TOP_K, k=5,
                         threads=1, chunk_size=16)
        eight = rank_batch(self.queries, self.haystack, MODE_TOP_K, k=5,
                           threads=8, chunk_size=16)
        self.assertEqual(one, eight)

    def test_k_larger_than_haystack(self):
        slices = rank_batch(self.queries[:2], self.haystack[:4],
                            MODE_TOP_K, k=10)
        self.assertEqual(len(slices[0].author_ids), 4)

    def test_top_k_needs_k(self):
        with self.assertRaises(ConfigError):
            rank_batch(self.queries, self.haystack, MODE_TOP_K)

    def test_unknown_mode(self):
        with self.assertRaises(ConfigError):
            rank_batch(self.queries, self.haystack, "approximate")

    def test_rank_sums_match_table(self):
        table = rank_batch(self.queries, self.haystack, MODE_FULL)

        for exclude_self in (False, True):
            streamed = rank_sums(self.queries, self.haystack,
                                 exclude_self=exclude_self, chunk_size=9)
            dense = table.rank_sums(exclude_self=exclude_self)

            self.assertEqual(streamed.haystack_ids, dense.haystack_ids)
            np.testing.assert_array_equal(streamed.sums, dense.sums)
            np.testing.assert_array_equal(streamed.counts, dense.counts)

    def test_check_permutations_detects_damage(self):
        table = rank_batch(self.queries, self.haystack, MODE_FULL)
        table.ranks[0, 0], table.ranks[0, 1] = 1, 1

        with self.assertRaises(InvariantError):
            table.check_permutations()

    def test_reciprocal_rank(self):
        ids = ["a", "b", "c"]
        self.assertEqual(reciprocal_rank([3, 1, 2], "c", ids), 0.5)
        with self.assertRaises(DataError):
            reciprocal_rank([3, 1, 2], "z", ids)


if __name__ == "__main__":
    unittest.main()
