"""
Exact cosine-similarity ranking of haystack authors for each query.

Ties in similarity are broken by ascending author_id. Queries are ranked in
fixed-size chunks so the arithmetic performed for a query does not depend on
how many worker threads are used.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from pymaui.embeddingstore import AuthorEmbedding, QueryEmbedding
from pymaui.exceptions import ConfigError, DataError, InvariantError

logger = logging.getLogger(__name__)

MODE_FULL = "full"
MODE_TOP_K = "top_k"
MODES = (MODE_FULL, MODE_TOP_K)

DEFAULT_CHUNK_SIZE = 256


@dataclass(frozen=True)
class TopKSlice:
    query_id: str
    true_author_id: str
    author_ids: Tuple[str, ...]
    scores: Tuple[float, ...]
    # rank of the true author in the full ranking, None if not in haystack
    needle_rank: Optional[int] = None


@dataclass(frozen=True)
class RankSums:
    """Per-author sums of ranks over queries, accumulated without a table."""

    haystack_ids: Tuple[str, ...]
    sums: np.ndarray
    counts: np.ndarray

    @property
    def n_haystack(self) -> int:
        return len(self.haystack_ids)


class RankTable:
    """
    Dense ranks of every haystack author for every query.

    ``ranks[i, j]`` is the rank of ``haystack_ids[j]`` for query ``i``;
    haystack ids are sorted ascending.
    """

    def __init__(
        self,
        haystack_ids: Sequence[str],
        query_ids: Sequence[str],
        true_author_ids: Sequence[str],
        ranks: np.ndarray,
    ) -> None:
        self.haystack_ids = tuple(haystack_ids)
        self.query_ids = tuple(query_ids)
        self.true_author_ids = tuple(true_author_ids)
        self.ranks = ranks
        self._column = {a: j for j, a in enumerate(self.haystack_ids)}

    @property
    def n_haystack(self) -> int:
        return len(self.haystack_ids)

    @property
    def n_queries(self) -> int:
        return len(self.query_ids)

    def column(self, author_id: str) -> int:
        try:
            return self._column[author_id]
        except KeyError:
            raise DataError("author %s is not in the haystack" % author_id)

    def needle_ranks(self) -> np.ndarray:
        """Rank of each query's true author, in query order."""
        columns = [self.column(a) for a in self.true_author_ids]
        return self.ranks[np.arange(self.n_queries), columns].astype(np.int64)

    def needle_records(self) -> List[Tuple[str, int]]:
        return list(zip(self.true_author_ids, self.needle_ranks().tolist()))

    def rank_sums(self, exclude_self: bool = False) -> RankSums:
        ranks = self.ranks.astype(np.int64)
        counts = np.full(self.n_haystack, self.n_queries, dtype=np.int64)

        if exclude_self:
            ranks = ranks.copy()
            for i, author_id in enumerate(self.true_author_ids):
                j = self._column.get(author_id)
                if j is not None:
                    ranks[i, j] = 0
                    counts[j] -= 1

        return RankSums(self.haystack_ids, ranks.sum(axis=0), counts)

    def check_permutations(self) -> None:
        """Raise InvariantError unless every row is a permutation of 1..N_h."""
        n = self.n_haystack
        expected = np.arange(1, n + 1)

        if self.ranks.shape != (self.n_queries, n):
            raise InvariantError(
                "rank table has shape %s" % (self.ranks.shape,)
            )

        row_sums = self.ranks.astype(np.int64).sum(axis=1)
        if np.any(row_sums != n * (n + 1) // 2):
            raise InvariantError("rank row sum differs from N_h(N_h+1)/2")

        if not np.array_equal(np.sort(self.ranks, axis=1),
                              np.broadcast_to(expected, self.ranks.shape)):
            raise InvariantError("rank row is not a permutation of 1..N_h")

    def __repr__(self):
        return "<%s queries=%d haystack=%d>" % (
            self.__class__.__name__,
            self.n_queries,
            self.n_haystack,
        )


class HaystackMatrix:
    """Distinct haystack vectors plus the map from author column to row."""

    def __init__(self, unique: np.ndarray, inverse: np.ndarray) -> None:
        self.unique = unique
        self.inverse = inverse

    @property
    def dimension(self) -> int:
        return int(self.unique.shape[1])

    def similarities(self, query_matrix: np.ndarray) -> np.ndarray:
        """Float64 similarity of each query row to each author column."""
        return (query_matrix @ self.unique.T)[:, self.inverse]


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two unit vectors (their dot product)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)

    if a.shape != b.shape:
        raise DataError("dimension mismatch: %s vs %s" % (a.shape, b.shape))

    return float(np.clip(np.dot(a, b), -1.0, 1.0))


def _prepare_haystack(haystack: Sequence[AuthorEmbedding]):
    if len(haystack) == 0:
        raise DataError("empty haystack")

    ids = [author.author_id for author in haystack]
    if len(set(ids)) != len(ids):
        raise DataError("duplicate author id in haystack")

    order = sorted(range(len(ids)), key=ids.__getitem__)
    matrix = np.asarray(
        [haystack[i].vector for i in order], dtype=np.float64
    )
    # identical vectors share one similarity computation so their ties are
    # exact whatever blocking the matrix product uses
    unique, inverse = np.unique(matrix, axis=0, return_inverse=True)
    haystack_matrix = HaystackMatrix(unique, inverse.reshape(-1))
    return tuple(ids[i] for i in order), haystack_matrix, np.asarray(order)


def _query_matrix(queries: Sequence[QueryEmbedding], dimension: int):
    if len(queries) == 0:
        raise DataError("no queries to rank")

    matrix = np.asarray([q.vector for q in queries], dtype=np.float64)

    if matrix.ndim != 2 or matrix.shape[1] != dimension:
        raise DataError(
            "query dimension does not match haystack dimension %d" % dimension
        )

    return matrix


def _dense_ranks(sims: np.ndarray) -> np.ndarray:
    # stable sort over ascending-id columns breaks ties by author_id
    order = np.argsort(-sims, axis=1, kind="stable")
    ranks = np.empty(order.shape, dtype=np.int32)
    rows = np.arange(sims.shape[0])[:, None]
    ranks[rows, order] = np.arange(1, sims.shape[1] + 1, dtype=np.int32)
    return ranks


def _top_order(row: np.ndarray, k: int) -> np.ndarray:
    negated = -row

    if k >= row.size:
        return np.argsort(negated, kind="stable")

    kth = np.partition(negated, k - 1)[k - 1]
    candidates = np.flatnonzero(negated <= kth)
    ranked = candidates[np.argsort(negated[candidates], kind="stable")]
    return ranked[:k]


def _needle_rank(row: np.ndarray, column: int) -> int:
    score = row[column]
    return int(
        1 + np.count_nonzero(row > score)
        + np.count_nonzero(row[:column] == score)
    )


def rank_query(
    query: QueryEmbedding, haystack: Sequence[AuthorEmbedding]
) -> np.ndarray:
    """
    Rank every haystack author for one query.

    :return: int array aligned with ``haystack`` as given; rank 1 is the most
             similar author
    """
    ids, matrix, order = _prepare_haystack(haystack)
    sims = matrix.similarities(_query_matrix([query], matrix.dimension))
    sorted_ranks = _dense_ranks(sims)[0]

    ranks = np.empty_like(sorted_ranks)
    ranks[order] = sorted_ranks
    return ranks


def _chunks(n: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]


def _map_chunks(worker, chunks, threads: int):
    if threads <= 1 or len(chunks) <= 1:
        return [worker(chunk) for chunk in chunks]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(worker, chunks))


def rank_batch(
    queries: Sequence[QueryEmbedding],
    haystack: Sequence[AuthorEmbedding],
    mode: str = MODE_FULL,
    k: Optional[int] = None,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> Union[RankTable, List[TopKSlice]]:
    """
    Rank the haystack for many queries.

    In MODE_FULL a RankTable is returned. In MODE_TOP_K only the first
    ``k`` authors of each ranking (plus the needle's rank) are kept, so
    memory stays bounded by ``chunk_size * N_h``.
    Output is identical for any number of ``threads``.
    """
    if mode not in MODES:
        raise ConfigError("unknown ranking mode %r" % mode)
    if mode == MODE_TOP_K and (k is None or k < 1):
        raise ConfigError("top_k mode needs k >= 1")
    if chunk_size < 1:
        raise ConfigError("chunk_size must be positive")

    ids, matrix, _ = _prepare_haystack(haystack)
    query_matrix = None
    if queries:
        query_matrix = _query_matrix(queries, matrix.dimension)
    column = {a: j for j, a in enumerate(ids)}
    chunks = _chunks(len(queries), chunk_size)

    logger.debug(
        "ranking %d queries against %d authors in %d chunks (%s, %d threads)",
        len(queries),
        len(ids),
        len(chunks),
        mode,
        threads,
    )

    if mode == MODE_FULL:
        ranks = np.empty((len(queries), len(ids)), dtype=np.int32)

        def full_worker(chunk):
            start, stop = chunk
            sims = matrix.similarities(query_matrix[start:stop])
            ranks[start:stop] = _dense_ranks(sims)

        _map_chunks(full_worker, chunks, threads)

        return RankTable(
            ids,
            [q.query_id for q in queries],
            [q.true_author_id for q in queries],
            ranks,
        )

    def top_k_worker(chunk):
        start, stop = chunk
        sims = matrix.similarities(query_matrix[start:stop])
        slices = []

        for offset, row in enumerate(sims):
            query = queries[start + offset]
            top = _top_order(row, k)
            needle = column.get(query.true_author_id)
            slices.append(
                TopKSlice(
                    query_id=query.query_id,
                    true_author_id=query.true_author_id,
                    author_ids=tuple(ids[j] for j in top),
                    scores=tuple(float(row[j]) for j in top),
                    needle_rank=(
                        None if needle is None else _needle_rank(row, needle)
                    ),
                )
            )

        return slices

    results = _map_chunks(top_k_worker, chunks, threads)
    return [s for chunk_slices in results for s in chunk_slices]


def rank_sums(
    queries: Sequence[QueryEmbedding],
    haystack: Sequence[AuthorEmbedding],
    exclude_self: bool = False,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> RankSums:
    """Per-author rank sums over all queries, one chunk in memory at a time."""
    ids, matrix, _ = _prepare_haystack(haystack)
    query_matrix = _query_matrix(queries, matrix.dimension)
    column = {a: j for j, a in enumerate(ids)}

    def worker(chunk):
        start, stop = chunk
        ranks = _dense_ranks(matrix.similarities(query_matrix[start:stop]))
        ranks = ranks.astype(np.int64)
        counts = np.full(len(ids), stop - start, dtype=np.int64)

        if exclude_self:
            for offset in range(stop - start):
                j = column.get(queries[start + offset].true_author_id)
                if j is not None:
                    ranks[offset, j] = 0
                    counts[j] -= 1

        return ranks.sum(axis=0), counts

    partials = _map_chunks(worker, _chunks(len(queries), chunk_size), threads)
    sums = np.zeros(len(ids), dtype=np.int64)
    counts = np.zeros(len(ids), dtype=np.int64)
    for partial_sums, partial_counts in partials:
        sums += partial_sums
        counts += partial_counts

    return RankSums(ids, sums, counts)


def reciprocal_rank(
    ranks: Sequence[int], true_author_id: str, haystack_ids: Sequence[str]
) -> float:
    """
    1 / rank of the true author in one ranking row.

    :param ranks: rank of each author in ``haystack_ids``
    """
    try:
        position = list(haystack_ids).index(true_author_id)
    except ValueError:
        raise DataError(
            "true author %s is not in the haystack" % true_author_id
        )

    return 1.0 / int(ranks[position])


def needle_records(slices: Sequence[TopKSlice]) -> List[Tuple[str, int]]:
    """(true_author_id, needle rank) pairs from top-k slices."""
    records = []
    for s in slices:
        if s.needle_rank is None:
            raise DataError(
                "true author of query %s is not in the haystack" % s.query_id
            )
        records.append((s.true_author_id, s.needle_rank))
    return records
