"""
Effectiveness metrics (R@k, MRR) and the misattribution unfairness suite.

For a haystack of N_h authors and N_q queries, an author is expected to
appear in the top k of ``E_k = ceil(k * N_q / N_h)`` queries under random
rankings. MAUI_k sums how far each author's top-k count c_j^k exceeds E_k
and divides by the worst case, where the same k authors fill the top k of
every query::

    MAUI_k = sum_j max(0, c_j^k - E_k) / (k * (N_q - E_k))

0 is most fair, 1 least fair.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from pymaui.exceptions import (
    ConfigError,
    DataError,
    DegenerateConfigurationError,
    InvariantError,
)
from pymaui.ranking import RankTable, TopKSlice

logger = logging.getLogger(__name__)

DEFAULT_KS = (5, 10, 15, 20)
DEFAULT_MULTIPLIERS = (2.0, 4.0, 5.0)
DEFAULT_EXCEED_K = 10
DEFAULT_RECALL_K = 8

RISK_RETRIEVED = "retrieved"
RISK_ALL = "all"
RISK_POPULATIONS = (RISK_RETRIEVED, RISK_ALL)

# number of highest-risk authors listed in a report
TOP_RISK_AUTHORS = 10


def expected_count(k: int, n_haystack: int, n_queries: int) -> int:
    """E_k = ceil(k * N_q / N_h), in integer arithmetic."""
    for name, value in (("k", k), ("N_h", n_haystack), ("N_q", n_queries)):
        if int(value) != value or value < 1:
            raise DataError("%s must be a positive integer, got %r"
                            % (name, value))

    if k > n_haystack:
        raise DataError("k=%d exceeds haystack size %d" % (k, n_haystack))

    return -(-(k * n_queries) // n_haystack)


@dataclass(frozen=True)
class TopKTally:
    """c_j^k for every haystack author."""

    k: int
    n_haystack: int
    n_queries: int
    counts: Dict[str, int]

    def __post_init__(self):
        if len(self.counts) != self.n_haystack:
            raise InvariantError(
                "tally has %d authors, haystack has %d"
                % (len(self.counts), self.n_haystack)
            )

        for author_id, count in self.counts.items():
            if count < 0 or count > self.n_queries:
                raise InvariantError(
                    "c_%s=%d outside [0, N_q=%d]"
                    % (author_id, count, self.n_queries)
                )

        if sum(self.counts.values()) > self.k * self.n_queries:
            raise InvariantError("tally exceeds k * N_q appearances")

    @property
    def expected(self) -> int:
        return expected_count(self.k, self.n_haystack, self.n_queries)

    def values(self) -> np.ndarray:
        """Counts ordered by author_id."""
        return np.asarray(
            [self.counts[a] for a in sorted(self.counts)], dtype=np.int64
        )

    def merge(self, other: "TopKTally") -> "TopKTally":
        """Tally over the union of both query sets."""
        if (self.k, self.n_haystack) != (other.k, other.n_haystack) or set(
            self.counts
        ) != set(other.counts):
            raise DataError("cannot merge tallies of different shapes")

        return TopKTally(
            self.k,
            self.n_haystack,
            self.n_queries + other.n_queries,
            {a: c + other.counts[a] for a, c in self.counts.items()},
        )


def tally_topk(
    slices: Sequence[TopKSlice],
    k: int,
    haystack_ids: Sequence[str],
    include_self_hits: bool = False,
) -> TopKTally:
    """
    Count how often each author is in the top k of queries.

    A query's own true author is not counted unless ``include_self_hits``.
    """
    counts = OrderedDict((a, 0) for a in sorted(haystack_ids))
    needed = min(k, len(counts))

    for s in slices:
        if len(s.author_ids) < needed:
            raise DataError(
                "slice for query %s has %d entries, %d needed"
                % (s.query_id, len(s.author_ids), needed)
            )

        for author_id in s.author_ids[:k]:
            if author_id not in counts:
                raise DataError(
                    "slice author %s is not in the haystack" % author_id
                )
            if author_id == s.true_author_id and not include_self_hits:
                continue
            counts[author_id] += 1

    return TopKTally(k, len(counts), len(slices), dict(counts))


def maui(tally: TopKTally) -> float:
    """
    Misattribution Unfairness Index of a tally.

    :raises DegenerateConfigurationError: when N_q <= E_k
    """
    expected = tally.expected

    if tally.n_queries <= expected:
        raise DegenerateConfigurationError(
            "degenerate configuration: N_q=%d <= E_%d=%d"
            % (tally.n_queries, tally.k, expected)
        )

    excess = sum(max(0, c - expected) for c in tally.counts.values())
    return excess / (tally.k * (tally.n_queries - expected))


def _ranks(needle_ranks: Iterable[int]) -> np.ndarray:
    ranks = np.asarray(list(needle_ranks), dtype=np.int64)

    if ranks.size == 0:
        raise DataError("no needle ranks given")
    if np.any(ranks < 1):
        raise DataError("ranks must be >= 1")

    return ranks


def recall_at_k(needle_ranks: Iterable[int], k: int) -> float:
    """Fraction of queries whose true author is ranked k or better."""
    return float(np.mean(_ranks(needle_ranks) <= k))


def mean_reciprocal_rank(needle_ranks: Iterable[int]) -> float:
    return float(np.mean(1.0 / _ranks(needle_ranks)))


def per_author_mrr(
    records: Union[RankTable, Iterable[Tuple[str, int]]]
) -> Dict[str, float]:
    """
    MRR of each author over the queries they wrote.

    :param records: a RankTable or (true_author_id, needle rank) pairs
    """
    if isinstance(records, RankTable):
        records = records.needle_records()

    grouped: Dict[str, List[int]] = {}
    for author_id, rank in records:
        grouped.setdefault(author_id, []).append(rank)

    return {
        author_id: mean_reciprocal_rank(grouped[author_id])
        for author_id in sorted(grouped)
    }


def exceed_table(
    tally: TopKTally, multipliers: Sequence[float] = DEFAULT_MULTIPLIERS
) -> Dict[float, int]:
    """Number of authors with c_j^k > m * E_k, for each multiplier m."""
    for m in multipliers:
        if m <= 0:
            raise ConfigError("multipliers must be positive, got %r" % m)

    expected = tally.expected
    values = tally.values()

    return OrderedDict(
        (m, int(np.count_nonzero(values > m * expected)))
        for m in multipliers
    )


@dataclass(frozen=True)
class RiskRatioStats:
    """Distribution of u_j^k = c_j^k / E_k."""

    k: int
    population: str
    n_authors: int
    max: float
    mean: float
    std: float
    top: Tuple[Tuple[str, float], ...] = ()

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "population": self.population,
            "n_authors": self.n_authors,
            "max": self.max,
            "mean": self.mean,
            "std": self.std,
            "top": [{"author_id": a, "ratio": r} for a, r in self.top],
        }


def risk_ratio_stats(
    tally: TopKTally, population: str = RISK_RETRIEVED
) -> RiskRatioStats:
    """
    max, mean and population standard deviation of u_j^k.

    ``population`` RISK_RETRIEVED uses authors with c_j^k > 0, RISK_ALL
    every haystack author.
    """
    if population not in RISK_POPULATIONS:
        raise ConfigError("unknown risk population %r" % population)

    expected = tally.expected
    authors = sorted(tally.counts)
    if population == RISK_RETRIEVED:
        authors = [a for a in authors if tally.counts[a] > 0]

    if not authors:
        raise DataError("empty tally: no author was retrieved")

    ratios = np.asarray([tally.counts[a] for a in authors]) / expected
    ranked = sorted(
        zip(authors, ratios.tolist()), key=lambda pair: (-pair[1], pair[0])
    )

    return RiskRatioStats(
        k=tally.k,
        population=population,
        n_authors=len(authors),
        max=float(ratios.max()),
        mean=float(ratios.mean()),
        std=float(ratios.std()),
        top=tuple(ranked[:TOP_RISK_AUTHORS]),
    )


@dataclass(frozen=True)
class MauiRecord:
    k: int
    expected: int
    maui: float


@dataclass(frozen=True)
class EffectivenessReport:
    n_queries: int
    recall_k: int
    recall: float
    mrr: float
    recall_at: Dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "n_queries": self.n_queries,
            "recall_k": self.recall_k,
            "recall": self.recall,
            "mrr": self.mrr,
            "recall_at": {str(k): v for k, v in self.recall_at.items()},
        }


@dataclass(frozen=True)
class FairnessReport:
    n_haystack: int
    n_queries: int
    include_self_hits: bool
    records: Tuple[MauiRecord, ...]
    exceed_k: int
    exceed: Dict[float, int]
    risk: RiskRatioStats

    def maui_by_k(self) -> Dict[int, float]:
        return OrderedDict((r.k, r.maui) for r in self.records)

    def to_dict(self) -> Dict:
        return {
            "n_haystack": self.n_haystack,
            "n_queries": self.n_queries,
            "include_self_hits": self.include_self_hits,
            "maui": [
                {"k": r.k, "expected": r.expected, "maui": r.maui}
                for r in self.records
            ],
            "exceed": {
                "k": self.exceed_k,
                "expected": expected_count(
                    self.exceed_k, self.n_haystack, self.n_queries
                ),
                "counts": {repr(m): c for m, c in self.exceed.items()},
            },
            "risk": self.risk.to_dict(),
        }


def effectiveness_report(
    needle_ranks: Sequence[int],
    recall_k: int = DEFAULT_RECALL_K,
    ks: Sequence[int] = DEFAULT_KS,
) -> EffectivenessReport:
    ranks = _ranks(needle_ranks)
    recall_ks = sorted(set([1, recall_k] + list(ks)))

    return EffectivenessReport(
        n_queries=int(ranks.size),
        recall_k=recall_k,
        recall=recall_at_k(ranks, recall_k),
        mrr=mean_reciprocal_rank(ranks),
        recall_at=OrderedDict((k, recall_at_k(ranks, k)) for k in recall_ks),
    )


def fairness_report(
    slices: Sequence[TopKSlice],
    haystack_ids: Sequence[str],
    ks: Sequence[int] = DEFAULT_KS,
    multipliers: Sequence[float] = DEFAULT_MULTIPLIERS,
    exceed_k: int = DEFAULT_EXCEED_K,
    include_self_hits: bool = False,
    risk_population: str = RISK_RETRIEVED,
) -> FairnessReport:
    """MAUI over ``ks`` plus exceed counts and risk ratios at ``exceed_k``."""
    records = []
    for k in ks:
        tally = tally_topk(slices, k, haystack_ids, include_self_hits)
        value = maui(tally)
        records.append(MauiRecord(k, tally.expected, value))
        logger.info("MAUI_%d = %.4f (E_%d = %d)", k, value, k, tally.expected)

    tally = tally_topk(slices, exceed_k, haystack_ids, include_self_hits)

    return FairnessReport(
        n_haystack=len(haystack_ids),
        n_queries=len(slices),
        include_self_hits=include_self_hits,
        records=tuple(records),
        exceed_k=exceed_k,
        exceed=exceed_table(tally, multipliers),
        risk=risk_ratio_stats(tally, risk_population),
    )
