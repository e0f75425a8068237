"""
One-sided Mann-Whitney U tests of how centroid distance relates to MRR.

Three hypotheses are tested on the centroid distances of three author
groups picked by per-author MRR:

* ``i``   high-MRR authors are further from the centroid than low-MRR ones
* ``ii``  high-MRR authors are further from the centroid than random ones
* ``iii`` low-MRR authors are closer to the centroid than random ones

U is always reported for the first-named sample (``U_a``).
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
from scipy.stats import norm, rankdata

from pymaui.exceptions import ConfigError, DataError
from pymaui.geometry import DEFAULT_HISTOGRAM_BINS, distance_histogram
from pymaui.utils import make_rng

logger = logging.getLogger(__name__)

A_GREATER = "a_greater"
A_LESS = "a_less"
ALTERNATIVES = (A_GREATER, A_LESS)

METHOD_AUTO = "auto"
METHOD_EXACT = "exact"
METHOD_ASYMPTOTIC = "asymptotic"
METHODS = (METHOD_AUTO, METHOD_EXACT, METHOD_ASYMPTOTIC)

# largest n1 + n2 for which the null distribution is enumerated
EXACT_MAX_SIZE = 20

DEFAULT_GROUP_SIZE = 300
DEFAULT_ALPHA = 0.05

HIGH = "high"
LOW = "low"
RANDOM = "random"

# (id, sample a, sample b, alternative, description)
HYPOTHESES = (
    ("i", HIGH, LOW, A_GREATER,
     "high-MRR authors are further from the centroid than low-MRR authors"),
    ("ii", HIGH, RANDOM, A_GREATER,
     "high-MRR authors are further from the centroid than random authors"),
    ("iii", LOW, RANDOM, A_LESS,
     "low-MRR authors are closer to the centroid than random authors"),
)


@dataclass(frozen=True)
class HypothesisTestResult:
    hypothesis: str
    n1: int
    n2: int
    u: float
    p_value: float
    alternative: str
    alpha: float = DEFAULT_ALPHA
    method: str = METHOD_ASYMPTOTIC
    degenerate: bool = False
    description: str = ""

    def __post_init__(self):
        if not 0 <= self.u <= self.n1 * self.n2:
            raise DataError(
                "U=%r outside [0, %d]" % (self.u, self.n1 * self.n2)
            )
        if not 0.0 <= self.p_value <= 1.0:
            raise DataError("p=%r outside [0, 1]" % self.p_value)

    @property
    def reject(self) -> bool:
        """True when the null hypothesis is rejected at alpha."""
        return not self.degenerate and self.p_value < self.alpha

    def with_hypothesis(
        self, hypothesis: str, alpha: float, description: str
    ) -> "HypothesisTestResult":
        return HypothesisTestResult(
            hypothesis=hypothesis,
            n1=self.n1,
            n2=self.n2,
            u=self.u,
            p_value=self.p_value,
            alternative=self.alternative,
            alpha=alpha,
            method=self.method,
            degenerate=self.degenerate,
            description=description,
        )

    def to_dict(self) -> Dict:
        return {
            "hypothesis": self.hypothesis,
            "description": self.description,
            "n1": self.n1,
            "n2": self.n2,
            "u": self.u,
            "p_value": self.p_value,
            "alternative": self.alternative,
            "alpha": self.alpha,
            "reject": self.reject,
            "method": self.method,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class MrrGroups:
    high: Tuple[str, ...]
    low: Tuple[str, ...]
    random: Tuple[str, ...]
    seed: int

    @property
    def n(self) -> int:
        return len(self.high)

    def members(self) -> Dict[str, Tuple[str, ...]]:
        return OrderedDict(
            ((HIGH, self.high), (LOW, self.low), (RANDOM, self.random))
        )

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "seed": self.seed,
            HIGH: list(self.high),
            LOW: list(self.low),
            RANDOM: list(self.random),
        }


def select_mrr_groups(
    per_author_mrr: Mapping[str, float],
    n: int = DEFAULT_GROUP_SIZE,
    seed: int = 0,
) -> MrrGroups:
    """
    The n highest-MRR, n lowest-MRR and n uniformly drawn needle authors.

    Ties in MRR are broken by author_id. The random group is drawn from all
    needle authors and may overlap the other two.

    :raises DataError: when there are fewer than 2n authors
    """
    if n < 1:
        raise ConfigError("group size must be positive, got %r" % n)
    if len(per_author_mrr) < 2 * n:
        raise DataError(
            "need at least %d needle authors for groups of %d, got %d"
            % (2 * n, n, len(per_author_mrr))
        )

    ordered = sorted(per_author_mrr, key=lambda a: (-per_author_mrr[a], a))
    rng = make_rng(seed)
    drawn = rng.choice(len(ordered), size=n, replace=False)
    everyone = sorted(per_author_mrr)

    return MrrGroups(
        high=tuple(ordered[:n]),
        low=tuple(ordered[-n:]),
        random=tuple(sorted(everyone[i] for i in drawn)),
        seed=seed,
    )


def _exact_p(
    doubled_ranks: np.ndarray, n1: int, observed: int, alternative: str
) -> float:
    """
    P(R_a >= observed) or P(R_a <= observed) over all equally likely ways
    of choosing which n1 of the pooled values belong to sample a.

    Ranks are doubled so tied midranks stay integers.
    """
    # ways[j][s]: subsets of size j whose doubled rank sum is s
    ways: List[Dict[int, int]] = [dict() for _ in range(n1 + 1)]
    ways[0][0] = 1

    for r in doubled_ranks.astype(np.int64).tolist():
        for j in range(n1, 0, -1):
            below = ways[j - 1]
            row = ways[j]
            for s, count in below.items():
                row[s + r] = row.get(s + r, 0) + count

    total = comb(len(doubled_ranks), n1)
    if alternative == A_GREATER:
        hits = sum(c for s, c in ways[n1].items() if s >= observed)
    else:
        hits = sum(c for s, c in ways[n1].items() if s <= observed)

    return hits / total


def _asymptotic_p(
    u: float, n1: int, n2: int, tie_counts: np.ndarray, alternative: str
) -> float:
    """Normal approximation with tie-corrected variance and continuity."""
    n = n1 + n2
    mu = n1 * n2 / 2.0
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / (n * (n - 1))
    sigma = np.sqrt(n1 * n2 / 12.0 * ((n + 1) - tie_term))

    if alternative == A_GREATER:
        return float(norm.sf((u - mu - 0.5) / sigma))

    return float(norm.cdf((u - mu + 0.5) / sigma))


def mann_whitney_u(
    sample_a: Sequence[float],
    sample_b: Sequence[float],
    alternative: str = A_GREATER,
    method: str = METHOD_AUTO,
) -> HypothesisTestResult:
    """
    One-sided Mann-Whitney U test.

    ``a_greater`` tests whether values of sample_a tend to be larger than
    those of sample_b, ``a_less`` whether they tend to be smaller. With
    ``method`` auto, samples of at most 20 values in total are tested by
    exact enumeration and larger ones by the normal approximation.
    When all values are identical the test is undefined; p is reported as 1
    and the result is flagged degenerate.
    """
    if alternative not in ALTERNATIVES:
        raise ConfigError("unknown alternative %r" % alternative)
    if method not in METHODS:
        raise ConfigError("unknown method %r" % method)

    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    n1, n2 = a.size, b.size

    if n1 < 1 or n2 < 1:
        raise DataError("both samples need at least one value")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DataError("samples must be finite")

    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled, method="average")
    rank_sum = float(np.sum(ranks[:n1]))
    u = rank_sum - n1 * (n1 + 1) / 2.0

    if method == METHOD_AUTO:
        small = n1 + n2 <= EXACT_MAX_SIZE
        method = METHOD_EXACT if small else METHOD_ASYMPTOTIC

    _, tie_counts = np.unique(pooled, return_counts=True)
    if tie_counts.size == 1:
        return HypothesisTestResult(
            hypothesis="",
            n1=n1,
            n2=n2,
            u=u,
            p_value=1.0,
            alternative=alternative,
            method=method,
            degenerate=True,
        )

    if method == METHOD_EXACT:
        doubled = np.rint(2 * ranks).astype(np.int64)
        p = _exact_p(doubled, n1, int(doubled[:n1].sum()), alternative)
    else:
        p = _asymptotic_p(u, n1, n2, tie_counts, alternative)

    return HypothesisTestResult(
        hypothesis="",
        n1=n1,
        n2=n2,
        u=u,
        p_value=min(max(p, 0.0), 1.0),
        alternative=alternative,
        method=method,
    )


def _group_distances(
    ids: Sequence[str], distances: Mapping[str, float], group: str
) -> List[float]:
    missing = [a for a in ids if a not in distances]
    if missing:
        raise DataError(
            "no centroid distance for %d %s-group authors (first: %s)"
            % (len(missing), group, missing[0])
        )

    return [distances[a] for a in ids]


def run_hypotheses(
    groups: MrrGroups,
    distances: Mapping[str, float],
    alpha: float = DEFAULT_ALPHA,
) -> List[HypothesisTestResult]:
    """Tests i, ii and iii on the raw centroid distances of the groups."""
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must be in (0, 1), got %r" % alpha)

    samples = {
        name: _group_distances(ids, distances, name)
        for name, ids in groups.members().items()
    }

    results = []
    for hypothesis, first, second, alternative, description in HYPOTHESES:
        result = mann_whitney_u(
            samples[first], samples[second], alternative
        ).with_hypothesis(hypothesis, alpha, description)
        logger.info(
            "hypothesis %s: U=%.1f p=%.4g (%s)",
            hypothesis,
            result.u,
            result.p_value,
            "rejected null" if result.reject else "kept null",
        )
        results.append(result)

    return results


def group_distance_histograms(
    groups: MrrGroups,
    distances: Mapping[str, float],
    n_bins: int = DEFAULT_HISTOGRAM_BINS,
) -> Dict[str, List[Tuple[float, int]]]:
    """Distance histogram of each MRR group, for plotting."""
    return OrderedDict(
        (name, distance_histogram(_group_distances(ids, distances, name),
                                  n_bins))
        for name, ids in groups.members().items()
    )
