"""
Centroid geometry of the embedded haystack.

Each author's distance to the centroid of all author embeddings is
``1 - cosine``, so it lies in [0, 2]. Authors near the centroid tend to be
ranked high for everyone's queries; the curve of mean rank against
min-max normalised distance and the rank correlation between the two
quantify that.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import rankdata

from pymaui.embeddingstore import AuthorEmbedding
from pymaui.exceptions import DataError, DegenerateCentroidError
from pymaui.ranking import RankSums, RankTable

logger = logging.getLogger(__name__)

DEFAULT_CURVE_BINS = 20
DEFAULT_HISTOGRAM_BINS = 20

MAX_DISTANCE = 2.0
DEGENERATE_NORM = 1e-12
MIN_SPEARMAN_PAIRS = 3


@dataclass(frozen=True)
class AuthorGeometry:
    author_id: str
    distance: float
    normalized_distance: float
    mean_rank: float


@dataclass(frozen=True)
class CurveBin:
    center: float
    # None when the bin is empty
    mean: Optional[float]
    count: int


@dataclass(frozen=True)
class Correlation:
    # None when undefined (fewer than three authors or no variance)
    coefficient: Optional[float]
    n: int


@dataclass(frozen=True)
class GeometryReport:
    centroid: np.ndarray
    authors: Tuple[AuthorGeometry, ...]
    curve: Tuple[CurveBin, ...]
    histogram: Tuple[Tuple[float, int], ...]
    correlation: Correlation

    def distances(self) -> Dict[str, float]:
        return {a.author_id: a.distance for a in self.authors}

    def to_dict(self) -> Dict:
        return {
            "centroid": [float(x) for x in self.centroid],
            "centroid_norm": float(np.linalg.norm(self.centroid)),
            "n_authors": len(self.authors),
            "spearman": {
                "coefficient": self.correlation.coefficient,
                "n": self.correlation.n,
            },
            "curve": [
                {"center": b.center, "mean": b.mean, "count": b.count}
                for b in self.curve
            ],
            "histogram": [
                {"center": c, "count": n} for c, n in self.histogram
            ],
        }


def centroid(authors: Sequence[AuthorEmbedding]) -> np.ndarray:
    """Component-wise mean of the author vectors, not re-normalised."""
    if len(authors) == 0:
        raise DataError("cannot take the centroid of no authors")

    return np.mean([a.vector for a in authors], axis=0, dtype=np.float64)


def distance_to_centroid(v: np.ndarray, c: np.ndarray) -> float:
    """1 - cos(v, c) for a unit vector v."""
    norm = float(np.linalg.norm(c))

    if norm <= DEGENERATE_NORM:
        raise DegenerateCentroidError("degenerate centroid: zero vector")

    cosine = float(np.dot(v, c)) / norm
    return float(np.clip(1.0 - cosine, 0.0, MAX_DISTANCE))


def centroid_distances(
    authors: Sequence[AuthorEmbedding], c: np.ndarray
) -> np.ndarray:
    """Vectorised distance_to_centroid over authors, in the given order."""
    norm = float(np.linalg.norm(c))

    if norm <= DEGENERATE_NORM:
        raise DegenerateCentroidError("degenerate centroid: zero vector")

    matrix = np.asarray([a.vector for a in authors], dtype=np.float64)
    return np.clip(1.0 - matrix @ c / norm, 0.0, MAX_DISTANCE)


def min_max_normalize(values: Sequence[float]) -> np.ndarray:
    """Scale to [0, 1]; a constant input maps to all zeros."""
    array = np.asarray(values, dtype=np.float64)

    if array.size == 0:
        raise DataError("cannot normalise an empty list")

    low = array.min()
    span = array.max() - low
    if span == 0:
        return np.zeros_like(array)

    return np.clip((array - low) / span, 0.0, 1.0)


def mean_rank_per_author(
    table: Union[RankTable, RankSums], exclude_self: bool = False
) -> Dict[str, float]:
    """
    Average rank of each haystack author over all queries.

    Accepts a full RankTable or streamed RankSums. With ``exclude_self`` the
    author's own queries are left out (only applies to a RankTable).
    """
    if isinstance(table, RankTable):
        sums = table.rank_sums(exclude_self=exclude_self)
    elif isinstance(table, RankSums):
        sums = table
    else:
        raise DataError(
            "mean ranks need dense rankings; top-k slices are not enough"
        )

    if np.any(sums.counts == 0):
        raise DataError("an author has no queries to average over")

    means = sums.sums / sums.counts
    return {a: float(m) for a, m in zip(sums.haystack_ids, means)}


def _bin_index(values: np.ndarray, n_bins: int, upper: float) -> np.ndarray:
    index = np.floor(values / upper * n_bins).astype(np.int64)
    return np.clip(index, 0, n_bins - 1)


def binned_curve(
    distances_norm: Sequence[float],
    mean_ranks: Sequence[float],
    n_bins: int = DEFAULT_CURVE_BINS,
) -> List[CurveBin]:
    """Mean of ``mean_ranks`` in equal-width bins of normalised distance."""
    x = np.asarray(distances_norm, dtype=np.float64)
    y = np.asarray(mean_ranks, dtype=np.float64)

    if x.shape != y.shape:
        raise DataError(
            "length mismatch: %d distances, %d mean ranks" % (x.size, y.size)
        )
    if n_bins < 1:
        raise DataError("n_bins must be at least 1")

    index = _bin_index(x, n_bins, 1.0)
    width = 1.0 / n_bins
    curve = []

    for b in range(n_bins):
        members = y[index == b]
        curve.append(
            CurveBin(
                center=(b + 0.5) * width,
                mean=float(members.mean()) if members.size else None,
                count=int(members.size),
            )
        )

    return curve


def distance_histogram(
    raw_distances: Sequence[float], n_bins: int = DEFAULT_HISTOGRAM_BINS
) -> List[Tuple[float, int]]:
    """Equal-width histogram of raw distances over [0, 2]."""
    values = np.asarray(raw_distances, dtype=np.float64)

    if values.size == 0:
        raise DataError("cannot histogram an empty list")
    if n_bins < 1:
        raise DataError("n_bins must be at least 1")

    counts = np.bincount(
        _bin_index(values, n_bins, MAX_DISTANCE), minlength=n_bins
    )
    width = MAX_DISTANCE / n_bins

    return [((b + 0.5) * width, int(counts[b])) for b in range(n_bins)]


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Tie-aware Spearman coefficient (Pearson correlation of midranks)."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)

    if x.shape != y.shape:
        raise DataError("length mismatch: %d vs %d" % (x.size, y.size))
    if x.size < MIN_SPEARMAN_PAIRS:
        raise DataError(
            "spearman needs at least %d pairs" % MIN_SPEARMAN_PAIRS
        )

    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    rx -= rx.mean()
    ry -= ry.mean()

    denominator = float(np.sqrt(np.sum(rx * rx) * np.sum(ry * ry)))
    if denominator == 0:
        raise DataError("spearman undefined: zero variance")

    return float(np.clip(np.sum(rx * ry) / denominator, -1.0, 1.0))


def geometry_report(
    haystack: Sequence[AuthorEmbedding],
    ranks: Union[RankTable, RankSums],
    curve_bins: int = DEFAULT_CURVE_BINS,
    histogram_bins: int = DEFAULT_HISTOGRAM_BINS,
    exclude_self: bool = False,
) -> GeometryReport:
    authors = sorted(haystack, key=lambda a: a.author_id)
    c = centroid(authors)
    distances = centroid_distances(authors, c)
    normalized = min_max_normalize(distances)

    mean_ranks = mean_rank_per_author(ranks, exclude_self=exclude_self)
    ranks_in_order = np.asarray([mean_ranks[a.author_id] for a in authors])

    records = tuple(
        AuthorGeometry(a.author_id, float(d), float(n), float(r))
        for a, d, n, r in zip(authors, distances, normalized, ranks_in_order)
    )
    coefficient: Optional[float] = None
    try:
        coefficient = spearman(normalized, ranks_in_order)
    except DataError as e:
        logger.warning("no correlation reported: %s", e)
    else:
        logger.info(
            "spearman(distance to centroid, mean rank) = %.4f over %d authors",
            coefficient,
            len(authors),
        )

    return GeometryReport(
        centroid=c,
        authors=records,
        curve=tuple(binned_curve(normalized, ranks_in_order, curve_bins)),
        histogram=tuple(distance_histogram(distances, histogram_bins)),
        correlation=Correlation(coefficient, len(authors)),
    )
