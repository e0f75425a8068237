"""
CSV and JSON report files of a run.

Every file goes through a ReportWriter, which remembers what it wrote so a
failed run can remove its partial output.
"""
import csv
import json
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence

from pymaui.fairness import EffectivenessReport, FairnessReport
from pymaui.geometry import GeometryReport
from pymaui.hypotheses import HypothesisTestResult, MrrGroups
from pymaui.ranking import TopKSlice
from pymaui.utils import sha256_file

logger = logging.getLogger(__name__)

EFFECTIVENESS_CSV = "effectiveness.csv"
MAUI_CSV = "maui.csv"
EXCEED_CSV = "exceed.csv"
RISK_CSV = "risk_ratios.csv"
CURVE_CSV = "geometry_curve.csv"
HISTOGRAM_CSV = "distance_histogram.csv"
AUTHORS_CSV = "geometry_authors.csv"
HYPOTHESES_CSV = "hypotheses.csv"
RANKINGS_CSV = "rankings.csv"
FAIRNESS_JSON = "fairness.json"
GEOMETRY_JSON = "geometry.json"
HYPOTHESES_JSON = "hypotheses.json"
MANIFEST_JSON = "manifest.json"

HAYSTACK_GROUP = "haystack"


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


class ReportWriter(object):
    def __init__(self, output_dir: str, logger=None) -> None:
        """
        :param str output_dir: created on first write if missing
        """
        self.output_dir = output_dir
        self.written: List[str] = []
        self._created_dir = False

        if logger is None:
            self.logger = logging.getLogger(__name__)
        else:
            self.logger = logger

    def path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def _open(self, name: str):
        if not os.path.isdir(self.output_dir):
            os.makedirs(self.output_dir)
            self._created_dir = True

        path = self.path(name)
        if path not in self.written:
            self.written.append(path)
        self.logger.debug("writing %s", path)

        return open(path, "w", encoding="utf-8", newline="")

    def write_csv(
        self, name: str, header: Sequence[str], rows: Iterable[Sequence]
    ) -> str:
        with self._open(name) as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])

        return self.path(name)

    def write_json(self, name: str, obj) -> str:
        with self._open(name) as handle:
            json.dump(obj, handle, indent=2, sort_keys=True)
            handle.write("\n")

        return self.path(name)

    def checksums(self, exclude: Sequence[str] = ()) -> Dict[str, str]:
        """sha256 of every written file, keyed by file name."""
        return {
            os.path.basename(p): sha256_file(p)
            for p in sorted(self.written)
            if os.path.basename(p) not in exclude
        }

    def remove_all(self) -> None:
        """Delete everything this writer produced."""
        for path in self.written:
            if os.path.exists(path):
                os.remove(path)
                self.logger.debug("removed partial output %s", path)
        self.written = []

        if self._created_dir and os.path.isdir(self.output_dir):
            if not os.listdir(self.output_dir):
                os.rmdir(self.output_dir)


def write_effectiveness(
    writer: ReportWriter, report: EffectivenessReport
) -> None:
    rows = [("n_queries", report.n_queries)]
    rows.append(("R@%d" % report.recall_k, report.recall))
    rows.append(("MRR", report.mrr))
    rows.extend(
        ("R@%d" % k, value)
        for k, value in report.recall_at.items()
        if k != report.recall_k
    )
    writer.write_csv(EFFECTIVENESS_CSV, ("metric", "value"), rows)


def write_fairness(
    writer: ReportWriter,
    effectiveness: EffectivenessReport,
    report: FairnessReport,
) -> None:
    writer.write_csv(
        MAUI_CSV,
        ("k", "expected", "maui"),
        ((r.k, r.expected, r.maui) for r in report.records),
    )

    exceed = report.to_dict()["exceed"]
    writer.write_csv(
        EXCEED_CSV,
        ("k", "expected", "multiplier", "threshold", "authors"),
        (
            (report.exceed_k, exceed["expected"], m, m * exceed["expected"],
             count)
            for m, count in report.exceed.items()
        ),
    )

    risk = report.risk
    writer.write_csv(
        RISK_CSV,
        ("k", "population", "statistic", "value"),
        (
            (risk.k, risk.population, name, value)
            for name, value in (
                ("n_authors", risk.n_authors),
                ("max", risk.max),
                ("mean", risk.mean),
                ("std", risk.std),
            )
        ),
    )

    writer.write_json(
        FAIRNESS_JSON,
        {
            "effectiveness": effectiveness.to_dict(),
            "fairness": report.to_dict(),
        },
    )


def write_geometry(writer: ReportWriter, report: GeometryReport) -> None:
    writer.write_csv(
        CURVE_CSV,
        ("bin_center", "value", "count"),
        ((b.center, b.mean, b.count) for b in report.curve),
    )
    writer.write_csv(
        AUTHORS_CSV,
        ("author_id", "distance", "normalized_distance", "mean_rank"),
        (
            (a.author_id, a.distance, a.normalized_distance, a.mean_rank)
            for a in report.authors
        ),
    )
    writer.write_json(GEOMETRY_JSON, report.to_dict())


def write_histograms(
    writer: ReportWriter,
    haystack: Sequence,
    groups: Optional[Dict[str, Sequence]] = None,
) -> None:
    """
    Distance histograms of the whole haystack and of each MRR group.

    :param haystack: (bin_center, count) pairs
    :param groups: group name -> (bin_center, count) pairs
    """
    rows = [(HAYSTACK_GROUP, c, n) for c, n in haystack]
    for name, histogram in (groups or {}).items():
        rows.extend((name, c, n) for c, n in histogram)

    writer.write_csv(HISTOGRAM_CSV, ("group", "bin_center", "count"), rows)


def write_hypotheses(
    writer: ReportWriter,
    results: Sequence[HypothesisTestResult],
    groups: MrrGroups,
) -> None:
    writer.write_csv(
        HYPOTHESES_CSV,
        ("hypothesis", "n1", "n2", "u", "p_value", "alternative", "reject"),
        (
            (r.hypothesis, r.n1, r.n2, r.u, r.p_value, r.alternative,
             str(r.reject).lower())
            for r in results
        ),
    )
    writer.write_json(
        HYPOTHESES_JSON,
        {
            "groups": groups.to_dict(),
            "results": [r.to_dict() for r in results],
        },
    )


def write_rankings(
    writer: ReportWriter, slices: Sequence[TopKSlice], k: int
) -> None:
    writer.write_csv(
        RANKINGS_CSV,
        ("query_id", "true_author_id", "rank", "author_id", "similarity"),
        (
            (s.query_id, s.true_author_id, rank, author_id, score)
            for s in slices
            for rank, (author_id, score) in enumerate(
                zip(s.author_ids[:k], s.scores[:k]), start=1
            )
        ),
    )
