"""
End-to-end evaluation runs driven by a JSON config.

A run executes the stages store, split, queries, rank, metrics, geometry
and stats in that order, writes its reports as it goes and finishes with a
manifest. If any stage fails every file the run wrote is removed and a
StageError naming the stage is raised.
"""
import json
import logging
import os
import time
from collections import OrderedDict
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from pymaui import __version__
from pymaui import reports
from pymaui.embeddingstore import (
    ALL,
    FORMAT_JSONL,
    FORMATS,
    EmbeddingStore,
    build_haystack,
    load_store,
    sample_queries,
    split_documents,
)
from pymaui.exceptions import (
    ConfigError,
    DataError,
    IncompatibleRunsError,
    InvariantError,
    StageError,
)
from pymaui.fairness import (
    DEFAULT_EXCEED_K,
    DEFAULT_KS,
    DEFAULT_MULTIPLIERS,
    DEFAULT_RECALL_K,
    RISK_POPULATIONS,
    RISK_RETRIEVED,
    effectiveness_report,
    fairness_report,
    per_author_mrr,
)
from pymaui.geometry import (
    DEFAULT_CURVE_BINS,
    DEFAULT_HISTOGRAM_BINS,
    geometry_report,
)
from pymaui.hypotheses import (
    DEFAULT_ALPHA,
    DEFAULT_GROUP_SIZE,
    group_distance_histograms,
    run_hypotheses,
    select_mrr_groups,
)
from pymaui.ranking import (
    DEFAULT_CHUNK_SIZE,
    MODE_FULL,
    MODE_TOP_K,
    MODES,
    needle_records,
    rank_batch,
    rank_sums,
)
from pymaui.synth import (
    PopulationSpec,
    generate,
    population_spec_from_dict,
    population_spec_to_dict,
)
from pymaui.utils import (
    canonical_json,
    check_int,
    check_keys,
    make_rng,
    sha256_bytes,
    sha256_file,
)

logger = logging.getLogger(__name__)

ATTRIBUTION = "attribution"
NEEDLE_MRR = "needle_mrr"
QUERY_MODES = (ATTRIBUTION, NEEDLE_MRR)

# four queries of four documents each per query author
NEEDLE_QUERIES_PER_AUTHOR = 4
NEEDLE_DOCS_PER_QUERY = 4

STAGES = ("store", "split", "queries", "rank", "metrics", "geometry", "stats")

# offsets of the stage seeds derived from the global seed
SPLIT_SEED_OFFSET = 0
QUERY_SEED_OFFSET = 1
STATS_SEED_OFFSET = 2


@dataclass(frozen=True)
class InputConfig:
    path: Optional[str] = None
    format: str = FORMAT_JSONL
    synthetic: Optional[PopulationSpec] = None


@dataclass(frozen=True)
class SplitConfig:
    haystack_docs: int
    query_docs: int
    seed: Optional[int] = None


@dataclass(frozen=True)
class QueryConfig:
    mode: str = ATTRIBUTION
    # number of query authors drawn from the haystack; None takes all
    authors: Optional[int] = None
    queries_per_author: int = 1
    docs_per_query: Union[int, str] = ALL
    disjoint: bool = False
    seed: Optional[int] = None


@dataclass(frozen=True)
class RankingConfig:
    mode: str = MODE_FULL
    threads: int = 1
    chunk_size: int = DEFAULT_CHUNK_SIZE
    dump: bool = False


@dataclass(frozen=True)
class GeometryConfig:
    curve_bins: int = DEFAULT_CURVE_BINS
    histogram_bins: int = DEFAULT_HISTOGRAM_BINS
    exclude_self_queries: bool = False


@dataclass(frozen=True)
class StatsConfig:
    n: int = DEFAULT_GROUP_SIZE
    alpha: float = DEFAULT_ALPHA
    seed: Optional[int] = None


@dataclass(frozen=True)
class RunConfig:
    input: InputConfig
    output_dir: str
    seed: int = 0
    split: Optional[SplitConfig] = None
    queries: QueryConfig = field(default_factory=QueryConfig)
    ks: Tuple[int, ...] = DEFAULT_KS
    recall_k: int = DEFAULT_RECALL_K
    exceed_k: int = DEFAULT_EXCEED_K
    multipliers: Tuple[float, ...] = DEFAULT_MULTIPLIERS
    include_self_hits: bool = False
    risk_population: str = RISK_RETRIEVED
    ranking: RankingConfig = field(default_factory=RankingConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    stats: StatsConfig = field(default_factory=StatsConfig)

    @property
    def split_seed(self) -> int:
        if self.split is not None and self.split.seed is not None:
            return self.split.seed
        return self.seed + SPLIT_SEED_OFFSET

    @property
    def query_seed(self) -> int:
        if self.queries.seed is not None:
            return self.queries.seed
        return self.seed + QUERY_SEED_OFFSET

    @property
    def stats_seed(self) -> int:
        if self.stats.seed is not None:
            return self.stats.seed
        return self.seed + STATS_SEED_OFFSET

    @property
    def max_k(self) -> int:
        return max(max(self.ks), self.exceed_k, self.recall_k)

    def with_overrides(
        self,
        output_dir: Optional[str] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> "RunConfig":
        """Apply the command line overrides."""
        config = self
        if output_dir is not None:
            config = replace(config, output_dir=output_dir)
        if seed is not None:
            config = replace(config, seed=int(seed))
        if threads is not None:
            if threads < 1:
                raise ConfigError("threads must be at least 1")
            config = replace(
                config, ranking=replace(config.ranking, threads=threads)
            )
        return config

    def to_dict(self) -> Dict:
        """Resolved config with every seed filled in."""
        data = asdict(self)
        if self.input.synthetic is not None:
            data["input"]["synthetic"] = population_spec_to_dict(
                self.input.synthetic
            )
        data["seeds"] = {
            "global": self.seed,
            "split": self.split_seed,
            "queries": self.query_seed,
            "stats": self.stats_seed,
        }
        data["ks"] = list(self.ks)
        data["multipliers"] = list(self.multipliers)
        return data


_TOP_KEYS = (
    "input", "output_dir", "seed", "split", "queries", "ks", "recall_k",
    "exceed_k", "multipliers", "include_self_hits", "risk_population",
    "ranking", "geometry", "stats",
)


def _positive_int(value, path: str) -> int:
    return check_int(value, path, minimum=1)


def _optional_seed(data: Dict, path: str) -> Optional[int]:
    seed = data.get("seed")
    if seed is None:
        return None
    return check_int(seed, path + ".seed")


def _input_config(data, base_dir: str) -> InputConfig:
    check_keys(data, ("path", "format", "synthetic"), "input")

    has_path = data.get("path") is not None
    has_synthetic = data.get("synthetic") is not None
    if has_path == has_synthetic:
        raise ConfigError("input needs exactly one of path or synthetic")

    if has_synthetic:
        return InputConfig(
            synthetic=population_spec_from_dict(
                data["synthetic"], "input.synthetic"
            )
        )

    store_format = data.get("format", FORMAT_JSONL)
    if store_format not in FORMATS:
        raise ConfigError("input.format must be one of %s" % ", ".join(
            FORMATS))

    return InputConfig(
        path=os.path.normpath(os.path.join(base_dir, data["path"])),
        format=store_format,
    )


def _query_config(data) -> QueryConfig:
    check_keys(
        data,
        ("mode", "authors", "queries_per_author", "docs_per_query",
         "disjoint", "seed"),
        "queries",
    )
    mode = data.get("mode", ATTRIBUTION)
    if mode not in QUERY_MODES:
        raise ConfigError("queries.mode must be one of %s"
                          % ", ".join(QUERY_MODES))

    authors = data.get("authors")
    if authors is not None:
        _positive_int(authors, "queries.authors")

    if mode == ATTRIBUTION:
        for key in ("queries_per_author", "docs_per_query", "disjoint"):
            if key in data:
                raise ConfigError(
                    "queries.%s only applies to needle_mrr mode" % key
                )
        return QueryConfig(
            mode=mode, authors=authors, seed=_optional_seed(data, "queries")
        )

    docs_per_query = data.get("docs_per_query", NEEDLE_DOCS_PER_QUERY)
    if docs_per_query != ALL:
        _positive_int(docs_per_query, "queries.docs_per_query")

    return QueryConfig(
        mode=mode,
        authors=authors,
        queries_per_author=_positive_int(
            data.get("queries_per_author", NEEDLE_QUERIES_PER_AUTHOR),
            "queries.queries_per_author",
        ),
        docs_per_query=docs_per_query,
        disjoint=bool(data.get("disjoint", False)),
        seed=_optional_seed(data, "queries"),
    )


def _ranking_config(data) -> RankingConfig:
    check_keys(data, ("mode", "threads", "chunk_size", "dump"), "ranking")
    mode = data.get("mode", MODE_FULL)
    if mode not in MODES:
        raise ConfigError("ranking.mode must be one of %s" % ", ".join(MODES))

    return RankingConfig(
        mode=mode,
        threads=_positive_int(data.get("threads", 1), "ranking.threads"),
        chunk_size=_positive_int(
            data.get("chunk_size", DEFAULT_CHUNK_SIZE), "ranking.chunk_size"
        ),
        dump=bool(data.get("dump", False)),
    )


def _geometry_config(data) -> GeometryConfig:
    check_keys(
        data, ("curve_bins", "histogram_bins", "exclude_self_queries"),
        "geometry",
    )
    return GeometryConfig(
        curve_bins=_positive_int(
            data.get("curve_bins", DEFAULT_CURVE_BINS), "geometry.curve_bins"
        ),
        histogram_bins=_positive_int(
            data.get("histogram_bins", DEFAULT_HISTOGRAM_BINS),
            "geometry.histogram_bins",
        ),
        exclude_self_queries=bool(data.get("exclude_self_queries", False)),
    )


def _stats_config(data) -> StatsConfig:
    check_keys(data, ("n", "alpha", "seed"), "stats")
    alpha = data.get("alpha", DEFAULT_ALPHA)
    if not isinstance(alpha, (int, float)) or not 0 < alpha < 1:
        raise ConfigError("stats.alpha must be in (0, 1), got %r" % alpha)

    return StatsConfig(
        n=_positive_int(data.get("n", DEFAULT_GROUP_SIZE), "stats.n"),
        alpha=float(alpha),
        seed=_optional_seed(data, "stats"),
    )


def config_from_dict(data: Dict, base_dir: str = ".") -> RunConfig:
    """
    Build a RunConfig from its JSON form.

    Relative paths are resolved against ``base_dir``, the directory of the
    config file. Unknown keys anywhere are rejected.

    :raises ConfigError:
    """
    check_keys(data, _TOP_KEYS, "config", required=("input",))

    seed = check_int(data.get("seed", 0), "config.seed")

    split = None
    if data.get("split") is not None:
        check_keys(
            data["split"], ("haystack_docs", "query_docs", "seed"), "split",
            required=("haystack_docs", "query_docs"),
        )
        split = SplitConfig(
            haystack_docs=_positive_int(
                data["split"]["haystack_docs"], "split.haystack_docs"
            ),
            query_docs=_positive_int(
                data["split"]["query_docs"], "split.query_docs"
            ),
            seed=_optional_seed(data["split"], "split"),
        )

    ks = data.get("ks", list(DEFAULT_KS))
    if not isinstance(ks, list) or not ks:
        raise ConfigError("ks must be a non-empty list")
    ks = tuple(_positive_int(k, "ks[%d]" % i) for i, k in enumerate(ks))
    if len(set(ks)) != len(ks):
        raise ConfigError("ks must not repeat")

    multipliers = data.get("multipliers", list(DEFAULT_MULTIPLIERS))
    if not isinstance(multipliers, list) or not all(
        isinstance(m, (int, float)) and not isinstance(m, bool) and m > 0
        for m in multipliers
    ):
        raise ConfigError("multipliers must be a list of positive numbers")

    risk_population = data.get("risk_population", RISK_RETRIEVED)
    if risk_population not in RISK_POPULATIONS:
        raise ConfigError("risk_population must be one of %s"
                          % ", ".join(RISK_POPULATIONS))

    output_dir = data.get("output_dir", "results")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir must be a string")

    return RunConfig(
        input=_input_config(data["input"], base_dir),
        output_dir=os.path.normpath(os.path.join(base_dir, output_dir)),
        seed=seed,
        split=split,
        queries=_query_config(data.get("queries", {})),
        ks=ks,
        recall_k=_positive_int(
            data.get("recall_k", DEFAULT_RECALL_K), "recall_k"
        ),
        exceed_k=_positive_int(
            data.get("exceed_k", DEFAULT_EXCEED_K), "exceed_k"
        ),
        multipliers=tuple(float(m) for m in multipliers),
        include_self_hits=bool(data.get("include_self_hits", False)),
        risk_population=risk_population,
        ranking=_ranking_config(data.get("ranking", {})),
        geometry=_geometry_config(data.get("geometry", {})),
        stats=_stats_config(data.get("stats", {})),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, ValueError) as e:
        raise ConfigError("cannot read config %s: %s" % (path, e))

    return config_from_dict(data, os.path.dirname(os.path.abspath(path)))


@dataclass
class RunManifest:
    config: Dict
    config_hash: str
    version: str
    input_checksums: Dict[str, str]
    store_digest: str
    n_haystack: int
    n_queries: int
    n_query_authors: int
    dropped_authors: int
    stats_n: int
    stage_seconds: Dict[str, float]
    summary: Dict
    report_checksums: Dict[str, str]
    path: Optional[str] = None

    def to_dict(self) -> Dict:
        data = asdict(self)
        data.pop("path")
        return data

    @classmethod
    def from_dict(cls, data: Dict, path: Optional[str] = None):
        try:
            return cls(path=path, **data)
        except TypeError as e:
            raise DataError("malformed manifest %s: %s" % (path, e))


def load_manifest(path: str) -> RunManifest:
    if os.path.isdir(path):
        path = os.path.join(path, reports.MANIFEST_JSON)

    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, ValueError) as e:
        raise DataError("cannot read manifest %s: %s" % (path, e))

    return RunManifest.from_dict(data, path)


def store_digest(store: EmbeddingStore) -> str:
    """Checksum of a store's ids, vectors and split labels in read order."""
    parts = []
    for document in store.iter_documents():
        label = store.split_of(document.author_id, document.doc_id) or ""
        parts.append(
            ("%s\t%s\t%s\n" % (document.author_id, document.doc_id, label))
            .encode("utf-8")
        )
        parts.append(np.ascontiguousarray(document.vector).tobytes())

    return sha256_bytes(b"".join(parts))


class Runner(object):
    def __init__(self, config: RunConfig, logger=None) -> None:
        """
        One evaluation run. Owns ``config.output_dir`` while running.

        :param RunConfig config: resolved run configuration
        """
        self.config = config
        self.writer = None
        self.stage_seconds = OrderedDict()

        if logger is None:
            self.logger = logging.getLogger(__name__)
        else:
            self.logger = logger

        self.store = None
        self.input_checksums = {}
        self.dropped = []
        self.haystack = None
        self.query_author_ids = None
        self.queries = None
        self.table = None
        self.slices = None
        self.effectiveness = None
        self.fairness = None
        self.geometry = None
        self.stats_n = 0

    def run(self) -> RunManifest:
        """
        Execute every stage and write the manifest.

        :raises StageError: wrapping the first failure
        """
        self.writer = reports.ReportWriter(
            self.config.output_dir, logger=self.logger
        )

        for stage in STAGES:
            self._run_stage(stage, getattr(self, "_stage_" + stage))

        try:
            manifest = self._manifest()
            self.writer.write_json(reports.MANIFEST_JSON, manifest.to_dict())
        except Exception as e:
            self.writer.remove_all()
            raise StageError("manifest", e)

        manifest.path = self.writer.path(reports.MANIFEST_JSON)
        self.logger.info(
            "run finished: N_h=%d N_q=%d, reports in %s",
            manifest.n_haystack,
            manifest.n_queries,
            self.config.output_dir,
        )
        return manifest

    def _run_stage(self, stage: str, body) -> None:
        self.logger.info("stage %s", stage)
        started = time.monotonic()

        try:
            body()
        except Exception as e:
            self.logger.error("stage %s failed: %s", stage, e)
            self.writer.remove_all()
            raise StageError(stage, e) from e

        self.stage_seconds[stage] = time.monotonic() - started
        self.logger.debug(
            "stage %s took %.3fs", stage, self.stage_seconds[stage]
        )

    def _stage_store(self) -> None:
        source = self.config.input
        if source.synthetic is not None:
            self.store = generate(source.synthetic)
            return

        self.store = load_store(source.path, source.format)
        self.input_checksums[os.path.basename(source.path)] = sha256_file(
            source.path
        )
        self.logger.info("loaded %r", self.store)

    def _stage_split(self) -> None:
        split = self.config.split
        if split is not None:
            self.store, self.dropped = split_documents(
                self.store, split.haystack_docs, split.query_docs,
                self.config.split_seed,
            )
        elif not self.store.is_split:
            raise ConfigError(
                "store has no haystack/query split and no split is configured"
            )

        self.haystack = build_haystack(self.store)
        self.logger.info(
            "haystack of %d authors (%d dropped)",
            len(self.haystack),
            len(self.dropped),
        )

    def _stage_queries(self) -> None:
        config = self.config.queries
        eligible = self.store.query_author_ids
        count = len(eligible) if config.authors is None else config.authors

        if count > len(self.haystack):
            raise DataError(
                "%d query authors requested, haystack has %d"
                % (count, len(self.haystack))
            )
        if count > len(eligible):
            raise DataError(
                "%d query authors requested, %d have query documents"
                % (count, len(eligible))
            )

        rng = make_rng(self.config.query_seed)
        picked = rng.choice(len(eligible), size=count, replace=False)
        self.query_author_ids = sorted(eligible[i] for i in picked)

        self.queries = sample_queries(
            self.store,
            self.query_author_ids,
            config.queries_per_author,
            config.docs_per_query,
            self.config.query_seed,
            disjoint=config.disjoint,
        )

        if len(self.queries) != count * config.queries_per_author:
            raise InvariantError(
                "issued %d queries for %d authors x %d"
                % (len(self.queries), count, config.queries_per_author)
            )
        self.logger.info(
            "%d queries from %d query authors (%s mode)",
            len(self.queries),
            count,
            config.mode,
        )

    def _stage_rank(self) -> None:
        ranking = self.config.ranking
        k = min(self.config.max_k, len(self.haystack))

        self.slices = rank_batch(
            self.queries, self.haystack, MODE_TOP_K, k=k,
            threads=ranking.threads, chunk_size=ranking.chunk_size,
        )

        if ranking.mode == MODE_FULL:
            self.table = rank_batch(
                self.queries, self.haystack, MODE_FULL,
                threads=ranking.threads, chunk_size=ranking.chunk_size,
            )
            self.table.check_permutations()

            from_slices = [s.needle_rank for s in self.slices]
            if list(self.table.needle_ranks()) != from_slices:
                raise InvariantError(
                    "needle ranks differ between full and top-k rankings"
                )

        if ranking.dump:
            reports.write_rankings(self.writer, self.slices, k)

    def _stage_metrics(self) -> None:
        config = self.config
        ranks = [rank for _, rank in needle_records(self.slices)]

        self.effectiveness = effectiveness_report(
            ranks, config.recall_k, config.ks
        )
        self.fairness = fairness_report(
            self.slices,
            [a.author_id for a in self.haystack],
            ks=config.ks,
            multipliers=config.multipliers,
            exceed_k=config.exceed_k,
            include_self_hits=config.include_self_hits,
            risk_population=config.risk_population,
        )
        self.logger.info(
            "R@%d=%.4f MRR=%.4f",
            config.recall_k,
            self.effectiveness.recall,
            self.effectiveness.mrr,
        )

        reports.write_effectiveness(self.writer, self.effectiveness)
        reports.write_fairness(self.writer, self.effectiveness, self.fairness)

    def _stage_geometry(self) -> None:
        config = self.config.geometry
        ranks = self.table

        if ranks is None:
            ranks = rank_sums(
                self.queries,
                self.haystack,
                exclude_self=config.exclude_self_queries,
                threads=self.config.ranking.threads,
                chunk_size=self.config.ranking.chunk_size,
            )

        self.geometry = geometry_report(
            self.haystack,
            ranks,
            curve_bins=config.curve_bins,
            histogram_bins=config.histogram_bins,
            exclude_self=config.exclude_self_queries,
        )

        if not config.exclude_self_queries:
            n_h = len(self.haystack)
            average = sum(a.mean_rank for a in self.geometry.authors) / n_h
            if abs(average - (n_h + 1) / 2.0) > 1e-9 * n_h:
                raise InvariantError(
                    "author-averaged mean rank %r != (N_h+1)/2" % average
                )

        reports.write_geometry(self.writer, self.geometry)

    def _stage_stats(self) -> None:
        config = self.config.stats
        mrr = per_author_mrr(needle_records(self.slices))

        self.stats_n = min(config.n, len(mrr) // 2)
        if self.stats_n < 1:
            raise DataError(
                "hypothesis tests need at least 2 needle authors, got %d"
                % len(mrr)
            )
        if self.stats_n < config.n:
            self.logger.warning(
                "only %d needle authors; MRR groups reduced from %d to %d",
                len(mrr),
                config.n,
                self.stats_n,
            )

        distances = self.geometry.distances()
        groups = select_mrr_groups(mrr, self.stats_n, self.config.stats_seed)
        results = run_hypotheses(groups, distances, config.alpha)

        reports.write_histograms(
            self.writer,
            self.geometry.histogram,
            group_distance_histograms(
                groups, distances, self.config.geometry.histogram_bins
            ),
        )
        reports.write_hypotheses(self.writer, results, groups)

    def _summary(self) -> Dict:
        return {
            "recall_k": self.effectiveness.recall_k,
            "recall": self.effectiveness.recall,
            "mrr": self.effectiveness.mrr,
            "recall_at": {
                str(k): v for k, v in self.effectiveness.recall_at.items()
            },
            "maui": {
                str(k): v for k, v in self.fairness.maui_by_k().items()
            },
            "spearman": self.geometry.correlation.coefficient,
        }

    def _manifest(self) -> RunManifest:
        return RunManifest(
            config=self.config.to_dict(),
            config_hash=config_hash(self.config),
            version=__version__,
            input_checksums=self.input_checksums,
            store_digest=store_digest(self.store),
            n_haystack=len(self.haystack),
            n_queries=len(self.queries),
            n_query_authors=len(self.query_author_ids),
            dropped_authors=len(self.dropped),
            stats_n=self.stats_n,
            stage_seconds=dict(self.stage_seconds),
            summary=self._summary(),
            report_checksums=self.writer.checksums(
                exclude=(reports.MANIFEST_JSON,)
            ),
        )


def run(config: RunConfig, logger=None) -> RunManifest:
    return Runner(config, logger=logger).run()


COMPARE_HEADER = ("run", "n_haystack", "n_queries")


def compare(
    manifests: Sequence[RunManifest],
) -> Tuple[List[str], List[List]]:
    """
    Side-by-side summary of runs, one row per run.

    :return: (header, rows)
    :raises IncompatibleRunsError: when N_h, N_q or ks differ
    """
    if not manifests:
        raise DataError("nothing to compare")

    first = manifests[0]
    # summaries read back from JSON have their keys in string order
    ks = sorted(first.summary["maui"], key=int)
    recall_ks = sorted(first.summary["recall_at"], key=int)

    for other in manifests[1:]:
        for name, a, b in (
            ("N_h", first.n_haystack, other.n_haystack),
            ("N_q", first.n_queries, other.n_queries),
            ("ks", ks, sorted(other.summary["maui"], key=int)),
        ):
            if a != b:
                raise IncompatibleRunsError(
                    "incompatible runs: %s differs (%r vs %r)" % (name, a, b)
                )

    header = list(COMPARE_HEADER)
    header += ["R@%s" % k for k in recall_ks]
    header += ["MRR"]
    header += ["MAUI_%s" % k for k in ks]

    rows = []
    for manifest in manifests:
        summary = manifest.summary
        label = manifest.path or manifest.config.get("output_dir", "")
        if os.path.basename(label) == reports.MANIFEST_JSON:
            label = os.path.dirname(label)
        rows.append(
            [os.path.basename(os.path.normpath(label)),
             manifest.n_haystack, manifest.n_queries]
            + [summary["recall_at"].get(k) for k in recall_ks]
            + [summary["mrr"]]
            + [summary["maui"][k] for k in ks]
        )

    return header, rows


def config_hash(config: RunConfig) -> str:
    return sha256_bytes(canonical_json(config.to_dict()).encode("utf-8"))
