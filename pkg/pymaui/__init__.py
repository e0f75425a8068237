# -*- coding: utf-8 -*-

"""
pymaui
This module evaluates embed-and-rank authorship attribution: every
candidate author in a haystack is represented by one embedding, each query
(a set of held-out documents) is embedded the same way, and the haystack is
ranked by cosine similarity to the query.

Besides the usual effectiveness metrics (R@k and MRR of the true author),
it measures how fairly the *risk of misattribution* is spread over the
haystack. Under random rankings every author is expected to appear in the
top k of ``E_k = ceil(k * N_q / N_h)`` queries; the Misattribution
Unfairness Index MAUI_k sums how far authors exceed that expectation and
normalises by the worst case, so 0 is most fair and 1 least fair.

Authors that sit close to the centroid of all author embeddings tend to be
retrieved for everyone's queries. The geometry module measures each
author's distance to the centroid and relates it to their mean rank, and
the hypotheses module tests with one-sided Mann-Whitney U tests whether
authors with high or low MRR differ in that distance.

Embeddings come from a JSONL file or a float32 binary matrix with a JSON
manifest, or from a synthetic population with controlled geometry:

    store = generate(
        PopulationSpec(
            n_authors=500,
            docs_per_author=4,
            dimension=32,
            generator=IsotropicGaussian(mean_norm=1.0, sigma=0.25),
            seed=7,
        )
    )
    haystack = build_haystack(store)
    queries = sample_queries(store, store.query_author_ids, 1, ALL, seed=7)
    slices = rank_batch(queries, haystack, MODE_TOP_K, k=10)
    tally = tally_topk(slices, 10, [a.author_id for a in haystack])
    print(maui(tally))

Whole experiments are described by a JSON config and executed with
`run(load_config(path))` or the `pymaui run --config` command, which writes
CSV and JSON reports plus a manifest recording everything needed to
reproduce them.

Module-specific errors derive from `MauiError` and are expected to be
handled by the user of the library; each carries the exit code the command
line tool uses for it.
"""

__author__ = "Sarusani"
__email__ = "sarusani@gmail.com"
__version__ = "0.1.0"
__url__ = "https://github.com/sarusani/pymaui"

# flake8: noqa
from .exceptions import (
    ConfigError,
    DataError,
    InvariantError,
    MauiError,
    StageError,
)
from .embeddingstore import (
    ALL,
    FORMAT_BINARY,
    FORMAT_JSONL,
    FORMATS,
    AuthorEmbedding,
    DocumentEmbedding,
    EmbeddingStore,
    QueryEmbedding,
    aggregate_author,
    build_haystack,
    load_store,
    sample_queries,
    split_documents,
    write_store,
)
from .ranking import MODE_FULL, MODE_TOP_K, RankTable, TopKSlice
from .ranking import rank_batch, rank_query, rank_sums
from .fairness import (
    effectiveness_report,
    expected_count,
    exceed_table,
    fairness_report,
    maui,
    mean_reciprocal_rank,
    per_author_mrr,
    recall_at_k,
    risk_ratio_stats,
    tally_topk,
)
from .geometry import (
    binned_curve,
    centroid,
    distance_histogram,
    distance_to_centroid,
    geometry_report,
    mean_rank_per_author,
    min_max_normalize,
    spearman,
)
from .hypotheses import mann_whitney_u, run_hypotheses, select_mrr_groups
from .synth import (
    IsotropicGaussian,
    PlantedHubs,
    PopulationSpec,
    RadiusBands,
    generate,
    planted_unfairness,
    population_spec_from_dict,
)
from .runner import (
    RunConfig,
    RunManifest,
    Runner,
    compare,
    load_config,
    load_manifest,
    run,
)
