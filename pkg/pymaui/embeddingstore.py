"""
Document embeddings grouped by author, their haystack/query split and the
author-level and query-level aggregates built from them.

Vectors are L2-normalised when a store is built, so cosine similarity is a
plain dot product everywhere downstream.
"""
import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from pymaui.exceptions import (
    ConfigError,
    DataError,
    DegenerateAggregateError,
    InvariantError,
    StoreFormatError,
)
from pymaui.utils import make_rng

logger = logging.getLogger(__name__)

FORMAT_JSONL = "jsonl"
FORMAT_BINARY = "binary-matrix"
FORMATS = (FORMAT_JSONL, FORMAT_BINARY)

HAYSTACK = "haystack"
QUERY = "query"

# use every query-split document of an author in one query
ALL = "all"

AGGREGATE_MEAN = "mean"

UNIT_TOLERANCE = 1e-6
DEGENERATE_NORM = 1e-12

BINARY_DTYPE = "f32"


@dataclass(frozen=True)
class DocumentEmbedding:
    author_id: str
    doc_id: str
    vector: np.ndarray


@dataclass(frozen=True)
class AuthorEmbedding:
    author_id: str
    vector: np.ndarray
    doc_count: int


@dataclass(frozen=True)
class QueryEmbedding:
    query_id: str
    true_author_id: str
    vector: np.ndarray
    source_doc_ids: Tuple[str, ...]


@dataclass(frozen=True)
class AuthorSplit:
    haystack: Tuple[str, ...]
    query: Tuple[str, ...]


def check_unit(vector: np.ndarray, what: str = "vector") -> None:
    norm = float(np.linalg.norm(vector))
    if abs(norm - 1.0) > UNIT_TOLERANCE:
        raise InvariantError("%s is not unit-norm (norm=%r)" % (what, norm))


def _frozen(vector: np.ndarray) -> np.ndarray:
    vector.setflags(write=False)
    return vector


class EmbeddingStore:
    """
    Immutable collection of document embeddings.

    :param documents: documents in the order they were read
    :param splits: optional per-author haystack/query assignment
    :param str source: path the documents were read from, if any
    """

    def __init__(
        self,
        documents: Iterable[DocumentEmbedding],
        splits: Optional[Dict[str, AuthorSplit]] = None,
        source: Optional[str] = None,
    ) -> None:
        self.source = source
        self._order: List[Tuple[str, str]] = []
        self._docs: Dict[str, Dict[str, DocumentEmbedding]] = {}
        self.dimension = None

        for document in documents:
            self._add(document)

        if not self._order:
            raise StoreFormatError("empty store: no documents")

        self.normalized = True
        self._splits = None

        if splits is not None:
            self._splits = self._validated_splits(splits)

    def _add(self, document: DocumentEmbedding) -> None:
        where = "document (%s, %s)" % (document.author_id, document.doc_id)
        vector = np.asarray(document.vector, dtype=np.float64).reshape(-1)

        if self.dimension is None:
            if vector.size < 2:
                raise StoreFormatError(
                    "%s: dimension must be at least 2, got %d"
                    % (where, vector.size)
                )
            self.dimension = int(vector.size)

        elif vector.size != self.dimension:
            raise StoreFormatError(
                "%s: dimension mismatch, expected %d got %d"
                % (where, self.dimension, vector.size)
            )

        if not np.all(np.isfinite(vector)):
            raise StoreFormatError("%s: non-finite component" % where)

        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            raise StoreFormatError("%s: zero vector" % where)

        author_docs = self._docs.setdefault(document.author_id, {})
        if document.doc_id in author_docs:
            raise StoreFormatError("%s: duplicate (author_id, doc_id)" % where)

        author_docs[document.doc_id] = DocumentEmbedding(
            document.author_id, document.doc_id, _frozen(vector / norm)
        )
        self._order.append((document.author_id, document.doc_id))

    def _validated_splits(self, splits: Dict[str, AuthorSplit]):
        if set(splits) != set(self._docs):
            raise DataError("split must assign every author of the store")

        for author_id, split in splits.items():
            docs = self._docs[author_id]

            if len(split.haystack) < 1:
                raise DataError(
                    "author %s has no haystack-split document" % author_id
                )

            if set(split.haystack) & set(split.query):
                raise DataError(
                    "author %s: haystack and query splits overlap" % author_id
                )

            for doc_id in split.haystack + split.query:
                if doc_id not in docs:
                    raise DataError(
                        "author %s: split names unknown document %s"
                        % (author_id, doc_id)
                    )

        return dict(splits)

    def with_splits(self, splits: Dict[str, AuthorSplit]) -> "EmbeddingStore":
        """Copy of this store restricted to the documents ``splits`` names."""
        documents = [
            self._docs[author_id][doc_id]
            for author_id, doc_id in self._order
            if author_id in splits
            and (
                doc_id in splits[author_id].haystack
                or doc_id in splits[author_id].query
            )
        ]
        return EmbeddingStore(documents, splits=splits, source=self.source)

    @property
    def author_ids(self) -> List[str]:
        return sorted(self._docs)

    @property
    def n_documents(self) -> int:
        return len(self._order)

    @property
    def is_split(self) -> bool:
        return self._splits is not None

    def __contains__(self, author_id) -> bool:
        return author_id in self._docs

    def __len__(self) -> int:
        return len(self._docs)

    def __repr__(self):
        return "<%s d=%s authors=%d documents=%d split=%s>" % (
            self.__class__.__name__,
            self.dimension,
            len(self._docs),
            self.n_documents,
            self.is_split,
        )

    def documents(self, author_id: str) -> List[DocumentEmbedding]:
        """Documents of one author, in the order they were read."""
        if author_id not in self._docs:
            raise DataError("unknown author id: %s" % author_id)
        return list(self._docs[author_id].values())

    def iter_documents(self) -> Iterable[DocumentEmbedding]:
        for author_id, doc_id in self._order:
            yield self._docs[author_id][doc_id]

    def split(self, author_id: str) -> AuthorSplit:
        if self._splits is None:
            raise DataError("store is not split")
        if author_id not in self._splits:
            raise DataError("unknown author id: %s" % author_id)
        return self._splits[author_id]

    def split_of(self, author_id: str, doc_id: str) -> Optional[str]:
        if self._splits is None:
            return None
        split = self._splits[author_id]
        if doc_id in split.haystack:
            return HAYSTACK
        if doc_id in split.query:
            return QUERY
        return None

    def haystack_documents(self, author_id: str) -> List[DocumentEmbedding]:
        docs = self._docs[author_id]
        return [docs[doc_id] for doc_id in self.split(author_id).haystack]

    def query_documents(self, author_id: str) -> List[DocumentEmbedding]:
        docs = self._docs[author_id]
        return [docs[doc_id] for doc_id in self.split(author_id).query]

    @property
    def query_author_ids(self) -> List[str]:
        """Authors that have at least one query-split document."""
        return [
            author_id
            for author_id in self.author_ids
            if self._splits is not None and self._splits[author_id].query
        ]


def _numeric_vector(vector, where: str) -> np.ndarray:
    if not isinstance(vector, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool)
        for x in vector
    ):
        raise StoreFormatError("%s: vector is not an array of numbers" % where)
    return np.asarray(vector, dtype=np.float64)


def _check_ids(author_id, doc_id, where: str) -> None:
    if not isinstance(author_id, str) or not isinstance(doc_id, str):
        raise StoreFormatError(
            "%s: author_id and doc_id must be strings" % where
        )


def _jsonl_lines(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            yield from enumerate(handle, start=1)
    except UnicodeDecodeError as ex:
        raise StoreFormatError("%s: not UTF-8 text (%s)" % (path, ex))
    except OSError as ex:
        raise DataError("cannot read %s: %s" % (path, ex))


def _read_jsonl(path: str) -> Tuple[List[DocumentEmbedding], Dict]:
    documents = []
    split_keys = {}

    for line_no, line in _jsonl_lines(path):
        if not line.strip():
            continue

        where = "%s:%d" % (path, line_no)
        try:
            record = json.loads(line)
            author_id = record["author_id"]
            doc_id = record["doc_id"]
            vector = record["vector"]
        except (ValueError, KeyError, TypeError) as ex:
            raise StoreFormatError("%s: malformed record (%s)" % (where, ex))

        _check_ids(author_id, doc_id, where)
        array = _numeric_vector(vector, where)
        documents.append(DocumentEmbedding(author_id, doc_id, array))

        if "split" in record:
            split_keys[(author_id, doc_id)] = record["split"]

    return documents, split_keys


def _data_file(manifest_path: str, manifest: Dict) -> str:
    name = manifest.get("data_file")
    if name is None:
        name = os.path.splitext(os.path.basename(manifest_path))[0] + ".f32"
    return os.path.join(os.path.dirname(os.path.abspath(manifest_path)), name)


def _read_binary(path: str) -> Tuple[List[DocumentEmbedding], Dict]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            manifest = json.load(handle)
        dimension = manifest["dimension"]
        count = manifest["count"]
        entries = manifest["documents"]
    except (OSError, ValueError, KeyError, TypeError) as ex:
        raise StoreFormatError("%s: malformed manifest (%s)" % (path, ex))

    for name, value in (("dimension", dimension), ("count", count)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise StoreFormatError(
                "%s: %s must be a non-negative integer" % (path, name)
            )
    if not isinstance(entries, list):
        raise StoreFormatError("%s: documents must be an array" % path)
    data_file = manifest.get("data_file")
    if data_file is not None and not isinstance(data_file, str):
        raise StoreFormatError("%s: data_file must be a string" % path)

    if manifest.get("dtype", BINARY_DTYPE) != BINARY_DTYPE:
        raise StoreFormatError(
            "%s: unsupported dtype %r" % (path, manifest.get("dtype"))
        )

    if count == 0:
        raise StoreFormatError("empty store: %s lists no documents" % path)

    if len(entries) != count:
        raise StoreFormatError(
            "%s: count is %d but %d documents are listed"
            % (path, count, len(entries))
        )

    data_file = _data_file(path, manifest)
    try:
        raw = np.fromfile(data_file, dtype="<f4")
    except OSError as ex:
        raise DataError("%s: cannot read raw file %s (%s)"
                        % (path, data_file, ex))
    if raw.size != count * dimension:
        raise StoreFormatError(
            "%s: raw file holds %d floats, expected %d x %d"
            % (path, raw.size, count, dimension)
        )
    matrix = raw.reshape((count, dimension)).astype(np.float64)

    documents = []
    split_keys = {}
    for row, entry in enumerate(entries):
        try:
            author_id = entry["author_id"]
            doc_id = entry["doc_id"]
        except (KeyError, TypeError):
            raise StoreFormatError(
                "%s: manifest entry %d lacks author_id or doc_id" % (path, row)
            )
        _check_ids(author_id, doc_id, "%s: manifest entry %d" % (path, row))
        documents.append(DocumentEmbedding(author_id, doc_id, matrix[row]))
        if "split" in entry:
            split_keys[(author_id, doc_id)] = entry["split"]

    return documents, split_keys


def _splits_from_keys(
    documents: List[DocumentEmbedding], split_keys: Dict
) -> Optional[Dict[str, AuthorSplit]]:
    if not split_keys:
        return None

    if len(split_keys) != len(documents):
        raise StoreFormatError(
            "either every record or no record may carry a split key"
        )

    haystack: Dict[str, List[str]] = {}
    query: Dict[str, List[str]] = {}
    for document in documents:
        label = split_keys[(document.author_id, document.doc_id)]
        if label == HAYSTACK:
            haystack.setdefault(document.author_id, []).append(document.doc_id)
        elif label == QUERY:
            query.setdefault(document.author_id, []).append(document.doc_id)
        else:
            raise StoreFormatError("unknown split label %r" % label)

    authors = set(haystack) | set(query)
    return {
        author_id: AuthorSplit(
            tuple(haystack.get(author_id, ())), tuple(query.get(author_id, ()))
        )
        for author_id in authors
    }


def load_store(path: str, format: str = FORMAT_JSONL) -> EmbeddingStore:
    """
    Read a store from disk.

    :param str path: JSONL file, or the JSON manifest of a binary matrix
    :param str format: one of FORMATS
    :raises StoreFormatError: on any malformed or invalid record
    """
    if format not in FORMATS:
        raise ConfigError("unknown store format %r" % format)

    if not os.path.exists(path):
        raise DataError("store file not found: %s" % path)

    if format == FORMAT_JSONL:
        documents, split_keys = _read_jsonl(path)
    else:
        documents, split_keys = _read_binary(path)

    store = EmbeddingStore(
        documents,
        splits=_splits_from_keys(documents, split_keys),
        source=os.path.abspath(path),
    )
    logger.debug("loaded %r from %s", store, path)
    return store


def write_store(store: EmbeddingStore, path: str, format: str = FORMAT_JSONL):
    """
    Write a store in either format. Split labels are written when the store
    is split. Returns the list of files written.
    """
    if format not in FORMATS:
        raise ConfigError("unknown store format %r" % format)

    if format == FORMAT_JSONL:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for document in store.iter_documents():
                record = {
                    "author_id": document.author_id,
                    "doc_id": document.doc_id,
                    "vector": [float(x) for x in document.vector],
                }
                label = store.split_of(document.author_id, document.doc_id)
                if label is not None:
                    record["split"] = label
                handle.write(json.dumps(record) + "\n")
        return [path]

    entries = []
    rows = []
    for document in store.iter_documents():
        entry = {"author_id": document.author_id, "doc_id": document.doc_id}
        label = store.split_of(document.author_id, document.doc_id)
        if label is not None:
            entry["split"] = label
        entries.append(entry)
        rows.append(document.vector)

    manifest = {
        "dimension": store.dimension,
        "count": len(entries),
        "dtype": BINARY_DTYPE,
        "data_file": os.path.splitext(os.path.basename(path))[0] + ".f32",
        "documents": entries,
    }
    data_path = _data_file(path, manifest)
    np.asarray(rows, dtype="<f4").tofile(data_path)

    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(manifest, handle, indent=1)
        handle.write("\n")

    return [path, data_path]


def split_documents(
    store: EmbeddingStore,
    haystack_docs_per_author: int,
    query_docs_per_author: int,
    seed: int,
) -> Tuple[EmbeddingStore, List[str]]:
    """
    Randomly assign each author's documents to disjoint haystack and query
    splits of the requested sizes.

    Authors with fewer than ``haystack + query`` documents are dropped.

    :return: (split store, ids of dropped authors)
    """
    if haystack_docs_per_author <= 0 or query_docs_per_author <= 0:
        raise ConfigError(
            "split sizes must be positive, got (%s, %s)"
            % (haystack_docs_per_author, query_docs_per_author)
        )

    needed = haystack_docs_per_author + query_docs_per_author
    rng = make_rng(seed)
    splits = {}
    dropped = []

    for author_id in store.author_ids:
        documents = store.documents(author_id)

        if len(documents) < needed:
            dropped.append(author_id)
            continue

        order = rng.permutation(len(documents))
        haystack = sorted(order[:haystack_docs_per_author])
        query = sorted(order[haystack_docs_per_author:needed])

        splits[author_id] = AuthorSplit(
            tuple(documents[i].doc_id for i in haystack),
            tuple(documents[i].doc_id for i in query),
        )

    if not splits:
        raise DataError(
            "all %d authors have fewer than %d documents"
            % (len(store), needed)
        )

    if dropped:
        logger.warning(
            "dropped %d of %d authors with fewer than %d documents",
            len(dropped),
            len(store),
            needed,
        )

    return store.with_splits(splits), dropped


def aggregate_author(
    vectors: Sequence[np.ndarray], method: str = AGGREGATE_MEAN
) -> np.ndarray:
    """
    Mean of unit vectors, re-normalised to unit length.

    :raises DegenerateAggregateError: when the mean is the zero vector
    """
    if method != AGGREGATE_MEAN:
        raise ConfigError("unknown aggregation method %r" % method)

    if len(vectors) == 0:
        raise DataError("cannot aggregate an empty list of vectors")

    stacked = np.asarray(vectors, dtype=np.float64)
    if stacked.ndim != 2:
        raise DataError("vectors must share one dimension")

    mean = stacked.mean(axis=0)
    norm = float(np.linalg.norm(mean))

    if norm <= DEGENERATE_NORM:
        raise DegenerateAggregateError("degenerate aggregate: zero mean")

    aggregate = mean / norm
    check_unit(aggregate, "aggregate")
    return _frozen(aggregate)


def build_haystack(store: EmbeddingStore) -> List[AuthorEmbedding]:
    """One embedding per author from haystack-split documents, by author_id."""
    haystack = []

    for author_id in store.author_ids:
        documents = store.haystack_documents(author_id)

        try:
            vector = aggregate_author([d.vector for d in documents])
        except DegenerateAggregateError:
            raise DegenerateAggregateError(
                "degenerate aggregate for haystack author %s" % author_id
            )

        haystack.append(AuthorEmbedding(author_id, vector, len(documents)))

    logger.debug("built haystack of %d authors", len(haystack))
    return haystack


def sample_queries(
    store: EmbeddingStore,
    query_author_ids: Sequence[str],
    queries_per_author: int,
    docs_per_query: Union[int, str],
    seed: int,
    disjoint: bool = False,
) -> List[QueryEmbedding]:
    """
    Build query embeddings from query-split documents.

    Each query aggregates ``docs_per_query`` documents drawn without
    replacement (or all query documents when ``docs_per_query`` is ALL).
    With ``disjoint`` the queries of one author share no document.
    Query ids have the form ``<author_id>#<index>``.
    """
    if queries_per_author < 1:
        raise ConfigError("queries_per_author must be at least 1")

    use_all = docs_per_query == ALL or docs_per_query is None
    if not use_all and int(docs_per_query) < 1:
        raise ConfigError("docs_per_query must be at least 1 or 'all'")

    rng = make_rng(seed)
    queries = []

    for author_id in sorted(set(query_author_ids)):
        if author_id not in store:
            raise DataError("unknown query author id: %s" % author_id)

        documents = store.query_documents(author_id)
        available = len(documents)

        if use_all:
            if available == 0:
                raise DataError(
                    "author %s has no query-split documents" % author_id
                )
            picks = [np.arange(available)] * queries_per_author

        else:
            size = int(docs_per_query)
            needed = size * queries_per_author if disjoint else size

            if available < needed:
                raise DataError(
                    "author %s has %d query-split documents, %d needed"
                    % (author_id, available, needed)
                )

            if disjoint:
                order = rng.permutation(available)
                picks = [
                    np.sort(order[i * size:(i + 1) * size])
                    for i in range(queries_per_author)
                ]
            else:
                picks = [
                    np.sort(rng.choice(available, size=size, replace=False))
                    for _ in range(queries_per_author)
                ]

        for index, pick in enumerate(picks):
            chosen = [documents[i] for i in pick]
            queries.append(
                QueryEmbedding(
                    query_id="%s#%d" % (author_id, index),
                    true_author_id=author_id,
                    vector=aggregate_author([d.vector for d in chosen]),
                    source_doc_ids=tuple(d.doc_id for d in chosen),
                )
            )

    logger.debug(
        "sampled %d queries for %d authors",
        len(queries),
        len(set(query_author_ids)),
    )
    return queries

