"""Sparse BM25/TF-IDF indexing and cosine ranking over preprocessed statements.

Documents are kept both as per-statement SparseVector values (the contract
representation, sorted term ids + cached norm) and as a CSR matrix used for
batch scoring. Statement rows are sorted by id, so row index order doubles as
the id-ascending tie-break everywhere.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .ranking import Ranking
from .textpipe import TokenList


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.5
    b: float = 0.75

    def __post_init__(self):
        if not self.k1 > 0:
            raise ValueError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0,1], got {self.b}")


@dataclass
class Vocabulary:
    term_to_id: dict[str, int]
    id_to_term: list[str]

    def __len__(self) -> int:
        return len(self.id_to_term)


class SparseVector:
    """Sorted (term_id, weight>0) pairs with a cached Euclidean norm."""

    __slots__ = ("term_ids", "weights", "norm")

    def __init__(self, term_ids, weights):
        self.term_ids = np.asarray(term_ids, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.term_ids.shape != self.weights.shape:
            raise ValueError("term_ids and weights length mismatch")
        if self.term_ids.size and not np.all(np.diff(self.term_ids) > 0):
            raise ValueError("term ids must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("all weights must be > 0")
        self.norm = float(np.sqrt(self.weights @ self.weights))

    def pairs(self) -> list[tuple[int, float]]:
        return list(zip(self.term_ids.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return int(self.term_ids.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVector)
            and np.array_equal(self.term_ids, other.term_ids)
            and np.array_equal(self.weights, other.weights)
        )


EMPTY_VECTOR = SparseVector([], [])


def cosine(a: SparseVector, b: SparseVector) -> float:
    """Cosine similarity; 0 when either vector is empty."""
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    _, ia, ib = np.intersect1d(a.term_ids, b.term_ids, assume_unique=True, return_indices=True)
    dot = float(a.weights[ia] @ b.weights[ib])
    return min(1.0, dot / (a.norm * b.norm))


def _idf(doc_count: int, doc_freq: np.ndarray) -> np.ndarray:
    # Robertson "+1 inside log" variant: strictly positive for df <= N.
    return np.log(1.0 + (doc_count - doc_freq + 0.5) / (doc_freq + 0.5))


@dataclass
class CorpusIndex:
    vocab: Vocabulary
    doc_ids: list[str]                 # sorted ascending; row order everywhere
    doc_freq: np.ndarray
    doc_count: int
    avg_doc_len: float
    doc_lengths: np.ndarray
    doc_vectors: list[SparseVector]    # BM25-weighted
    params: Bm25Params
    counts: sp.csr_matrix = field(repr=False, default=None)
    _row_of: dict[str, int] = field(default_factory=dict, repr=False)
    _bm25_matrix: sp.csr_matrix | None = field(default=None, repr=False)
    _bm25_norms: np.ndarray | None = field(default=None, repr=False)
    _tfidf_matrix: sp.csr_matrix | None = field(default=None, repr=False)
    _tfidf_norms: np.ndarray | None = field(default=None, repr=False)

    def row_of(self, statement_id: str) -> int:
        return self._row_of[statement_id]

    def bm25_matrix(self) -> tuple[sp.csr_matrix, np.ndarray]:
        if self._bm25_matrix is None:
            rows, cols, vals = [], [], []
            for r, vec in enumerate(self.doc_vectors):
                rows.extend([r] * len(vec))
                cols.extend(vec.term_ids.tolist())
                vals.extend(vec.weights.tolist())
            self._bm25_matrix = sp.csr_matrix(
                (vals, (rows, cols)), shape=(self.doc_count, len(self.vocab))
            )
            self._bm25_norms = np.array([v.norm for v in self.doc_vectors])
        return self._bm25_matrix, self._bm25_norms

    def tfidf_matrix(self) -> tuple[sp.csr_matrix, np.ndarray]:
        # Built on demand; tf * ln(N/df) zeroes out terms present in every doc.
        if self._tfidf_matrix is None:
            idf = np.log(self.doc_count / self.doc_freq)
            mat = self.counts.multiply(idf[np.newaxis, :]).tocsr()
            mat.eliminate_zeros()
            self._tfidf_matrix = mat
            self._tfidf_norms = np.sqrt(mat.multiply(mat).sum(axis=1)).A1
        return self._tfidf_matrix, self._tfidf_norms

    def dense(self, vec: SparseVector) -> np.ndarray:
        out = np.zeros(len(self.vocab))
        out[vec.term_ids] = vec.weights
        return out


def build_index(
    tokenized: list[tuple[str, TokenList]], params: Bm25Params = Bm25Params()
) -> CorpusIndex:
    """Build corpus statistics and BM25 document vectors.

    Term ids are assigned in first-occurrence order over statements sorted by
    id, so rebuilding from the same snapshot is bit-identical.
    """
    if not tokenized:
        raise DataError("cannot build an index over an empty corpus")
    tokenized = sorted(tokenized, key=lambda pair: pair[0])
    if all(len(tokens) == 0 for _, tokens in tokenized):
        raise DataError("cannot build an index: all documents are empty after preprocessing")

    term_to_id: dict[str, int] = {}
    id_to_term: list[str] = []
    rows, cols, vals = [], [], []
    doc_lengths = np.zeros(len(tokenized), dtype=np.int64)
    for r, (_, tokens) in enumerate(tokenized):
        doc_lengths[r] = len(tokens)
        for term, tf in Counter(tokens.tokens).items():
            tid = term_to_id.get(term)
            if tid is None:
                tid = len(id_to_term)
                term_to_id[term] = tid
                id_to_term.append(term)
            rows.append(r)
            cols.append(tid)
            vals.append(tf)
    vocab = Vocabulary(term_to_id, id_to_term)
    doc_count = len(tokenized)
    counts = sp.csr_matrix(
        (vals, (rows, cols)), shape=(doc_count, len(vocab)), dtype=np.float64
    )
    counts.sort_indices()
    doc_freq = np.asarray((counts > 0).sum(axis=0)).ravel().astype(np.int64)
    avg_doc_len = float(doc_lengths.mean())
    idf = _idf(doc_count, doc_freq)

    k1, b = params.k1, params.b
    doc_vectors = []
    for r in range(doc_count):
        start, end = counts.indptr[r], counts.indptr[r + 1]
        tids = counts.indices[start:end]
        tf = counts.data[start:end]
        denom = tf + k1 * (1.0 - b + b * doc_lengths[r] / avg_doc_len)
        weights = idf[tids] * tf * (k1 + 1.0) / denom
        doc_vectors.append(SparseVector(tids, weights))

    doc_ids = [sid for sid, _ in tokenized]
    return CorpusIndex(
        vocab=vocab,
        doc_ids=doc_ids,
        doc_freq=doc_freq,
        doc_count=doc_count,
        avg_doc_len=avg_doc_len,
        doc_lengths=doc_lengths,
        doc_vectors=doc_vectors,
        params=params,
        counts=counts,
        _row_of={sid: r for r, sid in enumerate(doc_ids)},
    )


def query_vector(
    tokens: TokenList, index: CorpusIndex, weighting: str = "bm25"
) -> SparseVector:
    """Vectorize a query in the index's term space; OOV tokens are dropped."""
    counts = Counter(
        index.vocab.term_to_id[t] for t in tokens.tokens if t in index.vocab.term_to_id
    )
    if not counts:
        return EMPTY_VECTOR
    tids = np.array(sorted(counts), dtype=np.int64)
    tf = np.array([counts[t] for t in tids], dtype=np.float64)
    if weighting == "bm25":
        k1, b = index.params.k1, index.params.b
        idf = _idf(index.doc_count, index.doc_freq[tids])
        denom = tf + k1 * (1.0 - b + b * len(tokens) / index.avg_doc_len)
        weights = idf * tf * (k1 + 1.0) / denom
    elif weighting == "tfidf":
        weights = tf * np.log(index.doc_count / index.doc_freq[tids])
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    keep = weights > 0
    if not keep.all():
        tids, weights = tids[keep], weights[keep]
    if tids.size == 0:
        return EMPTY_VECTOR
    return SparseVector(tids, weights)


def _cosine_scores(
    query: SparseVector, matrix: sp.csr_matrix, norms: np.ndarray, vocab_size: int
) -> np.ndarray:
    if query.norm == 0.0:
        return np.zeros(matrix.shape[0])
    dense = np.zeros(vocab_size)
    dense[query.term_ids] = query.weights
    dots = matrix @ dense
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(norms > 0, dots / (norms * query.norm), 0.0)
    return scores


def _top_k(scores: np.ndarray, doc_ids: list[str], k: int) -> list[tuple[str, float]]:
    # Sort by score descending, then row index (== id ascending).
    order = np.lexsort((np.arange(scores.size), -scores))[:k]
    return [(doc_ids[r], float(scores[r])) for r in order]


def bm25_rank(
    query: SparseVector, index: CorpusIndex, k: int, question_id: str = ""
) -> Ranking:
    """Single-shot BM25 cosine ranking (the non-iterative baseline order)."""
    if k <= 0:
        raise ValueError(f"K must be positive, got {k}")
    matrix, norms = index.bm25_matrix()
    scores = _cosine_scores(query, matrix, norms, len(index.vocab))
    return Ranking(question_id, _top_k(scores, index.doc_ids, k))


def tfidf_rank(
    query: SparseVector, index: CorpusIndex, k: int, question_id: str = ""
) -> Ranking:
    """TF-IDF cosine ranking; the query should be tfidf-weighted."""
    if k <= 0:
        raise ValueError(f"K must be positive, got {k}")
    matrix, norms = index.tfidf_matrix()
    scores = _cosine_scores(query, matrix, norms, len(index.vocab))
    return Ranking(question_id, _top_k(scores, index.doc_ids, k))
