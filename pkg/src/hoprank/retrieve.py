"""Iterative BM25 retrieval (I-BM25) and its recall-driven hyperparameter tuner.

Each iteration scores the remaining pool by cosine against the current query
vector, emits the top n, max-merges the selected document vectors (down-scaled
by a constant factor) into the query, and grows n geometrically until the pool
is empty. The output order is selection order: iteration-major, similarity
descending within an iteration, statement id ascending on ties.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .corpus import Question, RatingTable, question_query_text
from .errors import DataError
from .index import Bm25Params, CorpusIndex, query_vector
from .ranking import Ranking
from .textpipe import PreprocessConfig, preprocess

QUERY_MODES = ("correct_answer_only", "all_choices")


@dataclass(frozen=True)
class IbmParams:
    n0: int = 16
    growth: float = 2.0
    downscale: float = 0.5
    K: int = 200
    query_mode: str = "correct_answer_only"
    bm25: Bm25Params = field(default_factory=Bm25Params)

    def __post_init__(self):
        if self.n0 < 1:
            raise ValueError(f"n0 must be >= 1, got {self.n0}")
        if self.growth < 1.0:
            raise ValueError(f"growth must be >= 1, got {self.growth}")
        if not 0.0 <= self.downscale <= 1.0:
            raise ValueError(f"downscale must be in [0,1], got {self.downscale}")
        if self.K < self.n0:
            raise ValueError(f"K ({self.K}) must be >= n0 ({self.n0})")
        if self.query_mode not in QUERY_MODES:
            raise ValueError(f"unknown query mode {self.query_mode!r}")


def ibm25_retrieve(
    question: Question,
    index: CorpusIndex,
    params: IbmParams,
    pre_cfg: PreprocessConfig,
) -> Ranking:
    """Rank up to params.K statements for one question by iterative retrieval."""
    if index.doc_count == 0:
        raise DataError("empty corpus index")
    tokens = preprocess(question_query_text(question, params.query_mode), pre_cfg)
    qvec = query_vector(tokens, index, weighting="bm25")

    matrix, doc_norms = index.bm25_matrix()
    vocab_size = matrix.shape[1]
    q = np.zeros(vocab_size)
    q[qvec.term_ids] = qvec.weights

    n_docs = index.doc_count
    in_pool = np.ones(n_docs, dtype=bool)
    row_order = np.arange(n_docs)
    out: list[tuple[str, float]] = []
    n = params.n0
    while in_pool.any():
        qnorm = float(np.sqrt(q @ q))
        if qnorm > 0.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                cos = np.where(doc_norms > 0, (matrix @ q) / (doc_norms * qnorm), 0.0)
        else:
            cos = np.zeros(n_docs)
        cos = np.where(in_pool, cos, -np.inf)
        take = min(n, int(in_pool.sum()))
        # score descending, then row index (== statement id) ascending
        selected = np.lexsort((row_order, -cos))[:take]
        out.extend((index.doc_ids[r], float(cos[r])) for r in selected)
        if params.downscale > 0.0:
            agg = matrix[selected].max(axis=0).toarray().ravel()
            q = np.maximum(q, params.downscale * agg)
        in_pool[selected] = False
        n = math.ceil(n * params.growth)
    return Ranking(question.id, out[: params.K])


def retrieve_all(
    questions: list[Question],
    index: CorpusIndex,
    params: IbmParams,
    pre_cfg: PreprocessConfig,
    threads: int | None = None,
) -> list[Ranking]:
    """Run I-BM25 per question over a read-only shared index.

    Output order follows the input question order regardless of thread count.
    """
    if threads is None:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if threads == 1 or len(questions) <= 1:
        return [ibm25_retrieve(q, index, params, pre_cfg) for q in questions]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda q: ibm25_retrieve(q, index, params, pre_cfg), questions))


def recall_objective(
    rankings: list[Ranking], ratings: RatingTable, k: int
) -> float:
    """Mean over rating categories r >= 1 of per-question top-k recall.

    Per category, recall is averaged over the questions that have at least one
    statement with that rating.
    """
    per_category: dict[int, list[float]] = {}
    for ranking in rankings:
        rated = ratings.by_question.get(ranking.question_id)
        if not rated:
            continue
        top = set(ranking.ids()[:k])
        by_rating: dict[int, list[str]] = {}
        for sid, rating in rated.items():
            if rating >= 1:
                by_rating.setdefault(rating, []).append(sid)
        for rating, sids in by_rating.items():
            hit = sum(1 for sid in sids if sid in top)
            per_category.setdefault(rating, []).append(hit / len(sids))
    if not per_category:
        raise DataError("no rated statements among the evaluated questions")
    return float(
        np.mean([np.mean(values) for _, values in sorted(per_category.items())])
    )


def tune(
    param_grid: list[IbmParams],
    questions: list[Question],
    ratings: RatingTable,
    index: CorpusIndex,
    pre_cfg: PreprocessConfig,
    threads: int | None = None,
) -> tuple[IbmParams, list[tuple[IbmParams, float]]]:
    """Grid search maximizing average per-rating-category recall at each K.

    Returns the argmax config (ties broken by grid order) and the full report.
    """
    if not param_grid:
        raise DataError("empty parameter grid")
    report: list[tuple[IbmParams, float]] = []
    for params in param_grid:
        if params.bm25 != index.params:
            raise DataError(
                "grid config BM25 params differ from the index's; rebuild the index per BM25 group"
            )
        rankings = retrieve_all(questions, index, params, pre_cfg, threads=threads)
        report.append((params, recall_objective(rankings, ratings, params.K)))
    best = max(range(len(report)), key=lambda i: report[i][1])
    return report[best][0], report
