"""Graded-relevance evaluation: NDCG, Oracle NDCG, recall-by-rating curves.

DCG runs over the full submitted order; the ideal DCG is computed over ALL
statements rated > 0 for the question, including ones the ranking missed, so
truncated submissions cannot score a perfect 1. Default gain is exponential
(2^r - 1); linear gain is available behind the config flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import RatingTable
from .ranking import Ranking

GAINS = ("exponential", "linear")


@dataclass(frozen=True)
class EvalConfig:
    gain: str = "exponential"
    log_base: int = 2
    idcg_zero_policy: str = "score_zero"

    def __post_init__(self):
        if self.gain not in GAINS:
            raise ValueError(f"unknown gain {self.gain!r}")
        if self.log_base != 2:
            raise ValueError("log base is fixed at 2")
        if self.idcg_zero_policy != "score_zero":
            raise ValueError(f"unknown idcg_zero_policy {self.idcg_zero_policy!r}")


@dataclass
class EvalReport:
    per_question: dict[str, float]
    mean_ndcg: float
    question_count: int


def _gain(rating: int, cfg: EvalConfig) -> float:
    return float(2 ** rating - 1) if cfg.gain == "exponential" else float(rating)


def _dcg(ratings_in_order: list[int], cfg: EvalConfig) -> float:
    return sum(
        _gain(r, cfg) / math.log2(i + 2) for i, r in enumerate(ratings_in_order)
    )


def ndcg(ranking: Ranking, ratings: RatingTable, cfg: EvalConfig = EvalConfig()) -> float:
    """NDCG of one submitted order; unrated statements count as rating 0."""
    ids = ranking.ids()
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate statement ids in ranking for {ranking.question_id}")
    rated = ratings.by_question.get(ranking.question_id, {})
    dcg = _dcg([rated.get(sid, 0) for sid in ids], cfg)
    ideal = sorted(
        (r for r in rated.values() if r > 0), reverse=True
    )
    idcg = _dcg(ideal, cfg)
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def oracle_ndcg(
    retrieved: Ranking, ratings: RatingTable, cfg: EvalConfig = EvalConfig()
) -> float:
    """NDCG after perfectly reordering the retrieved set by true rating.

    Rated statements absent from the retrieved set cap the score below 1.
    """
    rated = ratings.by_question.get(retrieved.question_id, {})
    reordered = sorted(retrieved.ids(), key=lambda sid: (-rated.get(sid, 0), sid))
    return ndcg(
        Ranking(retrieved.question_id, [(sid, None) for sid in reordered]),
        ratings,
        cfg,
    )


def recall_by_rating(
    retrieved_per_question: list[Ranking],
    ratings: RatingTable,
    depths: list[int],
) -> dict[tuple[str, int], float]:
    """Micro-averaged recall per rating category and depth K.

    Keys are (category, K) where category is the rating as a string plus the
    aggregate ">0" row. Denominators count rated statements of the questions
    present in retrieved_per_question.
    """
    if any(k <= 0 for k in depths):
        raise ValueError("depths must be positive")
    categories: set[int] = set()
    hits: dict[tuple[int, int], int] = {}
    totals: dict[int, int] = {}
    for ranking in retrieved_per_question:
        rated = ratings.by_question.get(ranking.question_id, {})
        ids = ranking.ids()
        position = {sid: i for i, sid in enumerate(ids)}
        for sid, rating in rated.items():
            if rating < 1:
                continue
            categories.add(rating)
            totals[rating] = totals.get(rating, 0) + 1
            pos = position.get(sid)
            for k in depths:
                if pos is not None and pos < k:
                    hits[(rating, k)] = hits.get((rating, k), 0) + 1
    table: dict[tuple[str, int], float] = {}
    for rating in sorted(categories):
        for k in depths:
            table[(str(rating), k)] = hits.get((rating, k), 0) / totals[rating]
    grand_total = sum(totals.values())
    for k in depths:
        got = sum(hits.get((rating, k), 0) for rating in categories)
        table[(">0", k)] = got / grand_total if grand_total else 0.0
    return table


def evaluate_run(
    rankings: list[Ranking], ratings: RatingTable, cfg: EvalConfig = EvalConfig()
) -> EvalReport:
    """Per-question NDCG plus the arithmetic mean.

    Questions present in the rating table but missing from the run score 0.
    """
    by_qid = {r.question_id: r for r in rankings}
    qids = sorted(set(by_qid) | set(ratings.by_question))
    per_question = {
        qid: ndcg(by_qid.get(qid, Ranking(qid, [])), ratings, cfg) for qid in qids
    }
    mean = sum(per_question.values()) / len(per_question) if per_question else 0.0
    return EvalReport(per_question=per_question, mean_ndcg=mean, question_count=len(per_question))


def write_report(report: EvalReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("question_id\tndcg\n")
        for qid in sorted(report.per_question):
            fh.write(f"{qid}\t{report.per_question[qid]:.6f}\n")
        fh.write(f"mean_ndcg\t{report.mean_ndcg:.6f}\n")


def write_recall_table(
    table: dict[tuple[str, int], float], path: str | Path
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    def sort_key(item):
        (category, k), _ = item
        return (category != ">0", category.rjust(8, "0") if category != ">0" else "", k)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("rating\tk\trecall\n")
        for (category, k), recall in sorted(table.items(), key=sort_key):
            fh.write(f"{category}\t{k}\t{recall:.6f}\n")
