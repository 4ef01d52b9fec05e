"""Ranking carrier plus the candidate-export file format shared across stages.

Candidate export format (consumed by re-rankers and ensembling):
  header  question_id<TAB>rank<TAB>statement_id<TAB>score
  ranks 0-based, one block per question in question order.

Submission format: header-less question_id<TAB>statement_id lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError


@dataclass
class Ranking:
    question_id: str
    items: list[tuple[str, float | None]] = field(default_factory=list)

    def __post_init__(self):
        ids = [sid for sid, _ in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate statement ids in ranking for {self.question_id}")

    def ids(self) -> list[str]:
        return [sid for sid, _ in self.items]


def write_candidates(rankings: list[Ranking], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("question_id\trank\tstatement_id\tscore\n")
        for ranking in rankings:
            for rank, (sid, score) in enumerate(ranking.items):
                rendered = "" if score is None else f"{score:.6f}"
                fh.write(f"{ranking.question_id}\t{rank}\t{sid}\t{rendered}\n")


def read_candidates(path: str | Path) -> list[Ranking]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t") != ["question_id", "rank", "statement_id", "score"]:
        raise DataError(f"{path}: not a candidate export file (bad header)")
    rankings: list[Ranking] = []
    current_qid: str | None = None
    current_items: list[tuple[str, float | None]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise DataError(f"{path}:{lineno}: expected 4 fields, got {len(fields)}")
        qid, _rank, sid, raw_score = fields
        score = float(raw_score) if raw_score else None
        if qid != current_qid:
            if current_qid is not None:
                rankings.append(Ranking(current_qid, current_items))
            current_qid, current_items = qid, []
        current_items.append((sid, score))
    if current_qid is not None:
        rankings.append(Ranking(current_qid, current_items))
    return rankings


def read_rankings(path: str | Path) -> list[Ranking]:
    """Read either a candidate export file or a header-less submission file."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("question_id\trank"):
        return read_candidates(path)
    rankings: list[Ranking] = []
    current_qid: str | None = None
    current_items: list[tuple[str, float | None]] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataError(f"{path}:{lineno}: expected 2 fields, got {len(fields)}")
        qid, sid = fields
        if qid != current_qid:
            if current_qid is not None:
                rankings.append(Ranking(current_qid, current_items))
            current_qid, current_items = qid, []
        current_items.append((sid, None))
    if current_qid is not None:
        rankings.append(Ranking(current_qid, current_items))
    return rankings
