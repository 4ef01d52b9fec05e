"""File-level coupling with the retrieval pipeline and training pair assembly.

The snapshot, candidate export and score file formats are frozen contracts
owned by the retrieval side:
  statements.tsv   id, table_name, is_skipped_combined, text
  questions.tsv    id, split, answer_key, choices_json, question_text
  ratings.tsv      question_id, statement_id, rating
  candidates       question_id, rank, statement_id, score (0-based ranks)
  score file       question_id, statement_id, score
"""

from __future__ import annotations

import csv
import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

from . import RerankerError
from .config import RerankerConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingPair:
    question_id: str
    statement_id: str
    input_text_a: str
    input_text_b: str
    label: float

    def __post_init__(self):
        if self.label < 0:
            raise ValueError("label must be >= 0")
        if not self.input_text_a or not self.input_text_b:
            raise ValueError("pair texts must be non-empty")


def load_statements(snapshot_dir: str | Path) -> dict[str, str]:
    path = Path(snapshot_dir) / "statements.tsv"
    if not path.exists():
        raise RerankerError(f"snapshot file missing: {path}")
    out: dict[str, str] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row in reader:
            out[row[0]] = row[3]
    return out


def load_question_texts(
    snapshot_dir: str | Path, answer_separator: str = " "
) -> dict[str, str]:
    """Question text joined with its correct-answer choice, per question id."""
    path = Path(snapshot_dir) / "questions.tsv"
    if not path.exists():
        raise RerankerError(f"snapshot file missing: {path}")
    out: dict[str, str] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row in reader:
            qid, _split, key, choices_json, question_text = row[:5]
            choices = json.loads(choices_json)
            out[qid] = f"{question_text}{answer_separator}{choices[key]}"
    return out


def load_ratings(snapshot_dir: str | Path) -> dict[tuple[str, str], int]:
    path = Path(snapshot_dir) / "ratings.tsv"
    if not path.exists():
        raise RerankerError(f"snapshot file missing: {path}")
    out: dict[tuple[str, str], int] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row in reader:
            out[(row[0], row[1])] = int(row[2])
    return out


def read_candidates(path: str | Path) -> list[tuple[str, list[str]]]:
    """Candidate blocks in file order: (question_id, [statement_id...])."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t") != ["question_id", "rank", "statement_id", "score"]:
        raise RerankerError(f"{path}: not a candidate export file (bad header)")
    blocks: list[tuple[str, list[str]]] = []
    for line in lines[1:]:
        if not line.strip():
            continue
        qid, _rank, sid, _score = line.split("\t")
        if not blocks or blocks[-1][0] != qid:
            blocks.append((qid, []))
        blocks[-1][1].append(sid)
    return blocks


def write_score_file(
    rows: list[tuple[str, str, float]], path: str | Path
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("question_id\tstatement_id\tscore\n")
        for qid, sid, score in rows:
            fh.write(f"{qid}\t{sid}\t{score:.6f}\n")


def build_pairs(
    snapshot_dir: str | Path,
    ratings: dict[tuple[str, str], int],
    candidates_path: str | Path | None,
    cfg: RerankerConfig,
) -> list[TrainingPair]:
    """One pair per rated (question, statement), plus optional 0-labeled negatives.

    Negatives are drawn per question from statements without a rating for it:
    `random` samples the whole statement set, `retrieval_hard` samples that
    question's retrieved candidates. Sampling is seeded and pools are sorted,
    so the result is deterministic for a fixed config.
    """
    statements = load_statements(snapshot_dir)
    question_texts = load_question_texts(snapshot_dir, cfg.answer_separator)

    pairs: list[TrainingPair] = []
    unknown = 0
    rated_by_question: dict[str, set[str]] = {}
    for (qid, sid), rating in sorted(ratings.items()):
        rated_by_question.setdefault(qid, set()).add(sid)
        if qid not in question_texts or sid not in statements:
            unknown += 1
            continue
        pairs.append(
            TrainingPair(qid, sid, question_texts[qid], statements[sid], float(rating))
        )
    if unknown:
        log.warning("build_pairs: skipped %d rated pairs with unknown ids", unknown)

    if cfg.negative_sampling == "off":
        return pairs

    if cfg.negative_sampling == "retrieval_hard":
        if candidates_path is None:
            raise RerankerError("retrieval_hard sampling needs a candidates file")
        candidate_ids = dict(read_candidates(candidates_path))

    rng = random.Random(cfg.seed)
    all_sids = sorted(statements)
    for qid in sorted(rated_by_question):
        if qid not in question_texts:
            continue
        rated_sids = rated_by_question[qid]
        if cfg.negative_sampling == "random":
            pool = [sid for sid in all_sids if sid not in rated_sids]
        else:
            pool = [
                sid for sid in candidate_ids.get(qid, [])
                if sid not in rated_sids and sid in statements
            ]
        take = min(cfg.negatives_per_question, len(pool))
        for sid in rng.sample(pool, take):
            pairs.append(
                TrainingPair(qid, sid, question_texts[qid], statements[sid], 0.0)
            )
    return pairs
