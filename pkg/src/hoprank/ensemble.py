"""Rank aggregation over re-ranked candidate lists and submission writing.

Members are combined on 0-based rank positions, not scores: agg(c) is the
weighted sum of each member's rank of c, sorted ascending. Ties fall back to
mean member score descending, then statement id ascending.

ScoreFile format: header question_id<TAB>statement_id<TAB>score.
Submission format: header-less question_id<TAB>statement_id lines.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError
from .ranking import Ranking

log = logging.getLogger(__name__)


@dataclass
class ScoreFile:
    entries: dict[tuple[str, str], float]
    source_label: str = ""


@dataclass
class EnsembleSpec:
    members: list[tuple[str, float]]  # (source label, weight > 0)

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        for label, weight in self.members:
            if not (math.isfinite(weight) and weight > 0):
                raise ValueError(f"member {label!r} has invalid weight {weight}")


def read_score_file(path: str | Path, source_label: str | None = None) -> ScoreFile:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t") != ["question_id", "statement_id", "score"]:
        raise DataError(f"{path}: not a score file (bad header)")
    entries: dict[tuple[str, str], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
        qid, sid, raw = fields
        try:
            score = float(raw)
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad score {raw!r}") from None
        key = (qid, sid)
        if key in entries:
            raise DataError(f"{path}:{lineno}: duplicate pair {key}")
        entries[key] = score
    return ScoreFile(entries=entries, source_label=source_label or path.stem)


def write_score_file(score_file: ScoreFile, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("question_id\tstatement_id\tscore\n")
        for (qid, sid), score in score_file.entries.items():
            fh.write(f"{qid}\t{sid}\t{score:.6f}\n")


def score_to_ranking(candidates: Ranking, scores: ScoreFile) -> Ranking:
    """Reorder one candidate list by external scores, descending.

    Every candidate must be scored; scores for ids outside the candidate list
    are warned about and ignored. Ties keep the original candidate order.
    """
    qid = candidates.question_id
    ids = candidates.ids()
    missing = [sid for sid in ids if (qid, sid) not in scores.entries]
    if missing:
        raise DataError(
            f"score file {scores.source_label!r} missing scores for question {qid}: "
            + ", ".join(missing[:10])
            + ("..." if len(missing) > 10 else "")
        )
    known = set(ids)
    unknown = [sid for (q, sid) in scores.entries if q == qid and sid not in known]
    if unknown:
        log.warning(
            "score file %r has %d scores for unknown candidates of question %s (ignored)",
            scores.source_label, len(unknown), qid,
        )
    original_rank = {sid: i for i, sid in enumerate(ids)}
    ordered = sorted(ids, key=lambda sid: (-scores.entries[(qid, sid)], original_rank[sid]))
    return Ranking(qid, [(sid, scores.entries[(qid, sid)]) for sid in ordered])


def aggregate(rankings: list[Ranking], spec: EnsembleSpec) -> Ranking:
    """Weighted linear combination of member ranks over an identical id set."""
    if len(rankings) != len(spec.members):
        raise DataError(
            f"{len(rankings)} rankings but {len(spec.members)} ensemble members"
        )
    qids = {r.question_id for r in rankings}
    if len(qids) != 1:
        raise DataError(f"rankings span multiple questions: {sorted(qids)}")
    qid = qids.pop()
    base_ids = set(rankings[0].ids())
    for ranking, (label, _) in zip(rankings[1:], spec.members[1:]):
        other = set(ranking.ids())
        if other != base_ids:
            diff = sorted(base_ids ^ other)
            raise DataError(
                f"member {label!r} id set differs for question {qid}: "
                + ", ".join(diff[:10])
                + ("..." if len(diff) > 10 else "")
            )

    agg: dict[str, float] = {sid: 0.0 for sid in base_ids}
    score_sums: dict[str, list[float]] = {sid: [] for sid in base_ids}
    for ranking, (_, weight) in zip(rankings, spec.members):
        for rank, (sid, score) in enumerate(ranking.items):
            agg[sid] += weight * rank
            if score is not None:
                score_sums[sid].append(score)

    def mean_score(sid: str) -> float:
        values = score_sums[sid]
        return sum(values) / len(values) if values else -math.inf

    ordered = sorted(base_ids, key=lambda sid: (agg[sid], -mean_score(sid), sid))
    return Ranking(qid, [(sid, agg[sid]) for sid in ordered])


def write_submission(rankings: list[Ranking], path: str | Path) -> None:
    """Byte-stable question_id<TAB>statement_id lines, blocks in given order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for ranking in rankings:
                for sid, _ in ranking.items:
                    fh.write(f"{ranking.question_id}\t{sid}\n")
    except OSError as exc:
        raise DataError(f"failed writing submission to {path}: {exc}") from exc
