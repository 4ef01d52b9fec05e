"""Ingestion of WorldTree-style data files and the normalized snapshot format.

Raw inputs are tab-separated fact tables (one column headed UID, skippable
columns marked with "[SKIP]" in the header), a questions file with embedded
choice markers, and a (question_id, statement_id, rating) ratings file.

The normalized snapshot is three tab-separated files plus a metadata file:
  statements.tsv   id, table_name, is_skipped_combined, text
  questions.tsv    id, split, answer_key, choices_json, question_text
  ratings.tsv      question_id, statement_id, rating
  metadata.txt     key=value lines (counts and max_rating_observed)
All snapshot rows are sorted by id so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusFormatError

log = logging.getLogger(__name__)

SPLITS = ("train", "dev", "test")

_SKIP_MARKER = "[skip]"
_CHOICE_RE = re.compile(r"\(\s*([A-H1-8])\s*\)")
_LETTERS = "ABCDEFGH"


@dataclass(frozen=True)
class ExplanationStatement:
    id: str
    text: str
    table_name: str
    is_skipped_combined: bool


@dataclass(frozen=True)
class Question:
    id: str
    question_text: str
    choices: dict[str, str]
    answer_key: str
    split: str


@dataclass
class RatingTable:
    entries: dict[tuple[str, str], int] = field(default_factory=dict)
    max_rating_observed: int = 0
    by_question: dict[str, dict[str, int]] = field(default_factory=dict)

    @classmethod
    def from_entries(cls, entries: dict[tuple[str, str], int]) -> "RatingTable":
        by_question: dict[str, dict[str, int]] = {}
        for (qid, sid), rating in entries.items():
            by_question.setdefault(qid, {})[sid] = rating
        max_rating = max(entries.values(), default=0)
        return cls(entries=dict(entries), max_rating_observed=max_rating, by_question=by_question)

    def restricted_to(self, question_ids: set[str]) -> "RatingTable":
        return RatingTable.from_entries(
            {k: v for k, v in self.entries.items() if k[0] in question_ids}
        )


def _normalize_key(raw: str, n_choices: int) -> str:
    key = raw.strip().upper()
    if key.isdigit():
        idx = int(key) - 1
        if 0 <= idx < len(_LETTERS):
            key = _LETTERS[idx]
    return key


def load_tables(dir_path: str | Path) -> list[ExplanationStatement]:
    """Read every *.tsv fact table under dir_path into statements.

    Statement text joins, in column order, the non-empty cells of all columns
    whose header is neither the UID column nor marked "[SKIP]".
    """
    dir_path = Path(dir_path)
    statements: list[ExplanationStatement] = []
    seen: dict[str, str] = {}  # uid -> table file name
    skipped_rows = 0
    for table_file in sorted(dir_path.glob("*.tsv")):
        with table_file.open(encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter="\t")
            try:
                header = next(reader)
            except StopIteration:
                continue
            uid_cols = [
                i for i, h in enumerate(header)
                if "UID" in re.split(r"[^0-9A-Za-z]+", h.upper())
            ]
            if len(uid_cols) != 1:
                raise CorpusFormatError(
                    f"{table_file}: expected exactly one UID column, found {len(uid_cols)}"
                )
            uid_col = uid_cols[0]
            content_cols = [
                i for i, h in enumerate(header)
                if i != uid_col and _SKIP_MARKER not in h.lower()
            ]
            skip_cols = [
                i for i, h in enumerate(header)
                if i != uid_col and _SKIP_MARKER in h.lower()
            ]
            for row in reader:
                if not any(cell.strip() for cell in row):
                    continue
                uid = row[uid_col].strip() if uid_col < len(row) else ""
                if not uid:
                    skipped_rows += 1
                    continue
                if uid in seen:
                    raise CorpusFormatError(
                        f"duplicate UID {uid!r} in {table_file.name} "
                        f"(first seen in {seen[uid]})"
                    )
                seen[uid] = table_file.name
                cells = [row[i].strip() for i in content_cols if i < len(row)]
                text = " ".join(c for c in cells if c)
                dropped = any(
                    i < len(row) and row[i].strip() for i in skip_cols
                )
                statements.append(
                    ExplanationStatement(
                        id=uid,
                        text=text,
                        table_name=table_file.stem,
                        is_skipped_combined=dropped,
                    )
                )
    if skipped_rows:
        log.warning("load_tables: rejected %d rows with empty UID", skipped_rows)
    return statements


def load_questions(file_path: str | Path, split: str) -> list[Question]:
    """Parse a tab-separated questions file for one split.

    The question column carries the full text with embedded "(A) ..." choice
    markers; the answer key column may be a letter or a 1-based number.
    Rows whose key references no parsed choice are skipped and counted.
    """
    file_path = Path(file_path)
    questions: list[Question] = []
    bad_rows = 0
    with file_path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            return questions
        def find(*names: str) -> int | None:
            for name in names:
                if name in header:
                    return header.index(name)
            return None
        id_col = find("questionid", "id")
        q_col = find("question")
        key_col = find("answerkey")
        if q_col is None or key_col is None:
            raise CorpusFormatError(
                f"{file_path}: need 'question' and 'AnswerKey' columns, got {header}"
            )
        if id_col is None:
            id_col = 0
        for row in reader:
            if not any(cell.strip() for cell in row):
                continue
            qid = row[id_col].strip()
            full_text = row[q_col]
            markers = list(_CHOICE_RE.finditer(full_text))
            if markers:
                question_text = full_text[: markers[0].start()].strip()
            else:
                question_text = full_text.strip()
            choices: dict[str, str] = {}
            for i, m in enumerate(markers):
                end = markers[i + 1].start() if i + 1 < len(markers) else len(full_text)
                letter = m.group(1)
                if letter.isdigit():
                    letter = _LETTERS[int(letter) - 1]
                choices[letter] = full_text[m.end():end].strip()
            key = _normalize_key(row[key_col], len(choices))
            if key not in choices:
                bad_rows += 1
                log.warning(
                    "load_questions: %s: question %s answer key %r not among choices %s; skipped",
                    file_path.name, qid, row[key_col], sorted(choices),
                )
                continue
            questions.append(
                Question(
                    id=qid,
                    question_text=question_text,
                    choices=dict(sorted(choices.items())),
                    answer_key=key,
                    split=split,
                )
            )
    if bad_rows:
        log.warning("load_questions: skipped %d rows with bad answer keys", bad_rows)
    return questions


def load_ratings(
    file_path: str | Path,
    known_questions: set[str] | None = None,
    known_statements: set[str] | None = None,
) -> RatingTable:
    """Read (question_id, statement_id, rating) rows, tab- or comma-separated.

    Duplicate pairs keep the maximum rating. Unknown ids (when the known-id
    sets are given) are counted and reported but kept, since evaluation
    tolerates corpus churn. Order of input rows does not affect the result.
    """
    file_path = Path(file_path)
    text = file_path.read_text(encoding="utf-8")
    entries: dict[tuple[str, str], int] = {}
    duplicates = 0
    unknown = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        delim = "\t" if "\t" in line else ","
        fields = [f.strip() for f in line.split(delim)]
        if len(fields) < 3:
            raise CorpusFormatError(f"{file_path}:{lineno}: expected 3 fields, got {len(fields)}")
        qid, sid, raw = fields[0], fields[1], fields[2]
        if lineno == 1 and not re.fullmatch(r"[+-]?\d+", raw):
            continue  # header row
        if not re.fullmatch(r"\d+", raw):
            raise CorpusFormatError(f"{file_path}:{lineno}: rating {raw!r} is not a non-negative integer")
        rating = int(raw)
        if known_questions is not None and qid not in known_questions:
            unknown += 1
        elif known_statements is not None and sid not in known_statements:
            unknown += 1
        key = (qid, sid)
        if key in entries:
            duplicates += 1
            entries[key] = max(entries[key], rating)
        else:
            entries[key] = rating
    if duplicates:
        log.warning("load_ratings: %d duplicate pairs resolved by max", duplicates)
    if unknown:
        log.warning("load_ratings: %d rows reference unknown ids (retained)", unknown)
    return RatingTable.from_entries(entries)


def question_query_text(q: Question, mode: str = "correct_answer_only") -> str:
    """Query string for retrieval: question plus correct answer or all choices."""
    if mode == "correct_answer_only":
        return f"{q.question_text} {q.choices[q.answer_key]}"
    if mode == "all_choices":
        parts = [q.question_text] + [q.choices[k] for k in sorted(q.choices)]
        return " ".join(parts)
    raise ValueError(f"unknown query mode {mode!r}")


# --- normalized snapshot -------------------------------------------------

def write_snapshot(
    out_dir: str | Path,
    statements: list[ExplanationStatement],
    questions: list[Question],
    ratings: RatingTable,
) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "statements.tsv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\ttable_name\tis_skipped_combined\ttext\n")
        for s in sorted(statements, key=lambda s: s.id):
            fh.write(f"{s.id}\t{s.table_name}\t{int(s.is_skipped_combined)}\t{s.text}\n")
    with (out_dir / "questions.tsv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\tsplit\tanswer_key\tchoices_json\tquestion_text\n")
        for q in sorted(questions, key=lambda q: q.id):
            choices = json.dumps(q.choices, sort_keys=True, ensure_ascii=False)
            fh.write(f"{q.id}\t{q.split}\t{q.answer_key}\t{choices}\t{q.question_text}\n")
    with (out_dir / "ratings.tsv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("question_id\tstatement_id\trating\n")
        for (qid, sid), rating in sorted(ratings.entries.items()):
            fh.write(f"{qid}\t{sid}\t{rating}\n")
    with (out_dir / "metadata.txt").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"statement_count={len(statements)}\n")
        fh.write(f"question_count={len(questions)}\n")
        fh.write(f"rating_count={len(ratings.entries)}\n")
        fh.write(f"max_rating_observed={ratings.max_rating_observed}\n")


def read_snapshot(
    snap_dir: str | Path,
) -> tuple[list[ExplanationStatement], list[Question], RatingTable, dict[str, int]]:
    snap_dir = Path(snap_dir)
    for name in ("statements.tsv", "questions.tsv", "ratings.tsv", "metadata.txt"):
        if not (snap_dir / name).exists():
            raise CorpusFormatError(f"snapshot file missing: {snap_dir / name}")

    statements = []
    with (snap_dir / "statements.tsv").open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row in reader:
            statements.append(
                ExplanationStatement(
                    id=row[0], table_name=row[1],
                    is_skipped_combined=bool(int(row[2])), text=row[3],
                )
            )
    questions = []
    with (snap_dir / "questions.tsv").open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row in reader:
            questions.append(
                Question(
                    id=row[0], split=row[1], answer_key=row[2],
                    choices=json.loads(row[3]), question_text=row[4],
                )
            )
    entries: dict[tuple[str, str], int] = {}
    with (snap_dir / "ratings.tsv").open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row in reader:
            entries[(row[0], row[1])] = int(row[2])
    ratings = RatingTable.from_entries(entries)

    metadata: dict[str, int] = {}
    for line in (snap_dir / "metadata.txt").read_text(encoding="utf-8").splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            metadata[key] = int(value)
    return statements, questions, ratings, metadata
