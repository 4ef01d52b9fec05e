#!/usr/bin/env python3
"""Generate the bundled synthetic mini-corpus used by the test suite.

Produces a WorldTree-style raw data layout (two fact tables, a dev questions
file, a ratings file) with planted lexical-overlap relevance: each question's
rated statements share its topic words, with rating proportional to overlap.
Deterministic; rerunning overwrites identical bytes.

Usage: python3 scripts/make_fixture.py [OUT_DIR]
       (default OUT_DIR: tests/fixtures/worldtree_mini/raw)
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

TOPICS = [
    ("photosynthesis", ["plant", "sunlight", "oxygen", "leaf"]),
    ("water cycle", ["water", "evaporation", "cloud", "rain"]),
    ("magnetism", ["magnet", "iron", "pole", "attract"]),
    ("food chain", ["predator", "prey", "consumer", "producer"]),
    ("electricity", ["circuit", "current", "wire", "battery"]),
    ("erosion", ["rock", "wind", "soil", "weathering"]),
    ("gravity", ["gravity", "mass", "fall", "weight"]),
    ("sound", ["sound", "vibration", "wave", "ear"]),
    ("light", ["light", "reflect", "mirror", "shadow"]),
    ("seasons", ["season", "axis", "tilt", "orbit"]),
    ("states of matter", ["solid", "liquid", "gas", "melt"]),
    ("habitats", ["habitat", "desert", "forest", "adaptation"]),
    ("volcanoes", ["volcano", "lava", "magma", "eruption"]),
    ("cells", ["cell", "nucleus", "membrane", "organism"]),
    ("friction", ["friction", "surface", "motion", "slide"]),
    ("planets", ["planet", "sun", "orbit", "solar"]),
    ("heat", ["heat", "temperature", "thermometer", "energy"]),
    ("seeds", ["seed", "germination", "root", "sprout"]),
    ("fossils", ["fossil", "sediment", "bone", "ancient"]),
    ("weather", ["weather", "storm", "thermometer", "wind"]),
]

FILLER_WORDS = [
    "measure", "observe", "record", "compare", "model", "describe", "example",
    "property", "change", "system", "cycle", "process", "material", "object",
    "source", "kind", "part", "unit", "layer", "form",
]

TEMPLATES = [
    "{w0} is related to {w1} in the process of {topic}",
    "{w0} and {w1} together explain {topic}",
    "a {w0} can affect the {w1} during {topic}",
    "scientists study {w0} to understand {w1}",
    "{w0} is a kind of {w1}",
    "the {w0} changes the {w1} over time",
]


def main(out_dir: Path) -> None:
    rng = random.Random(20210711)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables_dir = out_dir / "tables"
    tables_dir.mkdir(exist_ok=True)

    statements: list[tuple[str, str, str]] = []  # (uid, table, text)
    ratings: list[tuple[str, str, int]] = []
    questions: list[tuple[str, str, str]] = []   # (qid, full_text, key)

    sid_counter = 0

    def next_sid() -> str:
        nonlocal sid_counter
        sid_counter += 1
        return f"S{sid_counter:04d}"

    for t_idx, (topic, words) in enumerate(TOPICS):
        qid = f"Q{t_idx + 1:03d}"
        correct = f"the {words[0]} and the {words[1]}"
        distractors = []
        pool = [w for _, ws in TOPICS for w in ws if w not in words]
        for _ in range(3):
            distractors.append(f"the {rng.choice(pool)} and the {rng.choice(pool)}")
        choices = [correct] + distractors
        order = list(range(4))
        rng.shuffle(order)
        key_letter = "ABCD"[order.index(0)]
        rendered = " ".join(
            f"({letter}) {choices[order[i]]}"
            for i, letter in enumerate("ABCD")
        )
        full_text = f"Which statement best explains {topic} using {words[2]}? {rendered}"
        questions.append((qid, full_text, key_letter))

        # Rated statements: overlap with topic words decreasing with rating.
        plan = [(3, 3), (3, 3), (2, 2), (2, 2), (1, 1), (1, 1), (0, 0)]
        for rating, n_overlap in plan:
            sid = next_sid()
            chosen = rng.sample(words, n_overlap) if n_overlap else []
            fill = rng.sample(FILLER_WORDS, 3 - min(n_overlap, 2))
            parts = chosen + fill
            rng.shuffle(parts)
            template = rng.choice(TEMPLATES)
            text = template.format(
                w0=parts[0], w1=parts[1 % len(parts)], topic=topic
            )
            table = "table_a" if sid_counter % 2 else "table_b"
            statements.append((sid, table, text))
            ratings.append((qid, sid, rating))
        # One unrated on-topic statement.
        sid = next_sid()
        text = f"the {words[rng.randrange(4)]} is part of {topic}"
        statements.append((sid, "table_a" if sid_counter % 2 else "table_b", text))

    # Off-topic filler statements.
    for _ in range(40):
        sid = next_sid()
        w = rng.sample(FILLER_WORDS, 4)
        text = f"to {w[0]} a {w[1]} you must {w[2]} the {w[3]}"
        statements.append((sid, "table_a" if sid_counter % 2 else "table_b", text))

    # Write fact tables; table_a carries a [SKIP] column to exercise assembly.
    for table in ("table_a", "table_b"):
        rows = [s for s in statements if s[1] == table]
        with (tables_dir / f"{table}.tsv").open("w", encoding="utf-8", newline="\n") as fh:
            if table == "table_a":
                fh.write("fact\t[SKIP] COMMENT\t[SKIP] UID\n")
                for uid, _, text in rows:
                    comment = "reviewed" if int(uid[1:]) % 3 == 0 else ""
                    fh.write(f"{text}\t{comment}\t{uid}\n")
            else:
                fh.write("subject\tpredicate\t[SKIP] UID\n")
                for uid, _, text in rows:
                    head, _, tail = text.partition(" ")
                    fh.write(f"{head}\t{tail}\t{uid}\n")

    with (out_dir / "questions.dev.tsv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("QuestionID\tquestion\tAnswerKey\n")
        for qid, text, key in questions:
            fh.write(f"{qid}\t{text}\t{key}\n")

    with (out_dir / "ratings.tsv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("question_id\tstatement_id\trating\n")
        shuffled = ratings[:]
        rng.shuffle(shuffled)
        for qid, sid, rating in shuffled:
            fh.write(f"{qid}\t{sid}\t{rating}\n")

    print(f"wrote fixture: {len(statements)} statements, {len(questions)} questions, "
          f"{len(ratings)} ratings -> {out_dir}")


if __name__ == "__main__":
    default = Path(__file__).resolve().parent.parent / "tests/fixtures/worldtree_mini/raw"
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else default)
