#!/usr/bin/env python3
"""Regenerate the golden pipeline outputs for the bundled mini-corpus.

Runs ingest -> retrieve -> evaluate -> oracle -> recall-curve -> ensemble ->
submit through the CLI and stores the outputs under
tests/fixtures/worldtree_mini/golden/. Also derives two synthetic score files
(rating plus deterministic pseudo-noise) that stand in for re-ranker output.

Rerun only when an intentional behavior change moves the goldens; the test
suite compares byte-for-byte.
"""

from __future__ import annotations

import hashlib
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from hoprank import corpus, ranking  # noqa: E402
from hoprank.cli import run  # noqa: E402

FIXTURE = ROOT / "tests/fixtures/worldtree_mini"
RAW = FIXTURE / "raw"
GOLDEN = FIXTURE / "golden"
CONFIG = FIXTURE / "config.ini"


def must(code: int) -> None:
    if code != 0:
        raise SystemExit(f"pipeline step failed with exit code {code}")


def pseudo_noise(qid: str, sid: str, salt: str) -> float:
    digest = hashlib.sha256(f"{salt}:{qid}:{sid}".encode()).digest()
    return int.from_bytes(digest[:4], "big") / 2**32


def main() -> None:
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    GOLDEN.mkdir(parents=True)
    snap = GOLDEN / "snapshot"

    must(run([
        "--config", str(CONFIG), "ingest",
        "--tables-dir", str(RAW / "tables"),
        "--questions-dev", str(RAW / "questions.dev.tsv"),
        "--ratings", str(RAW / "ratings.tsv"),
        "--snapshot", str(snap),
    ]))
    must(run([
        "--config", str(CONFIG), "retrieve",
        "--snapshot", str(snap), "--out", str(GOLDEN / "candidates.tsv"),
    ]))
    must(run([
        "--config", str(CONFIG), "evaluate",
        "--snapshot", str(snap), "--rankings", str(GOLDEN / "candidates.tsv"),
        "--report", str(GOLDEN / "eval_report.tsv"),
    ]))
    must(run([
        "--config", str(CONFIG), "oracle",
        "--snapshot", str(snap), "--candidates", str(GOLDEN / "candidates.tsv"),
        "--report", str(GOLDEN / "oracle_report.tsv"),
    ]))
    must(run([
        "--config", str(CONFIG), "recall-curve",
        "--snapshot", str(snap), "--candidates", str(GOLDEN / "candidates.tsv"),
        "--depths", "5,10,25,50", "--out", str(GOLDEN / "recall_curve.tsv"),
    ]))

    # Stand-in re-ranker score files: true rating + small deterministic noise.
    _, _, ratings, _ = corpus.read_snapshot(snap)
    candidates = ranking.read_candidates(GOLDEN / "candidates.tsv")
    for salt in ("seed1", "seed2"):
        path = GOLDEN / f"scores_{salt}.tsv"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("question_id\tstatement_id\tscore\n")
            for cand in candidates:
                qid = cand.question_id
                for sid in cand.ids():
                    rating = ratings.by_question.get(qid, {}).get(sid, 0)
                    fh.write(f"{qid}\t{sid}\t{rating + pseudo_noise(qid, sid, salt):.6f}\n")

    must(run([
        "--config", str(CONFIG), "ensemble",
        "--candidates", str(GOLDEN / "candidates.tsv"),
        "--scores", str(GOLDEN / "scores_seed1.tsv"), str(GOLDEN / "scores_seed2.tsv"),
        "--out", str(GOLDEN / "ensembled.tsv"),
    ]))
    must(run([
        "--config", str(CONFIG), "evaluate",
        "--snapshot", str(snap), "--rankings", str(GOLDEN / "ensembled.tsv"),
        "--report", str(GOLDEN / "eval_report_ensembled.tsv"),
    ]))
    must(run([
        "--config", str(CONFIG), "submit",
        "--rankings", str(GOLDEN / "candidates.tsv"),
        "--out", str(GOLDEN / "submission.tsv"),
    ]))
    print(f"regenerated goldens under {GOLDEN}")


if __name__ == "__main__":
    main()
