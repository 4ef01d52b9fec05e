import shutil

import pytest

from hoprank.cli import run

GOLDEN_FILES = [
    "snapshot/statements.tsv",
    "snapshot/questions.tsv",
    "snapshot/ratings.tsv",
    "snapshot/metadata.txt",
    "candidates.tsv",
    "eval_report.tsv",
]


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def pipeline_output(tmp_path, fixture_dir, capsys):
    """Run ingest -> retrieve -> evaluate on the bundled fixture."""
    raw = fixture_dir / "raw"
    config = str(fixture_dir / "config.ini")
    snap = tmp_path / "snapshot"
    outputs = {}
    for step in (
        ["--config", config, "ingest",
         "--tables-dir", str(raw / "tables"),
         "--questions-dev", str(raw / "questions.dev.tsv"),
         "--ratings", str(raw / "ratings.tsv"),
         "--snapshot", str(snap)],
        ["--config", config, "retrieve",
         "--snapshot", str(snap), "--out", str(tmp_path / "candidates.tsv")],
        ["--config", config, "evaluate",
         "--snapshot", str(snap), "--rankings", str(tmp_path / "candidates.tsv"),
         "--report", str(tmp_path / "eval_report.tsv")],
    ):
        code, out, _ = invoke(capsys, *step)
        assert code == 0, step
        outputs[step[2]] = out
    return tmp_path, outputs


def test_full_recipe_matches_golden_bytes(pipeline_output, fixture_dir):
    out_dir, _ = pipeline_output
    for rel in GOLDEN_FILES:
        got = (out_dir / rel).read_bytes()
        expected = (fixture_dir / "golden" / rel).read_bytes()
        assert got == expected, f"{rel} differs from golden"


def test_pipeline_idempotent(pipeline_output, fixture_dir, capsys):
    out_dir, _ = pipeline_output
    first = (out_dir / "candidates.tsv").read_bytes()
    code, _, _ = invoke(
        capsys, "--config", str(fixture_dir / "config.ini"), "retrieve",
        "--snapshot", str(out_dir / "snapshot"),
        "--out", str(out_dir / "candidates2.tsv"),
    )
    assert code == 0
    assert (out_dir / "candidates2.tsv").read_bytes() == first


def test_evaluate_oracle_fixture_scores_one(tmp_path, fixture_dir, capsys):
    # A run listing every rated statement in rating-descending order must
    # score a mean NDCG of exactly 1.
    from hoprank import corpus, ranking

    snap = fixture_dir / "golden" / "snapshot"
    _, _, ratings, _ = corpus.read_snapshot(snap)
    perfect = []
    for qid in sorted(ratings.by_question):
        rated = ratings.by_question[qid]
        ordered = sorted(
            (sid for sid, r in rated.items() if r > 0),
            key=lambda sid: (-rated[sid], sid),
        )
        perfect.append(ranking.Ranking(qid, [(sid, 1.0) for sid in ordered]))
    path = tmp_path / "perfect.tsv"
    ranking.write_candidates(perfect, path)

    code, out, _ = invoke(
        capsys, "--config", str(fixture_dir / "config.ini"), "evaluate",
        "--snapshot", str(snap), "--rankings", str(path),
    )
    assert code == 0
    assert "mean_ndcg=1.000000" in out


def test_retrieve_missing_snapshot_exits_2(tmp_path, capsys):
    missing = tmp_path / "no_such_snapshot"
    code, _, err = invoke(
        capsys, "retrieve", "--snapshot", str(missing),
        "--out", str(tmp_path / "out.tsv"),
    )
    assert code == 2
    assert str(missing) in err


def test_unknown_subcommand_exits_1(capsys):
    code, _, _ = invoke(capsys, "frobnicate")
    assert code == 1


def test_unknown_flag_exits_1(capsys):
    code, _, _ = invoke(capsys, "submit", "--bogus")
    assert code == 1


def test_oracle_and_recall_curve_match_golden(tmp_path, fixture_dir, capsys):
    config = str(fixture_dir / "config.ini")
    snap = fixture_dir / "golden" / "snapshot"
    cand = fixture_dir / "golden" / "candidates.tsv"

    code, out, _ = invoke(
        capsys, "--config", config, "oracle",
        "--snapshot", str(snap), "--candidates", str(cand),
        "--report", str(tmp_path / "oracle_report.tsv"),
    )
    assert code == 0
    assert (tmp_path / "oracle_report.tsv").read_bytes() == (
        fixture_dir / "golden" / "oracle_report.tsv"
    ).read_bytes()

    code, out, _ = invoke(
        capsys, "--config", config, "recall-curve",
        "--snapshot", str(snap), "--candidates", str(cand),
        "--depths", "5,10,25,50", "--out", str(tmp_path / "recall.tsv"),
    )
    assert code == 0
    assert (tmp_path / "recall.tsv").read_bytes() == (
        fixture_dir / "golden" / "recall_curve.tsv"
    ).read_bytes()


def test_ensemble_and_submit_match_golden(tmp_path, fixture_dir, capsys):
    config = str(fixture_dir / "config.ini")
    golden = fixture_dir / "golden"
    code, _, _ = invoke(
        capsys, "--config", config, "ensemble",
        "--candidates", str(golden / "candidates.tsv"),
        "--scores", str(golden / "scores_seed1.tsv"), str(golden / "scores_seed2.tsv"),
        "--out", str(tmp_path / "ensembled.tsv"),
    )
    assert code == 0
    assert (tmp_path / "ensembled.tsv").read_bytes() == (
        golden / "ensembled.tsv"
    ).read_bytes()

    code, _, _ = invoke(
        capsys, "--config", config, "submit",
        "--rankings", str(golden / "candidates.tsv"),
        "--out", str(tmp_path / "submission.tsv"),
    )
    assert code == 0
    assert (tmp_path / "submission.tsv").read_bytes() == (
        golden / "submission.tsv"
    ).read_bytes()


def test_tune_runs_on_fixture(tmp_path, fixture_dir, capsys):
    config = tmp_path / "tune.ini"
    config.write_text(
        "[run]\nsplit = dev\nthreads = 1\n"
        "[tune]\nn0 = 2,4\ngrowth = 2.0\ndownscale = 0.0,0.5\nk = 20\n"
    )
    code, out, _ = invoke(
        capsys, "--config", str(config), "tune",
        "--snapshot", str(fixture_dir / "golden" / "snapshot"),
        "--report", str(tmp_path / "tune_report.tsv"),
    )
    assert code == 0
    assert "objective=" in out
    lines = (tmp_path / "tune_report.tsv").read_text().splitlines()
    assert len(lines) == 1 + 4  # header + 2*2 grid


def test_index_stats(fixture_dir, capsys):
    code, out, _ = invoke(
        capsys, "--config", str(fixture_dir / "config.ini"), "index",
        "--snapshot", str(fixture_dir / "golden" / "snapshot"),
    )
    assert code == 0
    assert "doc_count=200" in out


def test_config_via_env_var(fixture_dir, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HOPRANK_CONFIG", str(fixture_dir / "config.ini"))
    code, out, _ = invoke(
        capsys, "index", "--snapshot", str(fixture_dir / "golden" / "snapshot")
    )
    assert code == 0
    assert "doc_count=200" in out
