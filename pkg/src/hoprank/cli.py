"""Command-line pipeline: ingest -> index -> retrieve -> evaluate / oracle /
recall-curve / tune / ensemble / submit.

Behavior is fully determined by an INI-style config file (sections [paths],
[textpipe], [bm25], [ibm25], [eval], [run], [tune]) plus flag overrides; the
only environment dependence is the optional HOPRANK_CONFIG path. Progress goes
to stderr, a one-line key=value summary to stdout. Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import configparser
import itertools
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import corpus, ensemble, evaluate, ranking, retrieve, textpipe
from .errors import DataError
from .index import Bm25Params, build_index, bm25_rank, query_vector, tfidf_rank
from .retrieve import IbmParams

SPLITS = corpus.SPLITS


class _Parser(argparse.ArgumentParser):
    # Usage errors exit 1 (argparse's default is 2, which we reserve for data errors).
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _summary(**pairs) -> None:
    print(" ".join(f"{k}={v}" for k, v in pairs.items()))


def _require(path: str | None, what: str) -> Path:
    if not path:
        raise DataError(f"{what} not configured (set it in the config file or via flags)")
    p = Path(path)
    if not p.exists():
        raise DataError(f"{what} does not exist: {p}")
    return p


def _load_ini(args) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    path = args.config or os.environ.get("HOPRANK_CONFIG")
    if path:
        if not Path(path).exists():
            raise DataError(f"config file does not exist: {path}")
        cp.read(path, encoding="utf-8")
    return cp


def _get(cp, section: str, key: str, override=None, fallback=None):
    if override is not None:
        return override
    return cp.get(section, key, fallback=fallback)


def _pre_config(cp) -> textpipe.PreprocessConfig:
    stop = cp.get("textpipe", "stopwords", fallback=None)
    lemma = cp.get("textpipe", "lemmas", fallback=None)
    if stop is None and lemma is None:
        return textpipe.default_config()
    return textpipe.load_preprocess_config(stop, lemma, allow_empty=True)


def _bm25_params(cp, args) -> Bm25Params:
    try:
        return Bm25Params(
            k1=float(_get(cp, "bm25", "k1", getattr(args, "k1", None), "1.5")),
            b=float(_get(cp, "bm25", "b", getattr(args, "b", None), "0.75")),
        )
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def _ibm_params(cp, args) -> IbmParams:
    try:
        return IbmParams(
            n0=int(_get(cp, "ibm25", "n0", getattr(args, "n0", None), "16")),
            growth=float(_get(cp, "ibm25", "growth", getattr(args, "growth", None), "2.0")),
            downscale=float(
                _get(cp, "ibm25", "downscale", getattr(args, "downscale", None), "0.5")
            ),
            K=int(_get(cp, "ibm25", "k", getattr(args, "k", None), "200")),
            query_mode=_get(
                cp, "ibm25", "query_mode", getattr(args, "query_mode", None),
                "correct_answer_only",
            ),
            bm25=_bm25_params(cp, args),
        )
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def _eval_config(cp, args) -> evaluate.EvalConfig:
    try:
        return evaluate.EvalConfig(
            gain=_get(cp, "eval", "gain", getattr(args, "gain", None), "exponential")
        )
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def _threads(cp, args) -> int | None:
    raw = _get(cp, "run", "threads", getattr(args, "threads", None), None)
    return int(raw) if raw is not None else None


def _split(cp, args) -> str:
    split = _get(cp, "run", "split", getattr(args, "split", None), "dev")
    if split not in SPLITS:
        raise DataError(f"unknown split {split!r}, expected one of {SPLITS}")
    return split


@dataclass
class _Snapshot:
    statements: list[corpus.ExplanationStatement]
    questions: list[corpus.Question]
    ratings: corpus.RatingTable

    def split_questions(self, split: str) -> list[corpus.Question]:
        return [q for q in self.questions if q.split == split]

    def split_ratings(self, split: str) -> corpus.RatingTable:
        qids = {q.id for q in self.questions if q.split == split}
        return self.ratings.restricted_to(qids)


def _load_snapshot(cp, args) -> _Snapshot:
    snap_dir = _require(
        _get(cp, "paths", "snapshot_dir", getattr(args, "snapshot", None)), "snapshot dir"
    )
    statements, questions, ratings, _ = corpus.read_snapshot(snap_dir)
    return _Snapshot(statements, questions, ratings)


def _build_index_from(snapshot: _Snapshot, pre_cfg, params: Bm25Params):
    tokenized = [
        (s.id, textpipe.preprocess(s.text, pre_cfg)) for s in snapshot.statements
    ]
    return build_index(tokenized, params)


def _split_rankings(rankings, snapshot: _Snapshot, split: str):
    qids = {q.id for q in snapshot.split_questions(split)}
    return [r for r in rankings if r.question_id in qids]


# --- subcommand handlers --------------------------------------------------

def _cmd_ingest(cp, args) -> None:
    tables_dir = _require(_get(cp, "paths", "tables_dir", args.tables_dir), "tables dir")
    ratings_path = _require(_get(cp, "paths", "ratings_file", args.ratings), "ratings file")
    snap_dir = _get(cp, "paths", "snapshot_dir", args.snapshot)
    if not snap_dir:
        raise DataError("snapshot dir not configured")

    statements = corpus.load_tables(tables_dir)
    _log(f"loaded {len(statements)} statements from {tables_dir}")
    questions: list[corpus.Question] = []
    for split in SPLITS:
        path = _get(cp, "paths", f"questions_{split}", getattr(args, f"questions_{split}"))
        if path:
            qs = corpus.load_questions(_require(path, f"{split} questions file"), split)
            _log(f"loaded {len(qs)} {split} questions from {path}")
            questions.extend(qs)
    ratings = corpus.load_ratings(
        ratings_path,
        known_questions={q.id for q in questions},
        known_statements={s.id for s in statements},
    )
    _log(f"loaded {len(ratings.entries)} ratings from {ratings_path}")
    corpus.write_snapshot(snap_dir, statements, questions, ratings)
    _summary(
        statement_count=len(statements),
        question_count=len(questions),
        rating_count=len(ratings.entries),
        max_rating_observed=ratings.max_rating_observed,
    )


def _cmd_index(cp, args) -> None:
    snapshot = _load_snapshot(cp, args)
    index = _build_index_from(snapshot, _pre_config(cp), _bm25_params(cp, args))
    if args.dump:
        with open(args.dump, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("term\tdoc_freq\n")
            for tid, term in enumerate(index.vocab.id_to_term):
                fh.write(f"{term}\t{index.doc_freq[tid]}\n")
        _log(f"wrote index dump to {args.dump}")
    _summary(
        doc_count=index.doc_count,
        vocab_size=len(index.vocab),
        avg_doc_len=f"{index.avg_doc_len:.6f}",
    )


def _cmd_retrieve(cp, args) -> None:
    snapshot = _load_snapshot(cp, args)
    pre_cfg = _pre_config(cp)
    params = _ibm_params(cp, args)
    split = _split(cp, args)
    questions = snapshot.split_questions(split)
    if not questions:
        raise DataError(f"no questions in split {split!r}")
    index = _build_index_from(snapshot, pre_cfg, params.bm25)
    method = args.method
    if method == "ibm25":
        rankings = retrieve.retrieve_all(
            questions, index, params, pre_cfg, threads=_threads(cp, args)
        )
    else:
        rankings = []
        for q in questions:
            tokens = textpipe.preprocess(
                corpus.question_query_text(q, params.query_mode), pre_cfg
            )
            if method == "bm25":
                qv = query_vector(tokens, index, "bm25")
                rankings.append(bm25_rank(qv, index, params.K, q.id))
            else:
                qv = query_vector(tokens, index, "tfidf")
                rankings.append(tfidf_rank(qv, index, params.K, q.id))
    ranking.write_candidates(rankings, args.out)
    _log(f"wrote candidates for {len(rankings)} questions to {args.out}")
    _summary(question_count=len(rankings), k=params.K, method=method, split=split)


def _parse_grid(cp, args) -> list[IbmParams]:
    def values(key: str, default: str, cast):
        raw = cp.get("tune", key, fallback=default)
        return [cast(v.strip()) for v in str(raw).split(",") if v.strip()]

    grid = []
    try:
        for n0, growth, downscale, k1, b, mode, k in itertools.product(
            values("n0", "8,16,32", int),
            values("growth", "1.5,2.0", float),
            values("downscale", "0.3,0.5,0.7", float),
            values("k1", "1.5", float),
            values("b", "0.75", float),
            values("query_mode", "correct_answer_only", str),
            values("k", "200", int),
        ):
            grid.append(
                IbmParams(
                    n0=n0, growth=growth, downscale=downscale, K=k,
                    query_mode=mode, bm25=Bm25Params(k1=k1, b=b),
                )
            )
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    return grid


def _cmd_tune(cp, args) -> None:
    snapshot = _load_snapshot(cp, args)
    pre_cfg = _pre_config(cp)
    split = _split(cp, args)
    questions = snapshot.split_questions(split)
    ratings = snapshot.split_ratings(split)
    grid = _parse_grid(cp, args)
    _log(f"tuning over {len(grid)} configs on {len(questions)} {split} questions")

    report: list[tuple[IbmParams, float]] = []
    by_bm25: dict[Bm25Params, list[IbmParams]] = {}
    for params in grid:
        by_bm25.setdefault(params.bm25, []).append(params)
    for bm25_params, group in by_bm25.items():
        index = _build_index_from(snapshot, pre_cfg, bm25_params)
        _, group_report = retrieve.tune(
            group, questions, ratings, index, pre_cfg, threads=_threads(cp, args)
        )
        report.extend(group_report)
    # restore grid order so tie-breaks follow it
    order = {id(p): i for i, p in enumerate(grid)}
    report.sort(key=lambda item: order[id(item[0])])
    best = max(range(len(report)), key=lambda i: report[i][1])

    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("n0\tgrowth\tdownscale\tk1\tb\tquery_mode\tk\tobjective\n")
            for params, objective in report:
                fh.write(
                    f"{params.n0}\t{params.growth}\t{params.downscale}\t"
                    f"{params.bm25.k1}\t{params.bm25.b}\t{params.query_mode}\t"
                    f"{params.K}\t{objective:.6f}\n"
                )
        _log(f"wrote tuning report to {args.report}")
    winner, objective = report[best]
    _summary(
        n0=winner.n0, growth=winner.growth, downscale=winner.downscale,
        k1=winner.bm25.k1, b=winner.bm25.b, query_mode=winner.query_mode,
        k=winner.K, objective=f"{objective:.6f}",
    )


def _cmd_evaluate(cp, args) -> None:
    snapshot = _load_snapshot(cp, args)
    split = _split(cp, args)
    cfg = _eval_config(cp, args)
    rankings = _split_rankings(
        ranking.read_rankings(_require(args.rankings, "rankings file")), snapshot, split
    )
    report = evaluate.evaluate_run(rankings, snapshot.split_ratings(split), cfg)
    if args.report:
        evaluate.write_report(report, args.report)
        _log(f"wrote per-question report to {args.report}")
    _summary(
        mean_ndcg=f"{report.mean_ndcg:.6f}",
        question_count=report.question_count,
        gain=cfg.gain,
        split=split,
    )


def _cmd_oracle(cp, args) -> None:
    snapshot = _load_snapshot(cp, args)
    split = _split(cp, args)
    cfg = _eval_config(cp, args)
    ratings = snapshot.split_ratings(split)
    rankings = _split_rankings(
        ranking.read_rankings(_require(args.candidates, "candidates file")), snapshot, split
    )
    by_qid = {r.question_id: r for r in rankings}
    qids = sorted(set(by_qid) | set(ratings.by_question))
    scores = {
        qid: evaluate.oracle_ndcg(
            by_qid.get(qid, ranking.Ranking(qid, [])), ratings, cfg
        )
        for qid in qids
    }
    mean = sum(scores.values()) / len(scores) if scores else 0.0
    if args.report:
        report = evaluate.EvalReport(scores, mean, len(scores))
        evaluate.write_report(report, args.report)
        _log(f"wrote per-question oracle report to {args.report}")
    _summary(
        mean_oracle_ndcg=f"{mean:.6f}", question_count=len(scores),
        gain=cfg.gain, split=split,
    )


def _cmd_recall_curve(cp, args) -> None:
    snapshot = _load_snapshot(cp, args)
    split = _split(cp, args)
    try:
        depths = [int(v) for v in args.depths.split(",") if v.strip()]
    except ValueError as exc:
        raise DataError(f"bad depths list {args.depths!r}") from exc
    rankings = _split_rankings(
        ranking.read_rankings(_require(args.candidates, "candidates file")), snapshot, split
    )
    try:
        table = evaluate.recall_by_rating(rankings, snapshot.split_ratings(split), depths)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    evaluate.write_recall_table(table, args.out)
    _log(f"wrote recall curve to {args.out}")
    top = max(depths)
    _summary(
        recall_gt0_at_max_k=f"{table[('>0', top)]:.6f}",
        max_k=top, question_count=len(rankings), split=split,
    )


def _cmd_ensemble(cp, args) -> None:
    candidates = ranking.read_candidates(_require(args.candidates, "candidates file"))
    score_files = [ensemble.read_score_file(_require(p, "score file")) for p in args.scores]
    member_count = len(score_files) + (1 if args.include_base else 0)
    if args.weights:
        try:
            weights = [float(w) for w in args.weights.split(",")]
        except ValueError as exc:
            raise DataError(f"bad weights list {args.weights!r}") from exc
        if len(weights) != member_count:
            raise DataError(
                f"{len(weights)} weights for {member_count} ensemble members"
            )
    else:
        weights = [1.0] * member_count
    labels = [sf.source_label for sf in score_files] + (
        ["candidates"] if args.include_base else []
    )
    try:
        spec = ensemble.EnsembleSpec(list(zip(labels, weights)))
    except ValueError as exc:
        raise DataError(str(exc)) from exc

    out_rankings = []
    for cand in candidates:
        members = [ensemble.score_to_ranking(cand, sf) for sf in score_files]
        if args.include_base:
            members.append(cand)
        out_rankings.append(ensemble.aggregate(members, spec))
    ranking.write_candidates(out_rankings, args.out)
    _log(f"wrote ensembled ranking for {len(out_rankings)} questions to {args.out}")
    _summary(question_count=len(out_rankings), member_count=member_count)


def _cmd_submit(cp, args) -> None:
    rankings = ranking.read_rankings(_require(args.rankings, "rankings file"))
    ensemble.write_submission(rankings, args.out)
    lines = sum(len(r.items) for r in rankings)
    _log(f"wrote submission ({lines} lines) to {args.out}")
    _summary(question_count=len(rankings), line_count=lines)


# --- argument wiring ------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--snapshot", help="normalized snapshot directory")
    sub.add_argument("--split", choices=SPLITS, help="question split (default dev)")
    sub.add_argument("--threads", type=int, help="question-level worker count")


def _add_ibm_flags(sub):
    sub.add_argument("--n0", type=int)
    sub.add_argument("--growth", type=float)
    sub.add_argument("--downscale", type=float)
    sub.add_argument("--k", type=int)
    sub.add_argument("--query-mode", dest="query_mode", choices=retrieve.QUERY_MODES)
    sub.add_argument("--k1", type=float)
    sub.add_argument("--b", type=float)


def build_parser() -> _Parser:
    parser = _Parser(prog="hoprank", description=__doc__)
    parser.add_argument("--config", help="INI config file (or HOPRANK_CONFIG env var)")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub = subs.add_parser("ingest", help="load raw data files into a snapshot")
    sub.add_argument("--tables-dir")
    sub.add_argument("--questions-train", dest="questions_train")
    sub.add_argument("--questions-dev", dest="questions_dev")
    sub.add_argument("--questions-test", dest="questions_test")
    sub.add_argument("--ratings")
    sub.add_argument("--snapshot")
    sub.set_defaults(handler=_cmd_ingest)

    sub = subs.add_parser("index", help="build the index and report statistics")
    _add_common(sub)
    sub.add_argument("--k1", type=float)
    sub.add_argument("--b", type=float)
    sub.add_argument("--dump", help="write a term/doc-freq dump (not a stable format)")
    sub.set_defaults(handler=_cmd_index)

    for name in ("retrieve", "export-candidates"):
        sub = subs.add_parser(name, help="rank statements and export candidates")
        _add_common(sub)
        _add_ibm_flags(sub)
        sub.add_argument("--method", choices=("ibm25", "bm25", "tfidf"), default="ibm25")
        sub.add_argument("--out", required=True)
        sub.set_defaults(handler=_cmd_retrieve)

    sub = subs.add_parser("tune", help="grid-search I-BM25 hyperparameters")
    _add_common(sub)
    sub.add_argument("--report", help="per-config objective TSV")
    sub.set_defaults(handler=_cmd_tune)

    sub = subs.add_parser("evaluate", help="NDCG of a ranking file")
    _add_common(sub)
    sub.add_argument("--rankings", required=True)
    sub.add_argument("--gain", choices=evaluate.GAINS)
    sub.add_argument("--report", help="per-question NDCG TSV")
    sub.set_defaults(handler=_cmd_evaluate)

    sub = subs.add_parser("oracle", help="Oracle NDCG of a retrieved candidate set")
    _add_common(sub)
    sub.add_argument("--candidates", required=True)
    sub.add_argument("--gain", choices=evaluate.GAINS)
    sub.add_argument("--report")
    sub.set_defaults(handler=_cmd_oracle)

    sub = subs.add_parser("recall-curve", help="recall by rating at several depths")
    _add_common(sub)
    sub.add_argument("--candidates", required=True)
    sub.add_argument("--depths", default="25,50,100,200")
    sub.add_argument("--out", required=True)
    sub.set_defaults(handler=_cmd_recall_curve)

    sub = subs.add_parser("ensemble", help="aggregate score files over a candidate list")
    sub.add_argument("--candidates", required=True)
    sub.add_argument("--scores", nargs="+", required=True)
    sub.add_argument("--weights", help="comma list, one per member (default uniform)")
    sub.add_argument("--include-base", action="store_true",
                     help="add the candidate order itself as a member")
    sub.add_argument("--out", required=True)
    sub.set_defaults(handler=_cmd_ensemble)

    sub = subs.add_parser("submit", help="write the two-column submission file")
    sub.add_argument("--rankings", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(handler=_cmd_submit)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cp = _load_ini(args)
        args.handler(cp, args)
    except DataError as exc:
        print(f"hoprank: data error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    raise SystemExit(run())
