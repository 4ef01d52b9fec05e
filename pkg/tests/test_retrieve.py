import math
import random

import pytest

from hoprank.corpus import Question, RatingTable
from hoprank.errors import DataError
from hoprank.index import bm25_rank, build_index, cosine, query_vector
from hoprank.retrieve import (
    IbmParams,
    ibm25_retrieve,
    recall_objective,
    retrieve_all,
    tune,
)
from hoprank.ranking import Ranking
from hoprank.textpipe import PreprocessConfig, TokenList, preprocess

PLAIN_CFG = PreprocessConfig()  # no stopwords/lemmas: queries pass through verbatim


def tl(*words):
    return TokenList(tuple(words))


def question(qid, text):
    # single choice equal to the key; query text is "<text> answer"
    return Question(qid, text, {"A": "answer"}, "A", "dev")


def reference_ibm25(question_obj, index, params, pre_cfg):
    """Independent step-by-step I-BM25 oracle over dict-based vectors."""
    from hoprank.corpus import question_query_text

    tokens = preprocess(question_query_text(question_obj, params.query_mode), pre_cfg)
    qvec = query_vector(tokens, index, "bm25")
    q = dict(qvec.pairs())
    docs = {
        sid: dict(vec.pairs())
        for sid, vec in zip(index.doc_ids, index.doc_vectors)
    }

    def cos(a, b):
        na = math.sqrt(sum(w * w for w in a.values()))
        nb = math.sqrt(sum(w * w for w in b.values()))
        if na == 0 or nb == 0:
            return 0.0
        dot = sum(w * b[t] for t, w in a.items() if t in b)
        return dot / (na * nb)

    pool = sorted(docs)
    out = []
    n = params.n0
    while pool:
        scored = sorted(pool, key=lambda sid: (-cos(q, docs[sid]), sid))
        selected = scored[: min(n, len(pool))]
        out.extend((sid, cos(q, docs[sid])) for sid in selected)
        agg = {}
        for sid in selected:
            for t, w in docs[sid].items():
                agg[t] = max(agg.get(t, 0.0), w)
        for t, w in agg.items():
            scaled = params.downscale * w
            if scaled > q.get(t, 0.0):
                q[t] = scaled
        pool = [sid for sid in pool if sid not in selected]
        n = math.ceil(n * params.growth)
    return out[: params.K]


@pytest.fixture
def four_doc_index():
    docs = [
        ("d1", tl("red", "red")),
        ("d2", tl("red", "blue")),
        ("d3", tl("blue", "blue")),
        ("d4", tl("green", "green")),
    ]
    return build_index(docs)


class TestIbm25:
    def test_single_statement_corpus(self):
        index = build_index([("only", tl("red", "answer"))])
        params = IbmParams(n0=1, K=1)
        ranking = ibm25_retrieve(question("Q1", "red"), index, params, PLAIN_CFG)
        assert ranking.ids() == ["only"]

    def test_downscale_zero_equals_plain_bm25(self, four_doc_index):
        q = question("Q1", "red blue")
        params = IbmParams(n0=1, growth=1.0, downscale=0.0, K=4)
        iterative = ibm25_retrieve(q, four_doc_index, params, PLAIN_CFG)
        tokens = preprocess("red blue answer", PLAIN_CFG)
        plain = bm25_rank(
            query_vector(tokens, four_doc_index), four_doc_index, 4, "Q1"
        )
        assert iterative.ids() == plain.ids()

    def test_n0_at_least_corpus_equals_plain_bm25(self, four_doc_index):
        q = question("Q1", "red blue")
        params = IbmParams(n0=4, growth=2.0, downscale=0.7, K=4)
        iterative = ibm25_retrieve(q, four_doc_index, params, PLAIN_CFG)
        tokens = preprocess("red blue answer", PLAIN_CFG)
        plain = bm25_rank(
            query_vector(tokens, four_doc_index), four_doc_index, 4, "Q1"
        )
        assert iterative.ids() == plain.ids()

    def test_four_statement_hand_trace(self, four_doc_index):
        # Query "red": iteration 1 selects d1 (pure red) then d2 (red+blue);
        # the max-merged query picks up d2's blue weight, so iteration 2
        # ranks d3 (blue) above d4 (green, similarity 0).
        params = IbmParams(n0=2, growth=1.0, downscale=1.0, K=4)
        ranking = ibm25_retrieve(question("Q1", "red"), four_doc_index, params, PLAIN_CFG)
        assert ranking.ids() == ["d1", "d2", "d3", "d4"]
        scores = dict(ranking.items)
        assert scores["d1"] > scores["d2"] > 0
        assert scores["d3"] > 0
        assert scores["d4"] == 0.0

    def test_matches_reference_implementation(self):
        rng = random.Random(42)
        vocab = [f"w{i}" for i in range(12)]
        for trial in range(8):
            docs = [
                (f"d{i:02d}", tl(*rng.choices(vocab, k=rng.randint(1, 6))))
                for i in range(rng.randint(2, 15))
            ]
            index = build_index(docs)
            params = IbmParams(
                n0=rng.randint(1, 3),
                growth=rng.choice([1.0, 1.5, 2.0]),
                downscale=rng.choice([0.0, 0.3, 0.5, 1.0]),
                K=len(docs),
            )
            q = question(f"Q{trial}", " ".join(rng.choices(vocab, k=3)))
            got = ibm25_retrieve(q, index, params, PLAIN_CFG)
            expected = reference_ibm25(q, index, params, PLAIN_CFG)
            assert got.ids() == [sid for sid, _ in expected]
            for (sid, score), (_, ref_score) in zip(got.items, expected):
                assert score == pytest.approx(ref_score, abs=1e-9)

    def test_output_duplicate_free_prefix_of_permutation(self, four_doc_index):
        params = IbmParams(n0=1, growth=2.0, downscale=0.5, K=3)
        ranking = ibm25_retrieve(question("Q1", "red"), four_doc_index, params, PLAIN_CFG)
        ids = ranking.ids()
        assert len(set(ids)) == len(ids) == 3
        assert set(ids) <= {"d1", "d2", "d3", "d4"}

    def test_deterministic_across_thread_counts(self, mini_snapshot, mini_index, pre_cfg):
        _, questions, _, _ = mini_snapshot
        params = IbmParams(n0=4, growth=2.0, downscale=0.5, K=30)
        runs = [
            retrieve_all(questions, mini_index, params, pre_cfg, threads=t)
            for t in (1, 2, 4)
        ]
        for other in runs[1:]:
            assert [r.question_id for r in other] == [r.question_id for r in runs[0]]
            for a, b in zip(runs[0], other):
                assert a.items == b.items

    def test_query_norm_monotone(self, four_doc_index):
        # The max-update can only grow query coordinates.
        import numpy as np

        matrix, _ = four_doc_index.bm25_matrix()
        tokens = preprocess("red answer", PLAIN_CFG)
        qvec = query_vector(tokens, four_doc_index)
        q = np.zeros(matrix.shape[1])
        q[qvec.term_ids] = qvec.weights
        prev = q.copy()
        for selected in ([0, 1], [2, 3]):
            agg = matrix[selected].max(axis=0).toarray().ravel()
            q = np.maximum(q, 0.5 * agg)
            assert np.all(q >= prev)
            prev = q.copy()


class TestTune:
    def make_setup(self):
        docs = [
            ("s1", tl("red", "apple")),
            ("s2", tl("red", "fruit")),
            ("s3", tl("blue", "sky")),
            ("s4", tl("green", "grass")),
        ]
        index = build_index(docs)
        questions = [question("Q1", "red apple"), question("Q2", "blue sky")]
        ratings = RatingTable.from_entries({
            ("Q1", "s1"): 2, ("Q1", "s2"): 1,
            ("Q2", "s3"): 1,
        })
        return index, questions, ratings

    def test_singleton_grid(self):
        index, questions, ratings = self.make_setup()
        params = IbmParams(n0=1, K=4)
        best, report = tune([params], questions, ratings, index, PLAIN_CFG)
        assert best == params
        assert len(report) == 1

    def test_superset_config_wins(self):
        index, questions, ratings = self.make_setup()
        small = IbmParams(n0=1, growth=1.0, downscale=0.0, K=1)
        big = IbmParams(n0=1, growth=1.0, downscale=0.0, K=4)
        best, report = tune([small, big], questions, ratings, index, PLAIN_CFG)
        assert best == big
        objectives = dict(zip(("small", "big"), (r[1] for r in report)))
        assert objectives["big"] >= objectives["small"]

    def test_objective_matches_hand_computation(self):
        ratings = RatingTable.from_entries({
            ("Q1", "a"): 1, ("Q1", "b"): 2,
            ("Q2", "c"): 1, ("Q2", "d"): 1,
        })
        rankings = [
            Ranking("Q1", [("a", 1.0), ("x", 0.5)]),
            Ranking("Q2", [("c", 1.0), ("d", 0.5)]),
        ]
        # category 1: Q1 1/1, Q2 2/2 -> 1.0; category 2: Q1 0/1 -> 0.0
        assert recall_objective(rankings, ratings, k=2) == pytest.approx(0.5)

    def test_no_rated_statements_is_error(self):
        index, questions, _ = self.make_setup()
        with pytest.raises(DataError):
            tune([IbmParams(n0=1, K=4)], questions, RatingTable.from_entries({}),
                 index, PLAIN_CFG)

    def test_bm25_mismatch_rejected(self):
        index, questions, ratings = self.make_setup()
        from hoprank.index import Bm25Params

        bad = IbmParams(n0=1, K=4, bm25=Bm25Params(k1=0.9))
        with pytest.raises(DataError, match="BM25"):
            tune([bad], questions, ratings, index, PLAIN_CFG)


def test_param_validation():
    with pytest.raises(ValueError):
        IbmParams(n0=0)
    with pytest.raises(ValueError):
        IbmParams(growth=0.5)
    with pytest.raises(ValueError):
        IbmParams(downscale=1.5)
    with pytest.raises(ValueError):
        IbmParams(n0=16, K=8)
    with pytest.raises(ValueError):
        IbmParams(query_mode="everything")
