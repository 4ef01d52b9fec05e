"""Command-line entry points: ``rerank-lm train`` and ``rerank-lm predict``.

Exit codes follow the retrieval pipeline's convention: 0 success, 1 usage
error, 2 data/checkpoint error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import RerankerError
from .config import NEGATIVE_SAMPLING_MODES, RerankerConfig
from .data import build_pairs, load_ratings
from .model import predict, train

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rerank-lm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="fine-tune a rating-regression reranker")
    tr.add_argument("--snapshot", required=True, help="normalized snapshot directory")
    tr.add_argument("--out", required=True, help="model artifact output directory")
    tr.add_argument("--checkpoint", required=True, help="pretrained encoder identifier")
    tr.add_argument("--seed", type=int, default=42)
    tr.add_argument("--epochs", type=int, default=3)
    tr.add_argument("--batch-size", type=int, default=16)
    tr.add_argument("--learning-rate", type=float, default=2e-5)
    tr.add_argument("--max-sequence-length", type=int, default=128)
    tr.add_argument(
        "--negative-sampling", choices=NEGATIVE_SAMPLING_MODES, default="off"
    )
    tr.add_argument("--negatives-per-question", type=int, default=0)
    tr.add_argument(
        "--candidates", default=None,
        help="candidate export file (required for retrieval_hard sampling)",
    )
    tr.add_argument("--answer-separator", default=" ")

    pr = sub.add_parser("predict", help="score candidate pairs with a trained model")
    pr.add_argument("--model", required=True, help="model artifact directory")
    pr.add_argument("--snapshot", required=True, help="normalized snapshot directory")
    pr.add_argument("--candidates", required=True, help="candidate export file")
    pr.add_argument("--out", required=True, help="score file to write")
    pr.add_argument("--batch-size", type=int, default=32)
    return parser


def run(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "train":
            cfg = RerankerConfig(
                checkpoint_id=args.checkpoint,
                seed=args.seed,
                epochs=args.epochs,
                batch_size=args.batch_size,
                learning_rate=args.learning_rate,
                max_sequence_length=args.max_sequence_length,
                negative_sampling=args.negative_sampling,
                negatives_per_question=args.negatives_per_question,
                answer_separator=args.answer_separator,
            )
            ratings = load_ratings(args.snapshot)
            pairs = build_pairs(args.snapshot, ratings, args.candidates, cfg)
            loss = train(pairs, cfg, args.out)
            print(f"trained on {len(pairs)} pairs, final MSE {loss:.6f}")
        else:
            count = predict(
                args.model, args.candidates, args.snapshot, args.out,
                batch_size=args.batch_size,
            )
            print(f"wrote {count} scores to {args.out}")
    except ValueError as exc:
        print(f"rerank-lm: error: {exc}", file=sys.stderr)
        return 1
    except RerankerError as exc:
        print(f"rerank-lm: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    raise SystemExit(run())
