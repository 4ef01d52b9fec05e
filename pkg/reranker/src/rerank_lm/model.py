"""Regression fine-tuning and batch inference for candidate re-ranking.

The encoder gets [CLS] question+answer [SEP] explanation [SEP] sequences and a
single-output head trained with mean-squared-error against the expert rating.
Truncation trims the explanation side first; the question+answer side carries
the query semantics and is only cut when it alone exceeds the budget.
"""

from __future__ import annotations

import json
import logging
import random
from pathlib import Path

import torch
from torch.utils.data import DataLoader, Dataset

from . import RerankerError
from .config import RerankerConfig
from .data import (
    TrainingPair,
    load_question_texts,
    load_statements,
    read_candidates,
    write_score_file,
)

log = logging.getLogger(__name__)


def _load_checkpoint(checkpoint_id: str):
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(checkpoint_id)
        model = AutoModelForSequenceClassification.from_pretrained(
            checkpoint_id, num_labels=1, problem_type="regression"
        )
    except (OSError, ValueError) as exc:
        raise RerankerError(f"checkpoint unavailable: {checkpoint_id!r} ({exc})") from exc
    return tokenizer, model


def encode_pair(
    tokenizer, text_a: str, text_b: str, max_length: int
) -> dict[str, list[int]]:
    ids_a = tokenizer.encode(text_a, add_special_tokens=False)
    ids_b = tokenizer.encode(text_b, add_special_tokens=False)
    budget = max_length - 3  # [CLS], two [SEP]
    if len(ids_a) + len(ids_b) > budget:
        ids_b = ids_b[: max(budget - len(ids_a), 0)]
    if len(ids_a) + len(ids_b) > budget:
        ids_a = ids_a[: budget - len(ids_b)]
    input_ids = [tokenizer.cls_token_id] + ids_a + [tokenizer.sep_token_id]
    token_type_ids = [0] * len(input_ids)
    if ids_b:
        input_ids += ids_b + [tokenizer.sep_token_id]
        token_type_ids += [1] * (len(ids_b) + 1)
    return {
        "input_ids": input_ids,
        "token_type_ids": token_type_ids,
        "attention_mask": [1] * len(input_ids),
    }


class _PairDataset(Dataset):
    def __init__(self, tokenizer, pairs: list[TrainingPair], max_length: int):
        self.encoded = [
            encode_pair(tokenizer, p.input_text_a, p.input_text_b, max_length)
            for p in pairs
        ]
        self.labels = [p.label for p in pairs]
        self.pad_id = tokenizer.pad_token_id

    def __len__(self):
        return len(self.encoded)

    def __getitem__(self, i):
        return self.encoded[i], self.labels[i]

    def collate(self, batch):
        encoded, labels = zip(*batch)
        width = max(len(e["input_ids"]) for e in encoded)
        def pad(key, value):
            return torch.tensor(
                [e[key] + [value] * (width - len(e[key])) for e in encoded]
            )
        return {
            "input_ids": pad("input_ids", self.pad_id),
            "token_type_ids": pad("token_type_ids", 0),
            "attention_mask": pad("attention_mask", 0),
        }, torch.tensor(labels, dtype=torch.float32)


def train(pairs: list[TrainingPair], cfg: RerankerConfig, out_dir: str | Path) -> float:
    """Fine-tune under MSE and save the model artifact directory.

    The artifact holds the weights, tokenizer, a config snapshot and the final
    mean training loss; returns that loss.
    """
    if not pairs:
        raise RerankerError("no training pairs")
    torch.manual_seed(cfg.seed)
    tokenizer, model = _load_checkpoint(cfg.checkpoint_id)
    dataset = _PairDataset(tokenizer, pairs, cfg.max_sequence_length)
    model.train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)
    loss_fn = torch.nn.MSELoss()

    order = list(range(len(dataset)))
    for epoch in range(cfg.epochs):
        random.Random(cfg.seed + epoch).shuffle(order)
        loader = DataLoader(
            [dataset[i] for i in order],
            batch_size=cfg.batch_size,
            collate_fn=dataset.collate,
        )
        total, count = 0.0, 0
        for inputs, labels in loader:
            optimizer.zero_grad()
            logits = model(**inputs).logits.view(-1)
            loss = loss_fn(logits, labels)
            loss.backward()
            optimizer.step()
            total += loss.item() * labels.numel()
            count += labels.numel()
        log.info("epoch %d/%d running MSE %.6f", epoch + 1, cfg.epochs, total / count)

    # Final training MSE from an inference-mode pass (dropout off), so the
    # reported loss reflects the fitted model rather than per-epoch noise.
    model.eval()
    loader = DataLoader(
        list(dataset), batch_size=cfg.batch_size, collate_fn=dataset.collate
    )
    total, count = 0.0, 0
    with torch.no_grad():
        for inputs, labels in loader:
            logits = model(**inputs).logits.view(-1)
            total += loss_fn(logits, labels).item() * labels.numel()
            count += labels.numel()
    final_loss = total / count
    log.info("final training MSE %.6f", final_loss)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    (out_dir / "training_summary.json").write_text(
        json.dumps({"final_train_mse": final_loss, "config": cfg.to_dict()}, indent=2)
        + "\n",
        encoding="utf-8",
    )
    return final_loss


@torch.no_grad()
def predict(
    model_dir: str | Path,
    candidates_path: str | Path,
    snapshot_dir: str | Path,
    out_path: str | Path,
    batch_size: int = 32,
    max_sequence_length: int | None = None,
    answer_separator: str = " ",
) -> int:
    """Score every candidate pair and write the score file; returns row count."""
    tokenizer, model = _load_checkpoint(str(model_dir))
    model.eval()
    if max_sequence_length is None:
        summary_path = Path(model_dir) / "training_summary.json"
        if summary_path.exists():
            summary = json.loads(summary_path.read_text(encoding="utf-8"))
            max_sequence_length = summary["config"]["max_sequence_length"]
            answer_separator = summary["config"]["answer_separator"]
        else:
            max_sequence_length = 128

    statements = load_statements(snapshot_dir)
    question_texts = load_question_texts(snapshot_dir, answer_separator)
    blocks = read_candidates(candidates_path)

    flat: list[tuple[str, str]] = []
    for qid, sids in blocks:
        if qid not in question_texts:
            raise RerankerError(f"candidate question {qid!r} not in snapshot")
        for sid in sids:
            if sid not in statements:
                raise RerankerError(
                    f"candidate statement {sid!r} (question {qid}) not in snapshot"
                )
            flat.append((qid, sid))

    rows: list[tuple[str, str, float]] = []
    pad_id = tokenizer.pad_token_id
    for start in range(0, len(flat), batch_size):
        chunk = flat[start : start + batch_size]
        encoded = [
            encode_pair(
                tokenizer, question_texts[qid], statements[sid], max_sequence_length
            )
            for qid, sid in chunk
        ]
        width = max(len(e["input_ids"]) for e in encoded)
        inputs = {
            "input_ids": torch.tensor(
                [e["input_ids"] + [pad_id] * (width - len(e["input_ids"])) for e in encoded]
            ),
            "token_type_ids": torch.tensor(
                [e["token_type_ids"] + [0] * (width - len(e["token_type_ids"])) for e in encoded]
            ),
            "attention_mask": torch.tensor(
                [e["attention_mask"] + [0] * (width - len(e["attention_mask"])) for e in encoded]
            ),
        }
        logits = model(**inputs).logits.view(-1)
        for (qid, sid), score in zip(chunk, logits.tolist()):
            rows.append((qid, sid, float(score)))
    write_score_file(rows, out_path)
    return len(rows)
