import re
from pathlib import Path

import pytest

FIXTURE_DIR = (
    Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "worldtree_mini"
)
SNAPSHOT_DIR = FIXTURE_DIR / "golden" / "snapshot"
CANDIDATES_PATH = FIXTURE_DIR / "golden" / "candidates.tsv"


@pytest.fixture(scope="session")
def snapshot_dir() -> Path:
    return SNAPSHOT_DIR


@pytest.fixture(scope="session")
def candidates_path() -> Path:
    return CANDIDATES_PATH


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory) -> Path:
    """A small randomly-initialized BERT checkpoint whose vocabulary covers the
    fixture corpus, so tests run offline and overfitting is feasible on CPU."""
    import torch
    from transformers import BertConfig, BertForSequenceClassification, BertTokenizer

    words: set[str] = set()
    for name in ("statements.tsv", "questions.tsv"):
        text = (SNAPSHOT_DIR / name).read_text(encoding="utf-8")
        words.update(re.findall(r"[a-z0-9]+", text.lower()))
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + sorted(words)

    out = tmp_path_factory.mktemp("tiny-bert")
    (out / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(out / "vocab.txt"), do_lower_case=True)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
        num_labels=1,
    )
    torch.manual_seed(0)
    model = BertForSequenceClassification(config)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out


@pytest.fixture(scope="session")
def tiny_tokenizer(tiny_checkpoint):
    from transformers import AutoTokenizer

    return AutoTokenizer.from_pretrained(tiny_checkpoint)
