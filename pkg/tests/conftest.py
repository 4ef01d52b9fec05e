import pytest

from hoprank import corpus, textpipe
from hoprank.index import build_index
from hoprank.textpipe import TokenList

from pathlib import Path

FIXTURE_DIR = Path(__file__).parent / "fixtures" / "worldtree_mini"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def pre_cfg():
    return textpipe.default_config()


@pytest.fixture(scope="session")
def mini_snapshot():
    return corpus.read_snapshot(FIXTURE_DIR / "golden" / "snapshot")


@pytest.fixture(scope="session")
def mini_index(mini_snapshot, pre_cfg):
    statements, _, _, _ = mini_snapshot
    tokenized = [(s.id, textpipe.preprocess(s.text, pre_cfg)) for s in statements]
    return build_index(tokenized)


def tokens(*words: str) -> TokenList:
    return TokenList(tuple(words))
