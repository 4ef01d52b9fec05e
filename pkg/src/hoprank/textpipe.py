"""Deterministic text preprocessing: lowercase -> tokenize -> lemmatize -> drop stopwords.

The processing order is fixed; changing it changes the vocabulary, so it is
part of the reproducibility contract. Lemmatization is a lookup table
(exception-list style), which keeps the pipeline dependency-free and makes
preprocessing a pure function of (text, config).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ResourceError

# Maximal runs of alphanumeric characters; underscores are punctuation here.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_WS_RE = re.compile(r"\S+", re.UNICODE)


@dataclass(frozen=True)
class PreprocessConfig:
    stopwords: frozenset[str] = frozenset()
    lemma_map: dict[str, str] = field(default_factory=dict)
    lowercase: bool = True
    strip_punctuation: bool = True


@dataclass(frozen=True)
class TokenList:
    tokens: tuple[str, ...]

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self):
        return len(self.tokens)


def preprocess(text: str, cfg: PreprocessConfig) -> TokenList:
    """Turn raw text into the token stream used for indexing and querying."""
    if cfg.lowercase:
        text = text.lower()
    raw = _TOKEN_RE.findall(text) if cfg.strip_punctuation else _WS_RE.findall(text)
    out = []
    for tok in raw:
        tok = cfg.lemma_map.get(tok, tok)
        if tok and tok not in cfg.stopwords:
            out.append(tok)
    return TokenList(tuple(out))


def _resolve_fixed_points(lemma_map: dict[str, str], path: str) -> dict[str, str]:
    # Chase chains (a->b, b->c) down to their fixed point so that lemma values
    # are themselves invariant under the map; cycles are a resource bug.
    resolved = {}
    for token in lemma_map:
        seen = {token}
        cur = token
        while cur in lemma_map and lemma_map[cur] != cur:
            cur = lemma_map[cur]
            if cur in seen:
                raise ResourceError(f"{path}: lemma cycle involving {token!r}")
            seen.add(cur)
        resolved[token] = cur
    return resolved


def load_preprocess_config(
    stopword_path: str | Path | None,
    lemma_path: str | Path | None,
    allow_empty: bool = False,
) -> PreprocessConfig:
    """Read stopword (one token per line) and lemma (token<TAB>lemma) resources.

    Blank lines and '#' comments are ignored in both files. A missing path is
    only acceptable with allow_empty, in which case it contributes an empty
    stopword set / identity lemma map.
    """
    stopwords: set[str] = set()
    if stopword_path is not None and Path(stopword_path).exists():
        for line in Path(stopword_path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                stopwords.add(line.lower())
    elif not allow_empty:
        raise ResourceError(f"stopword file not found: {stopword_path}")

    lemma_map: dict[str, str] = {}
    if lemma_path is not None and Path(lemma_path).exists():
        for lineno, line in enumerate(
            Path(lemma_path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split("\t")
            if len(fields) != 2:
                raise ResourceError(
                    f"{lemma_path}:{lineno}: expected 2 tab-separated fields, got {len(fields)}"
                )
            token, lemma = (f.strip().lower() for f in fields)
            if not token or not lemma:
                raise ResourceError(f"{lemma_path}:{lineno}: empty token or lemma")
            if not _TOKEN_RE.fullmatch(lemma):
                raise ResourceError(f"{lemma_path}:{lineno}: lemma {lemma!r} is not a single token")
            lemma_map[token] = lemma
    elif not allow_empty:
        raise ResourceError(f"lemma file not found: {lemma_path}")

    lemma_map = _resolve_fixed_points(lemma_map, str(lemma_path))
    return PreprocessConfig(stopwords=frozenset(stopwords), lemma_map=lemma_map)


def default_config() -> PreprocessConfig:
    """Config backed by the resources shipped with the package."""
    base = resources.files("hoprank") / "resources"
    return load_preprocess_config(
        str(base / "stopwords.txt"), str(base / "lemmas.tsv")
    )
