"""Tokenization, vocabulary, and corpus file handling."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from ..errors import FileUnreadable, SchemaViolation

# Latin/digit runs as one token each, CJK ideographs one token per character.
_TOKEN_RE = re.compile(r"[A-Za-z0-9]+|[㐀-䶿一-鿿]")

LABEL_NAMES = ("pos", "neg", "neu")
LABEL_TO_INDEX = {name: i for i, name in enumerate(LABEL_NAMES)}


@dataclass(frozen=True)
class LabeledExample:
    text: str
    label: int  # 0 positive, 1 negative, 2 neutral


def tokenize(text: str) -> list[str]:
    """Lowercased Latin runs plus single CJK characters; everything else dropped."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class Vocab:
    UNK = "<unk>"
    PAD = "<pad>"

    token_to_index: dict[str, int]
    index_to_token: tuple[str, ...]
    min_count: int

    def __len__(self) -> int:
        return len(self.index_to_token)

    def encode(self, tokens) -> list[int]:
        return [self.token_to_index.get(t, 0) for t in tokens]


def build_vocab(token_lists, min_count: int = 1) -> Vocab:
    """Deterministic vocabulary: specials, then tokens by (-count, token)."""
    counts = Counter()
    for tokens in token_lists:
        counts.update(tokens)
    kept = sorted(
        (t for t, c in counts.items() if c >= min_count and t not in (Vocab.UNK, Vocab.PAD)),
        key=lambda t: (-counts[t], t),
    )
    index_to_token = (Vocab.UNK, Vocab.PAD, *kept)
    return Vocab(
        token_to_index={t: i for i, t in enumerate(index_to_token)},
        index_to_token=index_to_token,
        min_count=min_count,
    )


def read_corpus(path) -> list[LabeledExample]:
    """Line-delimited "label<TAB>text" with labels pos/neg/neu."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise FileUnreadable(f"cannot read {path}: {err}") from None
    corpus: list[LabeledExample] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        label, sep, body = line.partition("\t")
        if not sep:
            raise SchemaViolation(line_no, "label", "expected 'label<TAB>text'")
        if label not in LABEL_TO_INDEX:
            raise SchemaViolation(
                line_no, "label", f"unknown label {label!r}, expected pos/neg/neu"
            )
        corpus.append(LabeledExample(text=body, label=LABEL_TO_INDEX[label]))
    return corpus
