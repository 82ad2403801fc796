"""Per-character output labels.

Each surface symbol is labelled with the stretch of gold text it stands
for: itself in the common case, an expansion such as ``aḥ_`` where a
juncture was merged, or the empty label where the symbol was deleted.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import AlignError
from .symbols import SymbolSequence

log = logging.getLogger(__name__)

SPACE = "_"
EPS = ""
UNK = "<UNK>"
MAX_LABEL = 3

# stands in for the whitespace between chunks during alignment
_BOUNDARY = "\x00"

LabelSequence = tuple  # one label string (or id) per surface symbol


def gold_symbols(gold: str) -> list[str]:
    return [SPACE if c == " " else c for c in gold]


def _matches(s: str, g: str) -> bool:
    return s == g or (s == _BOUNDARY and g == SPACE)


def _raw_alignment(src: Sequence[str], gold: Sequence[str]) -> list[str]:
    n, m = len(src), len(gold)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = i
    for j in range(1, m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        s = src[i - 1]
        row, up = dp[i], dp[i - 1]
        for j in range(1, m + 1):
            row[j] = min(up[j - 1] + (not _matches(s, gold[j - 1])), up[j] + 1, row[j - 1] + 1)

    # tie order on the way back: identity, insertion, substitution, deletion
    pieces: list[list[str]] = [[] for _ in range(n)]
    i, j = n, m
    while i > 0 or j > 0:
        cur = dp[i][j]
        if i > 0 and j > 0 and _matches(src[i - 1], gold[j - 1]) and dp[i - 1][j - 1] == cur:
            pieces[i - 1].append(gold[j - 1])
            i, j = i - 1, j - 1
        elif j > 0 and dp[i][j - 1] + 1 == cur:
            # inserted gold symbols belong to the preceding surface symbol
            pieces[max(i - 1, 0)].append(gold[j - 1])
            j -= 1
        elif i > 0 and j > 0 and dp[i - 1][j - 1] + 1 == cur:
            pieces[i - 1].append(gold[j - 1])
            i, j = i - 1, j - 1
        else:
            i -= 1
    return ["".join(reversed(p)) for p in pieces]


def _fit_budget(labels: list[str], chunks: list[tuple[int, int]]):
    for start, end in chunks:
        for k in range(start, end + 1):
            over = len(labels[k]) - MAX_LABEL
            if over <= 0:
                continue
            if k < end and len(labels[k + 1]) + over <= MAX_LABEL:
                labels[k + 1] = labels[k][-over:] + labels[k + 1]
                labels[k] = labels[k][:-over]
            elif k > start and len(labels[k - 1]) + over <= MAX_LABEL:
                labels[k - 1] = labels[k - 1] + labels[k][:over]
                labels[k] = labels[k][over:]
            else:
                raise AlignError(f"label {labels[k]!r} at position {k} exceeds {MAX_LABEL} "
                                 "symbols and no neighbour can absorb it")


def align_gold(source: SymbolSequence, gold: str) -> tuple[str, ...]:
    """Label every surface symbol with the gold substring it realizes."""
    if not gold:
        raise AlignError("empty gold segmentation")
    tokens: list[str] = []
    where: list[int] = []  # token index of every real symbol
    bounds = set(source.chunk_boundaries)
    for i, s in enumerate(source.symbols):
        if i in bounds:
            tokens.append(_BOUNDARY)
        where.append(len(tokens))
        tokens.append(s)
    raw = _raw_alignment(tokens, gold_symbols(gold))

    labels = [raw[t] for t in where]
    for b in source.chunk_boundaries:
        piece = raw[where[b] - 1]
        if not piece.startswith(SPACE):
            raise AlignError(f"gold has no word boundary at the chunk break before symbol {b}")
        labels[b] = piece[1:] + labels[b]
    _fit_budget(labels, source.chunks())
    return tuple(labels)


def _surface_label(label: str, symbol: str) -> str:
    return symbol if label == UNK else label


def decode_labels(source: SymbolSequence, labels: Sequence, vocab: "LabelVocab | None" = None) -> str:
    return " ".join(" ".join(ws) for ws in chunk_words(source, labels, vocab) if ws)


def chunk_words(source: SymbolSequence, labels: Sequence, vocab: "LabelVocab | None" = None
                ) -> list[list[str]]:
    if len(labels) != len(source):
        raise ValueError(f"{len(labels)} labels for {len(source)} symbols")
    if vocab is not None:
        labels = vocab.decode(labels)
    out = []
    for start, end in source.chunks():
        text = "".join(_surface_label(labels[k], source[k]) for k in range(start, end + 1))
        out.append(text.replace(SPACE, " ").split())
    return out


@dataclass
class LabelVocab:
    labels: list[str] = field(default_factory=lambda: [EPS, UNK])

    def __post_init__(self):
        if self.labels[:2] != [EPS, UNK]:
            raise ValueError("vocabulary must start with the empty label and UNK")
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise ValueError("duplicate labels in vocabulary")

    def __len__(self):
        return len(self.labels)

    def __contains__(self, label):
        return label in self.index

    @property
    def unk_id(self) -> int:
        return 1

    def id(self, label: str) -> int:
        return self.index.get(label, self.unk_id)

    def encode(self, labels: Iterable[str]) -> list[int]:
        return [self.id(lab) for lab in labels]

    def decode(self, ids: Iterable) -> list[str]:
        return [self.labels[i] if not isinstance(i, str) else i for i in ids]

    def to_text(self) -> str:
        return "".join(lab + "\n" for lab in self.labels)

    @classmethod
    def from_text(cls, text: str) -> "LabelVocab":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return cls(lines)

    def save(self, path: str | Path):
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LabelVocab":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def build_label_vocab(corpus: Iterable[Sequence[str]]) -> LabelVocab:
    counts = Counter(lab for seq in corpus for lab in seq)
    counts.pop(EPS, None)
    counts.pop(UNK, None)
    ordered = sorted(counts, key=lambda lab: (-counts[lab], lab))
    return LabelVocab([EPS, UNK] + ordered)


def align_records(records, warn=True):
    """Align every record with gold; returns (aligned pairs, rejected ids)."""
    aligned, rejected = [], []
    for rec in records:
        try:
            aligned.append((rec, align_gold(rec.source, rec.gold)))
        except AlignError as exc:
            rejected.append(rec.id)
            if warn:
                log.warning("%s: skipped, %s", rec.id, exc)
    return aligned, rejected
