"""Synthetic corpora with deterministic juncture rewriting.

Sentences are random word sequences from a small IAST lexicon. Adjacent
words either stay separate chunks or merge under a handful of sandhi-like
rules. A merge is only made where some rule rewrites the juncture, so every
word boundary inside a chunk leaves a mark on the surface, and the surface is
a deterministic function of the gold segmentation. Each sentence also gets a candidate record: the gold words at
their true spans plus every lexicon word that occurs on the surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import vocab_nodes
from .symbols import CandidateRecord, SentenceRecord, normalize

LEXICON = (
    "śvetaḥ", "dhāvati", "rāmaḥ", "vanam", "gacchati", "iti", "asti", "ca", "eva",
    "tat", "etat", "idam", "sā", "aham", "na", "api", "devāḥ", "āgacchanti", "bālaḥ",
    "paṭhati", "nadī", "atra", "uktam", "vadati", "mama", "gṛham", "jalam", "pibati",
    "yadi", "kim", "bhavati", "tatra", "ambikā", "upaviśati", "mahā", "ratha", "iva",
)

VOICED = set("gjdbmnyrvh")
VOWELS = set("aāiīuūeo")


def join(left: str, right: str) -> tuple[str, str, bool] | None:
    """Merge two words at a juncture, or None when no rule applies.

    Returns (left surface, right surface, shared) where ``shared`` means the
    last symbol of the left surface is also the first symbol of the right
    word's span.
    """
    if left.endswith("aḥ") and not left.endswith("āḥ") and right[0] in VOICED:
        return left[:-2] + "o", right, False
    if left[-1] in "aā" and right[0] in "aā":
        return left[:-1] + "ā", right[1:], True
    if left[-1] == "a" and right[0] == "i":
        return left[:-1] + "e", right[1:], True
    if left[-1] == "a" and right[0] == "u":
        return left[:-1] + "o", right[1:], True
    if left[-1] == "i" and right[0] == "i":
        return left[:-1] + "ī", right[1:], True
    if left[-1] == "i" and right[0] in "aue":
        return left[:-1] + "y", right, False
    if left[-1] == "t" and right[0] in VOWELS:
        return left[:-1] + "d", right, False
    if left[-1] == "m" and right[0] not in VOWELS:
        return left[:-1] + "ṃ", right, False
    if left[-1] == "ḥ" and right[0] in "tc":
        return left[:-1] + ("s" if right[0] == "t" else "ś"), right, False
    return None


def chunk_break(left: str, right: str) -> str | None:
    """Surface of ``left`` when a separate chunk follows, if it changes."""
    if left.endswith("āḥ") and right[0] in VOWELS:
        return left[:-1]
    return None


@dataclass
class ToySentence:
    record: SentenceRecord
    candidates: CandidateRecord
    gold_spans: list[tuple[str, int, int]]


def render(words: list[str], merge: list[bool]) -> tuple[str, list[tuple[str, int, int]]]:
    """Surface text and gold word spans for ``words``; ``merge[k]`` joins k and k+1."""
    chunks: list[str] = []
    spans = []
    cur = ""
    offset = 0  # symbols in finished chunks
    pending = words[0]
    head = 0
    for k in range(len(words)):
        if k == len(words) - 1:
            cur += pending
            spans.append((words[k], offset + head, offset + len(cur) - 1))
            chunks.append(cur)
            break
        joined = join(pending, words[k + 1]) if merge[k] else None
        if joined is not None:
            left, right, shared = joined
            cur += left
            spans.append((words[k], offset + head, offset + len(cur) - 1))
            head = len(cur) - 1 if shared else len(cur)
            pending = right
        else:
            left = chunk_break(pending, words[k + 1]) or pending
            cur += left
            spans.append((words[k], offset + head, offset + len(cur) - 1))
            chunks.append(cur)
            offset += len(cur)
            cur, head, pending = "", 0, words[k + 1]
    return " ".join(chunks), spans


def make_toy_corpus(n: int, seed: int = 0, p_break: float = 0.1, min_words: int = 2,
                    max_words: int = 5, lexicon=LEXICON, prefix: str = "toy") -> list[ToySentence]:
    rng = np.random.default_rng(seed)
    out = []
    for s in range(n):
        k = int(rng.integers(min_words, max_words + 1))
        words = [lexicon[int(i)] for i in rng.integers(0, len(lexicon), size=k)]
        merge = [bool(rng.random() >= p_break) for _ in range(k - 1)]
        surface, spans = render(words, merge)
        sid = f"{prefix}{s:04d}"
        seq = normalize(surface)
        rec = SentenceRecord(sid, seq, " ".join(words))
        nodes = {(t, h, e) for t, h, e in spans}
        nodes.update(w.key() for w in vocab_nodes(seq, lexicon))
        cand = CandidateRecord(sid, tuple(sorted(nodes, key=lambda x: (x[1], x[2], x[0]))))
        out.append(ToySentence(rec, cand, spans))
    return out
