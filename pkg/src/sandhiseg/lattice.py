"""Lattice construction: character nodes plus auxiliary word nodes.

Word nodes come from contiguous n-grams, from a word list matched against
the surface, or from an external candidate-space file whose offsets are
rectified against the input when they do not line up.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import NoPath
from .symbols import CandidateRecord, SymbolSequence

log = logging.getLogger(__name__)

CHAR = "char"
WORD = "word"

DEFAULT_PATH_CAP = 10_000


@dataclass(frozen=True)
class Span:
    text: str
    head: int
    tail: int
    kind: str = WORD

    def key(self):
        return (self.text, self.head, self.tail)


@dataclass(frozen=True)
class Lattice:
    chars: tuple[Span, ...]
    words: tuple[Span, ...] = ()
    chunk_boundaries: tuple[int, ...] = ()

    @property
    def nodes(self) -> tuple[Span, ...]:
        return self.chars + self.words

    def __len__(self):
        return len(self.chars) + len(self.words)

    def with_words(self, words: Iterable[Span]) -> "Lattice":
        return build_lattice(self.seq, words)

    @property
    def seq(self) -> SymbolSequence:
        return SymbolSequence(tuple(c.text for c in self.chars), self.chunk_boundaries)


def char_nodes(seq: SymbolSequence) -> tuple[Span, ...]:
    return tuple(Span(s, i, i, CHAR) for i, s in enumerate(seq.symbols))


def build_lattice(seq: SymbolSequence, words: Iterable[Span] = ()) -> Lattice:
    n = len(seq)
    seen = set()
    kept = []
    for w in words:
        if not 0 <= w.head <= w.tail < n:
            raise ValueError(f"span {w} outside sentence of length {n}")
        if w.key() in seen:
            continue
        seen.add(w.key())
        kept.append(Span(w.text, w.head, w.tail, WORD))
    return Lattice(char_nodes(seq), tuple(kept), seq.chunk_boundaries)


def ngram_nodes(seq: SymbolSequence, n_max: int = 4) -> list[Span]:
    if n_max < 2:
        raise ValueError("n_max must be at least 2; unigrams are character nodes")
    out = []
    for start, end in seq.chunks():
        for h in range(start, end + 1):
            for n in range(2, n_max + 1):
                t = h + n - 1
                if t > end:
                    break
                out.append(Span(seq.surface(h, t), h, t))
    return out


def _occurrences(seq: SymbolSequence, text: str) -> list[int]:
    """Heads of every exact occurrence of ``text`` inside a single chunk."""
    heads = []
    for start, end in seq.chunks():
        surface = seq.surface(start, end)
        at = surface.find(text)
        while at != -1:
            heads.append(start + at)
            at = surface.find(text, at + 1)
    return heads


def vocab_nodes(seq: SymbolSequence, vocab: Iterable[str]) -> list[Span]:
    out = []
    for word in sorted(set(vocab)):
        if not word:
            continue
        for h in _occurrences(seq, word):
            out.append(Span(word, h, h + len(word) - 1))
    out.sort(key=lambda s: (s.head, s.tail, s.text))
    return out


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def _same_chunk(seq: SymbolSequence, head: int, tail: int) -> bool:
    return seq.chunk_index(head) == seq.chunk_index(tail)


def juncture_compatible(window: Sequence[str], text: str) -> bool:
    """Whether ``window`` could be ``text`` rewritten at its edges only.

    Sandhi alters the first or last symbols of a word, so the interior must
    match in place and lengths may differ by at most two. Short windows must
    also agree on at least one edge symbol.
    """
    w = list(window)
    if abs(len(w) - len(text)) > 2 or len(w) < 2:
        return False
    inner = w[1:-1]
    if list(text[1 : 1 + len(inner)]) != inner:
        return False
    return len(inner) >= 2 or w[0] == text[0] or w[-1] == text[-1]


def rectify_node(seq: SymbolSequence, text: str, head: int, tail: int) -> Span | None:
    """Place one candidate node on the surface, or return None if hopeless."""
    n = len(seq)
    if 0 <= head <= tail < n and _same_chunk(seq, head, tail):
        window = seq.symbols[head : tail + 1]
        if "".join(window) == text or juncture_compatible(window, text):
            return Span(text, head, tail)

    heads = _occurrences(seq, text)
    if heads:
        best = min(heads, key=lambda h: (abs(h - head), h))
        return Span(text, best, best + len(text) - 1)

    target = list(text)
    best_key = None
    for start, end in seq.chunks():
        for width in (len(text) - 1, len(text), len(text) + 1):
            if width < 1:
                continue
            for h in range(start, end - width + 2):
                t = h + width - 1
                d = edit_distance(seq.symbols[h : t + 1], target)
                key = (d, h, width)
                if best_key is None or key < best_key:
                    best_key = key
    if best_key is None or best_key[0] > math.ceil(len(text) / 2):
        return None
    d, h, width = best_key
    return Span(text, h, h + width - 1)


def attach_candidates(seq: SymbolSequence, rec: CandidateRecord) -> list[Span]:
    out = []
    for text, head, tail in rec.nodes:
        span = rectify_node(seq, text, head, tail)
        if span is None:
            log.warning("%s: dropping candidate %r (%d, %d): no close match on the surface",
                        rec.id, text, head, tail)
            continue
        out.append(span)
    return out


def can_follow(prev: Span, nxt: Span, surface: Sequence[str], overlap: bool = True) -> bool:
    """Whether ``nxt`` may directly follow ``prev`` on a path.

    Plain adjacency always qualifies. With ``overlap``, the two nodes may
    also share one juncture symbol, provided heads advance and the shared
    symbol is not simply spelled out verbatim by both nodes (that would be
    a duplicated character, not a sandhi merge).
    """
    if nxt.head == prev.tail + 1:
        return True
    if not overlap or nxt.head != prev.tail or nxt.head <= prev.head:
        return False
    shared = surface[nxt.head]
    return not (prev.text.endswith(shared) and nxt.text.startswith(shared))


@dataclass
class PathSet:
    paths: list[tuple[Span, ...]]
    truncated: bool = False


def enumerate_paths(lattice: Lattice, chunk: tuple[int, int], cap: int = DEFAULT_PATH_CAP,
                    overlap: bool = True) -> PathSet:
    if cap < 1:
        raise ValueError("cap must be at least 1")
    start, end = chunk
    surface = [c.text for c in lattice.chars]
    nodes = sorted((w for w in lattice.words if start <= w.head and w.tail <= end),
                   key=lambda s: (s.head, s.tail, s.text))
    if not nodes:
        raise NoPath(f"no word node inside chunk {chunk}")

    succ = {i: [j for j in range(len(nodes)) if can_follow(nodes[i], nodes[j], surface, overlap)]
            for i in range(len(nodes))}
    # heads strictly increase along any edge, so descending head order is a valid
    # reverse topological order for the reachability pass
    good = [False] * len(nodes)
    for i in sorted(range(len(nodes)), key=lambda i: -nodes[i].head):
        good[i] = nodes[i].tail == end or any(good[j] for j in succ[i])
    for i in succ:
        succ[i] = [j for j in succ[i] if good[j]]

    paths: list[tuple[Span, ...]] = []
    roots = [i for i, s in enumerate(nodes) if s.head == start and good[i]]
    stack = [(i, (i,)) for i in reversed(roots)]
    while stack:
        i, path = stack.pop()
        if nodes[i].tail == end:
            if len(paths) == cap:
                return PathSet(paths, truncated=True)
            paths.append(tuple(nodes[k] for k in path))
        for j in reversed(succ[i]):
            stack.append((j, path + (j,)))
    if not paths:
        raise NoPath(f"no path covers chunk {chunk}")
    return PathSet(paths)
