"""Order-k character language model with Witten-Bell interpolation.

Word boundaries are modelled as the symbol ``_``. Sequences are left-padded
with a start marker that conditions but is never predicted; anything unseen
in training is scored as the unknown symbol, so every context distribution
ranges over the same closed vocabulary and sums to one.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from typing import Iterable

from .errors import EmptyCorpus
from .labels import SPACE

BOS = "<s>"
UNK_SYM = "<unk>"


def lm_symbols(text: str) -> list[str]:
    return [SPACE if c == " " else c for c in " ".join(text.split())]


class CharLM:
    def __init__(self, order: int = 6):
        if order < 1:
            raise ValueError("order must be at least 1")
        self.order = order
        self.vocab: list[str] = []
        # context tuple -> {symbol: count}, for every context length 0..order-1
        self.counts: dict[tuple, dict[str, int]] = {}
        self._totals: dict[tuple, tuple[int, int]] = {}
        self._cache: dict = {}

    @classmethod
    def fit(cls, corpus: Iterable[str], order: int = 6) -> "CharLM":
        lm = cls(order)
        counts: dict[tuple, dict[str, int]] = defaultdict(lambda: defaultdict(int))
        symbols = {SPACE}
        n_sent = 0
        for text in corpus:
            seq = lm_symbols(text)
            if not seq:
                continue
            n_sent += 1
            symbols.update(seq)
            padded = [BOS] * (order - 1) + seq
            for t in range(order - 1, len(padded)):
                sym = padded[t]
                for k in range(order):
                    counts[tuple(padded[t - k : t])][sym] += 1
        if not n_sent:
            raise EmptyCorpus("no training text for the character LM")
        lm.vocab = sorted(symbols) + [UNK_SYM]
        lm.counts = {ctx: dict(sorted(c.items())) for ctx, c in sorted(counts.items())}
        lm._index()
        return lm

    def _index(self):
        self._totals = {ctx: (sum(c.values()), len(c)) for ctx, c in self.counts.items()}
        self._known = set(self.vocab)
        self._cache = {}

    def _map(self, sym: str) -> str:
        return sym if sym in self._known else UNK_SYM

    def prob(self, sym: str, context: tuple) -> float:
        """p(sym | context), with the context truncated to order-1 symbols."""
        sym = self._map(sym)
        context = tuple(self._map(s) if s != BOS else s for s in context)
        k = self.order - 1
        context = context[max(0, len(context) - k):] if k else ()
        key = (sym, context)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        p = 1.0 / len(self.vocab)
        for k in range(len(context) + 1):
            ctx = context[len(context) - k:]
            stats = self._totals.get(ctx)
            if stats is None:
                break
            total, types = stats
            p = (self.counts[ctx].get(sym, 0) + types * p) / (total + types)
        self._cache[key] = p
        return p

    def sequence_logprob(self, text: str) -> float:
        seq = lm_symbols(text)
        padded = [BOS] * (self.order - 1) + seq
        lp = 0.0
        for t in range(self.order - 1, len(padded)):
            lp += math.log(self.prob(padded[t], tuple(padded[t - self.order + 1 : t])))
        return lp

    def perplexity(self, text: str) -> float:
        n = len(lm_symbols(text))
        if n == 0:
            raise ValueError("perplexity of an empty text")
        return math.exp(-self.sequence_logprob(text) / n)

    def to_json(self) -> str:
        return json.dumps({
            "order": self.order,
            "vocab": self.vocab,
            "counts": [[list(ctx), c] for ctx, c in self.counts.items()],
        }, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CharLM":
        obj = json.loads(text)
        lm = cls(obj["order"])
        lm.vocab = obj["vocab"]
        lm.counts = {tuple(ctx): c for ctx, c in obj["counts"]}
        lm._index()
        return lm
