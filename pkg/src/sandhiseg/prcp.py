"""Path ranking for chunks whose prediction leaves the candidate space.

A chunk is corrupted when some predicted word is not among its candidate
nodes. Every candidate path through the chunk is then scored by
LL / (rho * |W|), combining the encoder's label log-likelihood, the
character LM perplexity and the word count, and the best path replaces
the prediction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .charlm import CharLM
from .errors import AlignError, NoPath
from .labels import LabelVocab, align_gold, chunk_words
from .lattice import DEFAULT_PATH_CAP, Lattice, Span, build_lattice, enumerate_paths
from .symbols import SymbolSequence

log = logging.getLogger(__name__)

SCORE_MODES = ("raw", "prob")


@dataclass(frozen=True)
class PathScore:
    ll: float
    rho: float
    num_words: int
    S: float
    text: str = ""


def detect_corrupted(pred_words: Iterable[str], candidate_texts: Iterable[str]) -> bool:
    known = set(candidate_texts)
    return any(w not in known for w in pred_words)


def path_text(path: Sequence[Span]) -> str:
    return " ".join(s.text for s in path)


def path_loglikelihood(log_probs: np.ndarray, seq: SymbolSequence, chunk: tuple[int, int],
                       path: Sequence[Span], vocab: LabelVocab) -> float:
    """Sum of the encoder's log-probabilities for the labels that spell ``path``.

    ``log_probs`` has one row per symbol of the whole sentence.
    """
    start, end = chunk
    labels = align_gold(seq.sub(start, end), path_text(path))
    ids = vocab.encode(labels)
    return float(sum(log_probs[start + k, i] for k, i in enumerate(ids)))


def score_path(ll: float, rho: float, num_words: int, mode: str = "prob",
               length: int | None = None) -> float:
    if rho <= 0 or num_words < 1:
        raise ValueError("rho must be positive and num_words at least 1")
    if mode == "raw":
        return ll / (rho * num_words)
    if mode == "prob":
        if not length:
            raise ValueError("prob mode needs the chunk length")
        return math.exp(ll / length) / (rho * num_words)
    raise ValueError(f"unknown scoring mode {mode!r}")


@dataclass
class RerankResult:
    words: list[str]
    changed: bool
    scores: list[PathScore] = field(default_factory=list)
    truncated: bool = False
    chosen: PathScore | None = None


def rerank_chunk(log_probs: np.ndarray, charlm: CharLM, lattice: Lattice, chunk: tuple[int, int],
                 vocab: LabelVocab, original: list[str], mode: str = "prob",
                 cap: int = DEFAULT_PATH_CAP, overlap: bool = True) -> RerankResult:
    try:
        found = enumerate_paths(lattice, chunk, cap=cap, overlap=overlap)
    except NoPath:
        return RerankResult(list(original), False)
    seq = lattice.seq
    length = chunk[1] - chunk[0] + 1
    scores = []
    for path in found.paths:
        text = path_text(path)
        try:
            ll = path_loglikelihood(log_probs, seq, chunk, path, vocab)
        except AlignError as exc:
            log.warning("skipping path %r: %s", text, exc)
            continue
        rho = charlm.perplexity(text)
        scores.append(PathScore(ll, rho, len(path), score_path(ll, rho, len(path), mode, length), text))
    if not scores:
        return RerankResult(list(original), False, truncated=found.truncated)
    best = min(scores, key=lambda p: (-p.S, p.num_words, p.text))
    words = best.text.split(" ")
    return RerankResult(words, words != list(original), scores, found.truncated, best)


def apply_prcp(seq: SymbolSequence, pred_labels: Sequence, log_probs: np.ndarray,
               candidates: Sequence[Span], charlm: CharLM, vocab: LabelVocab,
               mode: str = "prob", cap: int = DEFAULT_PATH_CAP, overlap: bool = True):
    """Rectify every corrupted chunk of one sentence.

    Returns the per-chunk word lists and one activation record per
    rectified chunk.
    """
    per_chunk = chunk_words(seq, pred_labels, vocab)
    cand_lattice = build_lattice(seq, candidates)
    records = []
    for k, (start, end) in enumerate(seq.chunks()):
        inside = {s.text for s in candidates if start <= s.head and s.tail <= end}
        if not detect_corrupted(per_chunk[k], inside):
            continue
        res = rerank_chunk(log_probs, charlm, cand_lattice, (start, end), vocab, per_chunk[k],
                           mode, cap, overlap)
        records.append({
            "chunk": k,
            "span": [start, end],
            "predicted": " ".join(per_chunk[k]),
            "chosen": " ".join(res.words),
            "changed": res.changed,
            "paths_scored": len(res.scores),
            "truncated": res.truncated,
            "mode": mode,
            "score": None if res.chosen is None else res.chosen.S,
        })
        per_chunk[k] = res.words
    return per_chunk, records
