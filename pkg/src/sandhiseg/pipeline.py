"""Training, segmentation and evaluation workflows over whole corpora."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .charlm import CharLM
from .config import RunConfig
from .encoder import Encoder, train_step
from .errors import AlignError, SegError
from .labels import align_gold, align_records, build_label_vocab, chunk_words
from .lattice import Lattice, Span, attach_candidates, build_lattice, ngram_nodes, vocab_nodes
from .metrics import DEFAULT_RULES, EvalReport, eval_corpus, eval_sentence, rule_prf
from .prcp import apply_prcp
from .symbols import CandidateRecord, SentenceRecord, SymbolSequence
from .tensor import Adam

log = logging.getLogger(__name__)


class DataError(SegError):
    """Input data unusable for the requested workflow (exit status 3)."""


def load_vocab_words(path) -> list[str]:
    from .symbols import normalize_text

    with open(path, encoding="utf-8") as f:
        return [w for w in (normalize_text(line) for line in f) if w and " " not in w]


@dataclass
class LatticeBuilder:
    source: str = "ngrams"
    n_max: int = 4
    candidates: dict[str, CandidateRecord] = field(default_factory=dict)
    vocab: Sequence[str] = ()

    def candidate_spans(self, rec: SentenceRecord) -> list[Span] | None:
        cand = self.candidates.get(rec.id)
        return None if cand is None else attach_candidates(rec.source, cand)

    def words(self, rec: SentenceRecord) -> list[Span]:
        seq = rec.source
        if self.source == "chars":
            return []
        if self.source == "ngrams":
            return ngram_nodes(seq, self.n_max)
        if self.source == "vocab":
            return vocab_nodes(seq, self.vocab)
        spans = self.candidate_spans(rec)
        if spans is None:
            log.warning("%s: no candidate record, falling back to n-grams", rec.id)
            return ngram_nodes(seq, self.n_max)
        if self.source == "candidates+ngrams":
            spans = spans + ngram_nodes(seq, self.n_max)
        return spans

    def lattice(self, rec: SentenceRecord) -> Lattice:
        return build_lattice(rec.source, self.words(rec))


def builder_for(cfg: RunConfig, candidates=None, vocab=None) -> LatticeBuilder:
    if candidates is None and cfg.lattice.startswith("candidates"):
        from .symbols import read_candidates

        candidates = read_candidates(cfg.candidates)
    if vocab is None and cfg.lattice == "vocab":
        vocab = load_vocab_words(cfg.vocab_file)
    return LatticeBuilder(cfg.lattice, cfg.n_max, candidates or {}, vocab or ())


@dataclass
class TrainResult:
    model: Encoder
    charlm: CharLM
    config: RunConfig
    losses: list[float]
    rejected: list[str]


def train(records: Sequence[SentenceRecord], cfg: RunConfig, builder: LatticeBuilder | None = None,
          dev: Sequence[SentenceRecord] = (), on_epoch: Callable | None = None) -> TrainResult:
    if any(r.gold is None for r in records):
        raise DataError("training corpus needs a gold column on every line")
    if not records:
        raise DataError("empty training corpus")
    builder = builder or builder_for(cfg)
    aligned, rejected = align_records(records)
    if len(rejected) * 2 > len(records):
        raise DataError(f"{len(rejected)} of {len(records)} sentences could not be aligned")
    if rejected:
        log.warning("alignment rejected %d of %d sentences", len(rejected), len(records))

    lattices = [builder.lattice(rec) for rec, _ in aligned]
    labels = build_label_vocab([lab for _, lab in aligned])
    chars = {s for rec, _ in aligned for s in rec.source.symbols}
    words = {w.text for lat in lattices for w in lat.words}
    max_dist = cfg.max_dist or max(len(rec.source) for rec, _ in aligned)
    cfg = cfg.replace(max_dist=max_dist)
    model = Encoder(cfg.model_config(), labels, chars, words, seed=cfg.seed)
    data = [(lat, labels.encode(lab)) for lat, (_, lab) in zip(lattices, aligned)]

    opt = Adam(model.parameters(), lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2)
    order_rng = np.random.default_rng([cfg.seed, 1])
    drop_rng = np.random.default_rng([cfg.seed, 2])
    losses = []
    for epoch in range(cfg.epochs):
        perm = order_rng.permutation(len(data))
        total = 0.0
        for b in range(0, len(data), cfg.batch_size):
            batch = [data[i] for i in perm[b : b + cfg.batch_size]]
            total += train_step(batch, model, opt, drop_rng) * len(batch)
        losses.append(total / len(data))
        msg = f"epoch {epoch + 1}/{cfg.epochs} loss {losses[-1]:.4f}"
        if dev:
            rep = evaluate(Segmenter(model, None, cfg, builder), dev).report
            msg += f" dev F {rep.F:.2f} PM {rep.PM:.2f}"
        log.info(msg)
        # a true return value from the callback ends training early
        if on_epoch is not None and on_epoch(epoch, losses[-1], model):
            break
    model.quantize()
    charlm = CharLM.fit([rec.gold for rec, _ in aligned], cfg.charlm_order)
    return TrainResult(model, charlm, cfg, losses, rejected)


@dataclass
class Segmentation:
    id: str
    source: SymbolSequence
    text: str
    labels: list[int]
    chunks: list[list[str]]
    prcp: list[dict] = field(default_factory=list)


class Segmenter:
    def __init__(self, model: Encoder, charlm: CharLM | None, cfg: RunConfig,
                 builder: LatticeBuilder | None = None, prcp: str | None = None,
                 mask: str | None = None, use_words: bool = True):
        self.model = model
        self.charlm = charlm
        self.cfg = cfg
        self.builder = builder or LatticeBuilder(cfg.lattice, cfg.n_max)
        self.prcp = cfg.prcp if prcp is None else prcp
        self.mask = mask
        self.use_words = use_words

    def segment(self, rec: SentenceRecord) -> Segmentation:
        seq = rec.source
        lattice = self.builder.lattice(rec) if self.use_words else build_lattice(seq)
        out = self.model.forward(lattice, mask=self.mask).logits.data
        pred = [int(i) for i in out.argmax(axis=1)]
        vocab = self.model.labels
        chunks = chunk_words(seq, pred, vocab)
        records = []
        if self.prcp != "off" and self.charlm is not None:
            spans = self.builder.candidate_spans(rec) if self.builder.candidates else None
            if spans is not None:
                from .tensor.ops import log_softmax_np

                chunks, records = apply_prcp(seq, pred, log_softmax_np(out), spans, self.charlm,
                                             vocab, self.prcp, self.cfg.path_cap, self.cfg.overlap)
        text = " ".join(" ".join(ws) for ws in chunks if ws)
        return Segmentation(rec.id, seq, text, pred, chunks, records)


@dataclass
class EvalResult:
    report: EvalReport
    outputs: list[Segmentation]


def evaluate(seg: Segmenter, records: Sequence[SentenceRecord], rules=None,
             f_mode: str | None = None) -> EvalResult:
    if any(r.gold is None for r in records):
        raise DataError("evaluation corpus needs a gold column")
    outputs = [seg.segment(r) for r in records]
    results = [eval_sentence(o.text.split(), r.gold.split()) for o, r in zip(outputs, records)]
    report = eval_corpus(results, f_mode or seg.cfg.f_mode)
    if rules:
        report.rules = rule_table(records, outputs, seg.model.labels, rules)
    return EvalResult(report, outputs)


def rule_table(records, outputs, vocab, rules=DEFAULT_RULES) -> dict:
    sources, gold, pred = [], [], []
    for rec, out in zip(records, outputs):
        try:
            g = align_gold(rec.source, rec.gold)
        except AlignError:
            continue
        try:
            p = align_gold(rec.source, out.text)
        except AlignError:
            p = vocab.decode(out.labels)
        sources.append(rec.source.symbols)
        gold.append(g)
        pred.append(p)
    return {r.name: rule_prf(sources, gold, pred, r) for r in rules}


ABLATIONS = ("no-SMA", "no-LIST", "no-PRCP")


def ablated_config(cfg: RunConfig, name: str) -> RunConfig:
    """Configuration for retraining with one module switched off."""
    if name == "no-SMA":
        return cfg.replace(mask="none")
    if name == "no-LIST":
        return cfg.replace(lattice="chars")
    if name == "no-PRCP":
        return cfg.replace(prcp="off")
    raise ValueError(f"unknown ablation {name!r}; expected one of {ABLATIONS}")


def ablated_segmenter(seg: Segmenter, name: str) -> Segmenter:
    """Switch a module off at inference time on an already trained model."""
    kw = dict(builder=seg.builder, prcp=seg.prcp, mask=seg.mask, use_words=seg.use_words)
    if name == "no-SMA":
        kw["mask"] = "none"
    elif name == "no-LIST":
        kw["use_words"] = False
    elif name == "no-PRCP":
        kw["prcp"] = "off"
    else:
        raise ValueError(f"unknown ablation {name!r}; expected one of {ABLATIONS}")
    return Segmenter(seg.model, seg.charlm, seg.cfg, **kw)
