"""Lattice transformer encoder with soft-masked self-attention.

Nodes are the characters of a sentence followed by its word nodes. Every
pair of nodes gets a span encoding built from four head/tail distances;
the encoding, projected and compared with the query, yields a [0, 1] mask
that reweights ordinary scaled dot-product attention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .labels import LabelVocab
from .lattice import Lattice, Span
from .tensor import Adam, Tape, Tensor, ops

MASK_MODES = ("logistic", "raw-clamped", "none")


@dataclass
class ModelConfig:
    d_model: int = 128
    d_head: int = 128
    heads: int = 4
    layers: int = 1
    d_ff: int = 384
    dropout: float = 0.3
    mask: str = "logistic"
    max_dist: int = 64
    head_init: str = "zero"

    def __post_init__(self):
        if self.mask not in MASK_MODES:
            raise ValueError(f"mask must be one of {MASK_MODES}")
        if self.d_head % 4:
            raise ValueError("d_head must be divisible by 4")


def span_distances(i: Span, j: Span) -> tuple[int, int, int, int]:
    return (i.head - j.head, i.head - j.tail, i.tail - j.head, i.tail - j.tail)


def sinusoid_table(max_dist: int, dim: int) -> np.ndarray:
    """Rows are position vectors for distances -max_dist..max_dist."""
    d = np.arange(-max_dist, max_dist + 1, dtype=np.float64)[:, None]
    k = np.arange(dim)
    freq = 1.0 / 10000.0 ** (2 * (k // 2) / dim)
    angle = d * freq[None, :]
    return np.where(k % 2 == 0, np.sin(angle), np.cos(angle))


def span_features(heads, tails, max_dist: int, d_z: int) -> np.ndarray:
    """Concatenated sinusoids of the four distances, shape (n, n, d_z)."""
    heads = np.asarray(heads)
    tails = np.asarray(tails)
    table = sinusoid_table(max_dist, d_z // 4)
    parts = []
    for a, b in ((heads, heads), (heads, tails), (tails, heads), (tails, tails)):
        dist = np.clip(a[:, None] - b[None, :], -max_dist, max_dist)
        parts.append(table[dist + max_dist])
    return np.concatenate(parts, axis=-1)


def span_encoding(distances, w_s: float, d_z: int, max_dist: int = 64) -> np.ndarray:
    """Encoding of a single node pair from its four distances."""
    table = sinusoid_table(max_dist, d_z // 4)
    p = np.concatenate([table[int(np.clip(d, -max_dist, max_dist)) + max_dist] for d in distances])
    return np.maximum(w_s * p, 0.0)


def vanilla_attention(x: Tensor, wq: Tensor, wk: Tensor, wv: Tensor):
    q = ops.matmul(x, wq)
    k = ops.matmul(x, wk)
    e = ops.scale(ops.matmul(q, ops.transpose(k)), 1.0 / math.sqrt(wq.shape[1]))
    alpha = ops.softmax(e)
    return ops.matmul(alpha, ops.matmul(x, wv)), alpha


def soft_mask(x: Tensor, s: Tensor, wq: Tensor, wr: Tensor, mode: str = "logistic") -> Tensor:
    """Mask M[i, j] from query i and the span encoding of pair (i, j).

    (x_i Wq)(s_ij Wr)^T is evaluated as ((x_i Wq) Wr^T) . s_ij, which avoids
    projecting all n^2 span encodings.
    """
    q = ops.matmul(x, wq)
    raw = ops.scale(ops.pair_dot(ops.matmul(q, ops.transpose(wr)), s), 1.0 / math.sqrt(wq.shape[1]))
    if mode == "logistic":
        return ops.logistic(raw)
    if mode == "raw-clamped":
        return ops.relu(raw)
    raise ValueError(f"unknown mask mode {mode!r}")


def sma_attention(x: Tensor, m: Tensor, wq: Tensor, wk: Tensor, wv: Tensor):
    q = ops.matmul(x, wq)
    k = ops.matmul(x, wk)
    e = ops.scale(ops.matmul(q, ops.transpose(k)), 1.0 / math.sqrt(wq.shape[1]))
    alpha = ops.masked_softmax(e, m)
    return ops.matmul(alpha, ops.matmul(x, wv)), alpha


@dataclass
class EncodedBatch:
    nodes: tuple[Span, ...]
    logits: Tensor
    attention: list = field(default_factory=list)  # [layer][head] -> (n, n) array

    @property
    def n_chars(self) -> int:
        return self.logits.shape[0]


def _xavier(rng, shape):
    limit = math.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape)


class Encoder:
    def __init__(self, config: ModelConfig, labels: LabelVocab, chars, words, seed: int = 0):
        self.config = config
        self.labels = labels
        # index 0 of both tables is the unknown-token row
        self.char_keys = ["<UNK>"] + sorted(set(chars) - {"<UNK>"})
        self.word_keys = ["<UNK>"] + sorted(set(words) - {"<UNK>"})
        self.char_index = {c: i for i, c in enumerate(self.char_keys)}
        self.word_index = {w: i for i, w in enumerate(self.word_keys)}
        self.params: dict[str, Tensor] = {}
        self._init_params(np.random.default_rng(seed))

    def _add(self, name, data):
        self.params[name] = Tensor(data, requires_grad=True, name=name)

    def _init_params(self, rng):
        c = self.config
        d, dz = c.d_model, c.d_head
        self._add("emb.char", rng.uniform(-0.1, 0.1, (len(self.char_keys), d)))
        self._add("emb.word", rng.uniform(-0.1, 0.1, (len(self.word_keys), d)))
        for l in range(c.layers):
            p = f"layer{l}."
            for h in range(c.heads):
                for w in ("wq", "wk", "wv"):
                    self._add(f"{p}head{h}.{w}", _xavier(rng, (d, dz)))
                self._add(f"{p}head{h}.wr", _xavier(rng, (dz, dz)))
            self._add(p + "ws", np.ones(1))
            self._add(p + "wo", _xavier(rng, (c.heads * dz, d)))
            self._add(p + "bo", np.zeros(d))
            self._add(p + "ln1.g", np.ones(d))
            self._add(p + "ln1.b", np.zeros(d))
            self._add(p + "ff.w1", _xavier(rng, (d, c.d_ff)))
            self._add(p + "ff.b1", np.zeros(c.d_ff))
            self._add(p + "ff.w2", _xavier(rng, (c.d_ff, d)))
            self._add(p + "ff.b2", np.zeros(d))
            self._add(p + "ln2.g", np.ones(d))
            self._add(p + "ln2.b", np.zeros(d))
        if c.head_init == "zero":
            self._add("cls.w", np.zeros((d, len(self.labels))))
        else:
            self._add("cls.w", _xavier(rng, (d, len(self.labels))))
        self._add("cls.b", np.zeros(len(self.labels)))

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def node_ids(self, lattice: Lattice):
        cid = [self.char_index.get(s.text, 0) for s in lattice.chars]
        wid = [self.word_index.get(s.text, 0) for s in lattice.words]
        return cid, wid

    def forward(self, lattice: Lattice, rng: np.random.Generator | None = None,
                keep_attention: bool = False, mask: str | None = None) -> EncodedBatch:
        """Run the encoder; ``rng`` enables dropout (training mode)."""
        c = self.config
        P = self.params
        mask = mask or c.mask
        nodes = lattice.nodes
        if not lattice.chars:
            raise ValueError("empty lattice")
        cid, wid = self.node_ids(lattice)
        x = ops.embedding_lookup(P["emb.char"], cid)
        if wid:
            x = ops.concat([x, ops.embedding_lookup(P["emb.word"], wid)], axis=0)
        x = ops.dropout(x, c.dropout, rng)

        feats = None
        if mask != "none":
            feats = Tensor(span_features([s.head for s in nodes], [s.tail for s in nodes],
                                         c.max_dist, c.d_head))
        attention = []
        for l in range(c.layers):
            p = f"layer{l}."
            s = ops.relu(ops.scalar_mul(P[p + "ws"], feats)) if feats is not None else None
            outs, alphas = [], []
            for h in range(c.heads):
                wq, wk, wv = (P[f"{p}head{h}.{w}"] for w in ("wq", "wk", "wv"))
                if s is None:
                    z, alpha = vanilla_attention(x, wq, wk, wv)
                else:
                    m = soft_mask(x, s, wq, P[f"{p}head{h}.wr"], mask)
                    z, alpha = sma_attention(x, m, wq, wk, wv)
                outs.append(z)
                if keep_attention:
                    alphas.append(alpha.data.copy())
            attention.append(alphas)
            a = ops.add(ops.matmul(ops.concat(outs, axis=-1), P[p + "wo"]), P[p + "bo"])
            a = ops.dropout(a, c.dropout, rng)
            x = ops.layer_norm(ops.add(x, a), P[p + "ln1.g"], P[p + "ln1.b"])
            f = ops.relu(ops.add(ops.matmul(x, P[p + "ff.w1"]), P[p + "ff.b1"]))
            f = ops.add(ops.matmul(f, P[p + "ff.w2"]), P[p + "ff.b2"])
            x = ops.layer_norm(ops.add(x, f), P[p + "ln2.g"], P[p + "ln2.b"])
        logits = ops.add(ops.matmul(ops.rows(x, len(lattice.chars)), P["cls.w"]), P["cls.b"])
        return EncodedBatch(nodes, logits, attention if keep_attention else [])

    def log_probs(self, lattice: Lattice, mask: str | None = None) -> np.ndarray:
        return ops.log_softmax_np(self.forward(lattice, mask=mask).logits.data)

    def predict(self, lattice: Lattice, mask: str | None = None) -> list[int]:
        return [int(i) for i in self.forward(lattice, mask=mask).logits.data.argmax(axis=1)]

    def quantize(self):
        """Round parameters to float32 precision, the checkpoint storage type."""
        for t in self.params.values():
            t.data = t.data.astype(np.float32).astype(np.float64)


def batch_loss(model: Encoder, batch, rng=None) -> Tensor:
    """Mean per-character cross-entropy over a batch of (lattice, label ids)."""
    n = sum(len(targets) for _, targets in batch)
    loss = None
    for lattice, targets in batch:
        ce = ops.cross_entropy(model.forward(lattice, rng).logits, targets, reduction="sum")
        loss = ce if loss is None else ops.add(loss, ce)
    return ops.scale(loss, 1.0 / n)


def train_step(batch, model: Encoder, optimizer: Adam, rng=None) -> float:
    optimizer.zero_grad()
    with Tape() as tape:
        loss = batch_loss(model, batch, rng)
    tape.backward(loss)
    optimizer.step()
    return loss.item()
