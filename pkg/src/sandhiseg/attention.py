"""Export of per-head attention matrices for offline probing.

The dump is a TSV file with a fixed header. Every row is one (i, j) cell of
one head's attention matrix, annotated with both nodes so that char-char and
char-word slices can be selected without the lattice at hand.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .lattice import Span

COLUMNS = ("sentence_id", "layer", "head", "i", "j",
           "i_kind", "i_text", "i_head", "i_tail",
           "j_kind", "j_text", "j_head", "j_tail", "alpha")


@dataclass
class AttentionDump:
    sentence_id: str
    nodes: tuple[Span, ...]
    matrices: list[list[np.ndarray]]  # [layer][head] -> (n, n)


def write_dump(out: TextIO, dumps: Iterable[AttentionDump]):
    w = csv.writer(out, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_NONE, escapechar="\\")
    w.writerow(COLUMNS)
    for d in dumps:
        for layer, heads in enumerate(d.matrices):
            for head, alpha in enumerate(heads):
                for i, a in enumerate(d.nodes):
                    for j, b in enumerate(d.nodes):
                        w.writerow((d.sentence_id, layer, head, i, j,
                                    a.kind, a.text, a.head, a.tail,
                                    b.kind, b.text, b.head, b.tail, repr(float(alpha[i, j]))))


def read_dump(path: str | Path) -> list[AttentionDump]:
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE, escapechar="\\"))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError(f"{path}: not an attention dump (unexpected header)")
    cells = defaultdict(dict)
    nodes = defaultdict(dict)
    order = []
    for r in rows[1:]:
        sid, layer, head, i, j = r[0], int(r[1]), int(r[2]), int(r[3]), int(r[4])
        if sid not in cells:
            order.append(sid)
        cells[sid][(layer, head, i, j)] = float(r[13])
        nodes[sid][i] = Span(r[6], int(r[7]), int(r[8]), r[5])
        nodes[sid][j] = Span(r[10], int(r[11]), int(r[12]), r[9])
    out = []
    for sid in order:
        n = len(nodes[sid])
        layers = 1 + max(k[0] for k in cells[sid])
        heads = 1 + max(k[1] for k in cells[sid])
        mats = [[np.zeros((n, n)) for _ in range(heads)] for _ in range(layers)]
        for (l, h, i, j), v in cells[sid].items():
            mats[l][h][i, j] = v
        out.append(AttentionDump(sid, tuple(nodes[sid][k] for k in range(n)), mats))
    return out


def plot_dump(dump: AttentionDump, path: str | Path, layer: int = 0):
    """Heatmap of every head of one layer, saved to ``path``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    heads = dump.matrices[layer]
    labels = [s.text for s in dump.nodes]
    fig, axes = plt.subplots(1, len(heads), figsize=(4 * len(heads), 4), squeeze=False)
    for h, (ax, alpha) in enumerate(zip(axes[0], heads)):
        ax.imshow(alpha, vmin=0.0, vmax=1.0, cmap="viridis")
        ax.set_title(f"head {h}")
        ax.set_xticks(range(len(labels)), labels, rotation=90, fontsize=6)
        ax.set_yticks(range(len(labels)), labels, fontsize=6)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
