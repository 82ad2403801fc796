"""Text normalization and corpus / candidate-file ingestion.

All offsets in the package index into the NFC-composed scalar sequence of a
sentence with whitespace removed, so IAST letters such as ``ā`` or ``ḥ``
occupy exactly one position.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import EmptyInput, FormatError, OffsetError


@dataclass(frozen=True)
class SymbolSequence:
    symbols: tuple[str, ...]
    # chunk_boundaries[k] is the index of the first symbol of chunk k+1
    chunk_boundaries: tuple[int, ...] = ()

    def __post_init__(self):
        b = self.chunk_boundaries
        if any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError("chunk boundaries must be strictly increasing")
        if b and (b[0] <= 0 or b[-1] >= len(self.symbols)):
            raise ValueError("chunk boundary outside the sequence")

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def chunks(self) -> list[tuple[int, int]]:
        """Inclusive (start, end) index pairs, one per whitespace chunk."""
        starts = (0,) + self.chunk_boundaries
        ends = tuple(s - 1 for s in self.chunk_boundaries) + (len(self.symbols) - 1,)
        return list(zip(starts, ends))

    def chunk_index(self, i: int) -> int:
        k = 0
        for b in self.chunk_boundaries:
            if i >= b:
                k += 1
        return k

    def surface(self, start: int, end: int) -> str:
        return "".join(self.symbols[start : end + 1])

    def sub(self, start: int, end: int) -> "SymbolSequence":
        """The symbols of [start, end] as a single-chunk sequence."""
        return SymbolSequence(self.symbols[start : end + 1])

    @property
    def text(self) -> str:
        return " ".join(self.surface(s, e) for s, e in self.chunks())


def normalize_text(text: str) -> str:
    """NFC-compose and collapse whitespace runs to single spaces."""
    return " ".join(unicodedata.normalize("NFC", text).split())


def normalize(text: str) -> SymbolSequence:
    words = normalize_text(text).split(" ")
    if words == [""]:
        raise EmptyInput("input is empty after normalization")
    symbols: list[str] = []
    boundaries = []
    for w in words:
        if symbols:
            boundaries.append(len(symbols))
        symbols.extend(w)
    return SymbolSequence(tuple(symbols), tuple(boundaries))


@dataclass(frozen=True)
class SentenceRecord:
    id: str
    source: SymbolSequence
    gold: str | None = None

    def __post_init__(self):
        if self.gold is not None and (not self.gold or "  " in self.gold):
            raise ValueError("gold must be non-empty and single-spaced")


@dataclass(frozen=True)
class CandidateRecord:
    id: str
    nodes: tuple[tuple[str, int, int], ...] = field(default_factory=tuple)


def parse_corpus_line(line: str, line_no: int | None = None) -> SentenceRecord:
    fields = line.rstrip("\r\n").split("\t")
    if len(fields) not in (2, 3):
        raise FormatError(f"expected 2 or 3 TAB-separated fields, got {len(fields)}", line_no)
    sid = fields[0].strip()
    if not sid:
        raise FormatError("empty sentence id", line_no)
    try:
        source = normalize(fields[1])
    except EmptyInput:
        raise FormatError("empty source text", line_no) from None
    gold = None
    if len(fields) == 3:
        gold = normalize_text(fields[2])
        if not gold:
            raise FormatError("empty gold segmentation", line_no)
    return SentenceRecord(sid, source, gold)


def format_corpus_line(rec: SentenceRecord) -> str:
    parts = [rec.id, rec.source.text]
    if rec.gold is not None:
        parts.append(rec.gold)
    return "\t".join(parts)


def read_corpus(path: str | Path) -> list[SentenceRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for no, line in enumerate(f, 1):
            if not line.strip():
                continue
            records.append(parse_corpus_line(line, no))
    return records


def write_corpus(path: str | Path, records: Iterable[SentenceRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(format_corpus_line(rec) + "\n")


def parse_candidate_record(block: str, first_line: int = 1) -> CandidateRecord:
    lines = block.rstrip("\n").split("\n")
    # tolerate leading blank lines between records
    while lines and not lines[0].strip():
        lines.pop(0)
        first_line += 1
    if not lines or not lines[0].startswith("#"):
        raise FormatError("candidate record must start with a '#id' header", first_line)
    rid = lines[0][1:].strip()
    if not rid:
        raise FormatError("empty record id", first_line)
    nodes = []
    for k, line in enumerate(lines[1:], first_line + 1):
        line = line.rstrip("\r")
        if not line.strip():
            break
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError("node line must be text<TAB>head<TAB>tail", k)
        text = normalize_text(parts[0])
        if not text or " " in text:
            raise FormatError("node text must be a single non-empty token", k)
        try:
            head, tail = int(parts[1]), int(parts[2])
        except ValueError:
            raise FormatError(f"non-integer offsets {parts[1]!r}, {parts[2]!r}", k) from None
        if head < 0 or head > tail:
            raise OffsetError(f"invalid span ({head}, {tail}) for {text!r}", k)
        nodes.append((text, head, tail))
    return CandidateRecord(rid, tuple(nodes))


def iter_candidate_blocks(text: str) -> Iterator[tuple[str, int]]:
    block: list[str] = []
    start = 1
    for no, line in enumerate(text.split("\n"), 1):
        if line.strip():
            if not block:
                start = no
            block.append(line)
        elif block:
            yield "\n".join(block), start
            block = []
    if block:
        yield "\n".join(block), start


def read_candidates(path: str | Path) -> dict[str, CandidateRecord]:
    with open(path, encoding="utf-8") as f:
        content = f.read()
    out = {}
    for block, start in iter_candidate_blocks(content):
        rec = parse_candidate_record(block, start)
        out[rec.id] = rec
    return out


def format_candidate_record(rec: CandidateRecord) -> str:
    lines = [f"#{rec.id}"]
    lines += [f"{t}\t{h}\t{e}" for t, h, e in rec.nodes]
    return "\n".join(lines) + "\n\n"


def write_candidates(path: str | Path, records: Iterable[CandidateRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(format_candidate_record(rec))
