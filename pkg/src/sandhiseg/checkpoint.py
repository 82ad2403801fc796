"""Self-describing binary checkpoint.

Layout, all integers little-endian::

    b"TLST1\\n"
    u32 section count
    per section: u16 name length, name (UTF-8), u64 payload length, payload

Sections are ``config`` (key = value text), ``labels`` (one label per
line), ``chars`` and ``words`` (embedding row keys, one per line),
``params`` and ``charlm`` (JSON). ``params`` holds u32 count, then per array
u16 name length, name, u8 ndim, u32 dims, float32 row-major data.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .charlm import CharLM
from .config import RunConfig, config_from_text
from .encoder import Encoder
from .errors import CheckpointError
from .labels import LabelVocab

MAGIC = b"TLST1\n"


def _lines(text: str) -> list[str]:
    out = text.split("\n")
    if out and out[-1] == "":
        out.pop()
    return out


def _pack_params(params: dict) -> bytes:
    buf = io.BytesIO()
    buf.write(struct.pack("<I", len(params)))
    for name, t in params.items():
        raw = name.encode("utf-8")
        data = np.ascontiguousarray(t.data, dtype="<f4")
        buf.write(struct.pack("<H", len(raw)) + raw)
        buf.write(struct.pack("<B", data.ndim))
        buf.write(struct.pack(f"<{data.ndim}I", *data.shape))
        buf.write(data.tobytes())
    return buf.getvalue()


def _unpack_params(payload: bytes) -> dict[str, np.ndarray]:
    view = memoryview(payload)
    (count,), pos = struct.unpack_from("<I", view, 0), 4
    out = {}
    for _ in range(count):
        (n,) = struct.unpack_from("<H", view, pos)
        pos += 2
        name = bytes(view[pos : pos + n]).decode("utf-8")
        pos += n
        (ndim,) = struct.unpack_from("<B", view, pos)
        pos += 1
        shape = struct.unpack_from(f"<{ndim}I", view, pos)
        pos += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(view[pos : pos + 4 * size], dtype="<f4").reshape(shape)
        pos += 4 * size
        out[name] = arr.astype(np.float64)
    if pos != len(payload):
        raise CheckpointError("trailing bytes in params section")
    return out


@dataclass
class Checkpoint:
    config: RunConfig
    model: Encoder
    charlm: CharLM | None

    def to_bytes(self) -> bytes:
        m = self.model
        config = self.config.replace(max_dist=m.config.max_dist)
        sections = [
            ("config", config.to_text().encode("utf-8")),
            ("labels", m.labels.to_text().encode("utf-8")),
            ("chars", "".join(k + "\n" for k in m.char_keys).encode("utf-8")),
            ("words", "".join(k + "\n" for k in m.word_keys).encode("utf-8")),
            ("params", _pack_params(m.params)),
        ]
        if self.charlm is not None:
            sections.append(("charlm", self.charlm.to_json().encode("utf-8")))
        buf = io.BytesIO()
        buf.write(MAGIC)
        buf.write(struct.pack("<I", len(sections)))
        for name, payload in sections:
            raw = name.encode("utf-8")
            buf.write(struct.pack("<H", len(raw)) + raw)
            buf.write(struct.pack("<Q", len(payload)))
            buf.write(payload)
        return buf.getvalue()

    def save(self, path: str | Path):
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Checkpoint":
        if not blob.startswith(MAGIC):
            raise CheckpointError("not a checkpoint (bad magic or unsupported version)")
        pos = len(MAGIC)
        try:
            (count,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            sections = {}
            for _ in range(count):
                (n,) = struct.unpack_from("<H", blob, pos)
                pos += 2
                name = blob[pos : pos + n].decode("utf-8")
                pos += n
                (size,) = struct.unpack_from("<Q", blob, pos)
                pos += 8
                sections[name] = blob[pos : pos + size]
                if len(sections[name]) != size:
                    raise CheckpointError(f"section {name!r} is truncated")
                pos += size
        except struct.error as exc:
            raise CheckpointError(f"corrupt checkpoint: {exc}") from None
        missing = {"config", "labels", "chars", "words", "params"} - set(sections)
        if missing:
            raise CheckpointError(f"missing sections: {sorted(missing)}")

        config = config_from_text(sections["config"].decode("utf-8"))
        labels = LabelVocab.from_text(sections["labels"].decode("utf-8"))
        chars = _lines(sections["chars"].decode("utf-8"))
        words = _lines(sections["words"].decode("utf-8"))
        model = Encoder(config.model_config(), labels, chars[1:], words[1:], seed=0)
        if model.char_keys != chars or model.word_keys != words:
            raise CheckpointError("embedding key lists are not in canonical order")
        arrays = _unpack_params(sections["params"])
        if set(arrays) != set(model.params):
            raise CheckpointError("parameter names do not match the configured architecture")
        for name, arr in arrays.items():
            if arr.shape != model.params[name].shape:
                raise CheckpointError(f"{name}: shape {arr.shape} != {model.params[name].shape}")
            model.params[name].data = arr
        charlm = CharLM.from_json(sections["charlm"].decode("utf-8")) if "charlm" in sections else None
        return cls(config, model, charlm)

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        return cls.from_bytes(Path(path).read_bytes())
