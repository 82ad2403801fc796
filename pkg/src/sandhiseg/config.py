"""Run configuration: flat ``key = value`` files with command-line overrides."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .encoder import MASK_MODES, ModelConfig
from .errors import ConfigError
from .metrics import F_MODES

LATTICE_SOURCES = ("ngrams", "vocab", "candidates", "candidates+ngrams", "chars")
PRCP_MODES = ("off", "raw", "prob")


@dataclass
class RunConfig:
    lattice: str = "ngrams"
    n_max: int = 4
    candidates: str = ""
    vocab_file: str = ""
    d_model: int = 128
    d_head: int = 128
    heads: int = 4
    layers: int = 1
    d_ff: int = 384
    mask: str = "logistic"
    head_init: str = "zero"
    max_dist: int = 0  # 0: longest training sentence
    dropout: float = 0.3
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epochs: int = 50
    batch_size: int = 8
    seed: int = 0
    prcp: str = "prob"
    charlm_order: int = 6
    overlap: bool = True
    path_cap: int = 10_000
    f_mode: str = "macro"

    def validate(self) -> "RunConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.lattice in LATTICE_SOURCES, f"lattice must be one of {LATTICE_SOURCES}")
        need(self.prcp in PRCP_MODES, f"prcp must be one of {PRCP_MODES}")
        need(self.mask in MASK_MODES, f"mask must be one of {MASK_MODES}")
        need(self.f_mode in F_MODES, f"f_mode must be one of {F_MODES}")
        need(self.head_init in ("zero", "xavier"), "head_init must be zero or xavier")
        for name in ("n_max", "d_model", "d_head", "heads", "layers", "d_ff", "batch_size",
                     "charlm_order", "path_cap"):
            need(getattr(self, name) > 0, f"{name} must be positive")
        need(self.n_max >= 2, "n_max must be at least 2")
        need(self.d_head % 4 == 0, "d_head must be divisible by 4")
        need(self.epochs >= 0 and self.max_dist >= 0 and self.seed >= 0,
             "epochs, max_dist and seed must be non-negative")
        need(0.0 <= self.dropout < 1.0, "dropout must be in [0, 1)")
        need(self.lr >= 0.0, "lr must be non-negative")
        need(0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0, "Adam betas must be in [0, 1)")
        if self.lattice.startswith("candidates"):
            need(bool(self.candidates), f"lattice={self.lattice} requires a candidates file")
        if self.lattice == "vocab":
            need(bool(self.vocab_file), "lattice=vocab requires vocab_file")
        return self

    def model_config(self, max_dist: int | None = None) -> ModelConfig:
        return ModelConfig(self.d_model, self.d_head, self.heads, self.layers, self.d_ff,
                           self.dropout, self.mask, max_dist or self.max_dist or 64, self.head_init)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = "true" if v else "false"
            out.append(f"{f.name} = {v}\n")
        return "".join(out)


def _coerce(name: str, kind, raw: str):
    raw = raw.strip()
    try:
        if kind in (bool, "bool"):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("true", "1", "yes", "on")
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_pairs(lines, where="config") -> dict:
    out = {}
    for no, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{where}:{no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"{where}:{no}: unknown key {key!r}")
        out[key] = _coerce(key, _TYPES[key], value)
    return out


def load_config(path: str | Path | None = None, overrides=(), env=None) -> RunConfig:
    """Config file, then ``key=value`` overrides, then ``TLST_SEED``."""
    values = {}
    if path:
        values.update(parse_pairs(Path(path).read_text(encoding="utf-8").splitlines(), str(path)))
    values.update(parse_pairs(overrides, "override"))
    env = os.environ if env is None else env
    if env.get("TLST_SEED"):
        values["seed"] = _coerce("seed", "int", env["TLST_SEED"])
    return RunConfig(**values).validate()


def config_from_text(text: str) -> RunConfig:
    return RunConfig(**parse_pairs(text.splitlines())).validate()
