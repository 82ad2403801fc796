"""Word segmentation for sandhi-rich text with a lattice transformer."""

from .checkpoint import Checkpoint
from .config import RunConfig, load_config
from .encoder import Encoder, ModelConfig
from .labels import LabelVocab, align_gold, decode_labels
from .lattice import Lattice, Span, build_lattice, enumerate_paths
from .pipeline import Segmenter, evaluate, train
from .symbols import SymbolSequence, normalize

__version__ = "0.1.0"

__all__ = [
    "Checkpoint", "Encoder", "LabelVocab", "Lattice", "ModelConfig", "RunConfig", "Segmenter",
    "Span", "SymbolSequence", "align_gold", "build_lattice", "decode_labels", "enumerate_paths",
    "evaluate", "load_config", "normalize", "train",
]
