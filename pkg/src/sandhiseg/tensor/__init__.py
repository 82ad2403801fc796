"""Small reverse-mode autodiff core over float64 numpy arrays."""

from .core import Tape, Tensor
from .gradcheck import GradCheckReport, grad_check
from .optim import Adam, adam_step
from . import ops

__all__ = ["Tape", "Tensor", "GradCheckReport", "grad_check", "Adam", "adam_step", "ops"]
