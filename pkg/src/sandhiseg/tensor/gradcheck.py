from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Tape


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst: str | None
    per_param: dict = field(default_factory=dict)
    tolerance: float = 1e-6

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    @property
    def flagged(self) -> list[str]:
        return [k for k, v in self.per_param.items() if v >= self.tolerance]


def relative_error(analytic, numeric, floor=1e-7):
    return np.abs(analytic - numeric) / np.maximum(np.abs(analytic) + np.abs(numeric), floor)


def grad_check(closure, params, tolerance=1e-6, h=1e-5, floor=1e-7):
    """Compare tape gradients of ``closure()`` against central differences.

    ``closure`` must rebuild the scalar loss from the current parameter
    values each call and be deterministic.
    """
    for p in params:
        p.grad = None
    with Tape() as tape:
        loss = closure()
    tape.backward(loss)
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]

    per_param = {}
    for k, (p, a) in enumerate(zip(params, analytic)):
        numeric = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + h
            up = closure().item()
            flat[idx] = orig - h
            down = closure().item()
            flat[idx] = orig
            numeric.reshape(-1)[idx] = (up - down) / (2 * h)
        err = relative_error(a, numeric, floor)
        per_param[p.name or f"param{k}"] = float(err.max()) if err.size else 0.0
    worst = max(per_param, key=per_param.get) if per_param else None
    return GradCheckReport(per_param[worst] if worst else 0.0, worst, per_param, tolerance)
