from __future__ import annotations

import numpy as np

from ..errors import NonFiniteError


def adam_step(params, grads, state, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8, names=None):
    """One bias-corrected adaptive-moment update, in place.

    ``params`` and ``grads`` are parallel lists of arrays; ``state`` holds the
    step counter ``t`` and the first/second moment lists ``m`` and ``v`` and is
    created on first use.
    """
    for k, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            who = names[k] if names else f"#{k}"
            raise NonFiniteError(f"non-finite gradient for parameter {who}")
    if "t" not in state:
        state["t"] = 0
        state["m"] = [np.zeros_like(p) for p in params]
        state["v"] = [np.zeros_like(p) for p in params]
    state["t"] += 1
    t = state["t"]
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for p, g, m, v in zip(params, grads, state["m"], state["v"]):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return params, state


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.state: dict = {}

    def step(self):
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        adam_step([p.data for p in self.params], grads, self.state, self.lr,
                  self.beta1, self.beta2, self.eps, names=[p.name for p in self.params])

    def zero_grad(self):
        for p in self.params:
            p.grad = None
