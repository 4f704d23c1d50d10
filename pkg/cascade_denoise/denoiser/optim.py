"""AdamW with decoupled weight decay, per-parameter step counts, and global-norm clipping."""
from dataclasses import dataclass, field
import logging

import numpy as np

from autodiff.exceptions import DomainError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    steps: dict = field(default_factory=dict)
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def gradients(params):
    return {name: tensor.grad for name, tensor in params.items() if tensor.grad is not None}


def clip_grad_norm(grads, max_norm):
    """Scale ``grads`` so their global L2 norm is at most ``max_norm``; returns (grads, norm before clipping)."""
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if not np.isfinite(norm):
        raise DomainError("non-finite gradient norm")
    if norm > max_norm:
        scale = max_norm / norm
        grads = {name: g * scale for name, g in grads.items()}
    return grads, norm


def adamw_step(params, grads, state: AdamState, config, frozen=(), lr=None):
    """
    One update of every parameter that has a gradient and is not under a frozen prefix.

    ``config`` supplies lr, beta1, beta2, eps and weight_decay; ``lr`` overrides it.
    """
    lr = config.lr if lr is None else lr
    b1, b2, eps, wd = config.beta1, config.beta2, config.eps, config.weight_decay
    for name, grad in grads.items():
        if any(name.startswith(prefix) for prefix in frozen):
            continue
        if not np.all(np.isfinite(grad)):
            raise DomainError(f"non-finite gradient for parameter {name!r}")
        tensor = params[name]
        if name not in state.m:
            state.steps[name] = 0
            state.m[name] = np.zeros_like(tensor.data)
            state.v[name] = np.zeros_like(tensor.data)
        state.steps[name] += 1
        t = state.steps[name]
        state.m[name] = b1 * state.m[name] + (1 - b1) * grad
        state.v[name] = b2 * state.v[name] + (1 - b2) * grad * grad
        m_hat = state.m[name] / (1 - b1 ** t)
        v_hat = state.v[name] / (1 - b2 ** t)
        decayed = tensor.data * (1 - lr * wd)
        tensor.data = decayed - lr * m_hat / (np.sqrt(v_hat) + eps)
    return state
