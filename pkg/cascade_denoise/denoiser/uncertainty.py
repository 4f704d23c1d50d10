"""
Uncertainty-weighted loss and the early-exit gate.

The uncertainty map stores log variance u, sigma**2 = exp(u).
"""
from dataclasses import dataclass
import logging

import numpy as np

from autodiff import ops
from autodiff.exceptions import DimensionError, ParameterError
from autodiff.tensor import Tensor, as_tensor

from .schemas import ExitPolicy

logger = logging.getLogger(__name__)

LOSS_FORMS = ("printed", "laplace")


@dataclass
class GateDecision:
    mean_uncertainty: float
    exit: bool
    iteration: int


def eu_loss(s, g, log_var, form="printed"):
    """
    Per-pixel loss averaged over the patch, with n = ||s - g|| over channels:
        printed:  n / (2 sigma^2) + ln(sigma^2) / 2
        laplace:  n / sigma + ln(sigma)
    """
    g = as_tensor(g)
    if s.shape != g.shape:
        raise DimensionError(f"eu_loss: prediction {s.shape} and target {g.shape} differ")
    if log_var.shape != (1,) + tuple(s.shape[1:]):
        raise DimensionError(f"eu_loss: uncertainty map {log_var.shape} does not match extents {s.shape[1:]}")
    if form not in LOSS_FORMS:
        raise ParameterError(f"unknown loss form {form!r}, expected one of {LOSS_FORMS}")
    residual = ops.channel_norm(s - g, axis=0)
    if form == "printed":
        per_pixel = 0.5 * residual * ops.exp(-log_var) + 0.5 * log_var
    else:
        per_pixel = residual * ops.exp(-0.5 * log_var) + 0.5 * log_var
    return ops.mean(per_pixel)


def total_loss(losses, gamma, n_max=None):
    """sum_k gamma**(N-k) * L_k for k = 1..len(losses), N defaulting to len(losses)."""
    if not losses:
        raise ParameterError("total_loss needs at least one per-iteration loss")
    if not 0 < gamma <= 1:
        raise ParameterError(f"gamma must be in (0, 1], got {gamma}")
    n = len(losses) if n_max is None else n_max
    if len(losses) > n:
        raise ParameterError(f"{len(losses)} losses exceed the configured {n} iterations")
    total = 0.0
    for k, loss in enumerate(losses, start=1):
        total = total + loss * gamma ** (n - k)
    return total


def decide_exit(u, policy: ExitPolicy, iteration):
    if iteration < 1:
        raise ParameterError(f"iteration must be >= 1, got {iteration}")
    values = u.data if isinstance(u, Tensor) else np.asarray(u, dtype=np.float64)
    mean_uncertainty = float(np.exp(values).mean())
    if policy.exit_on == "low":
        confident = mean_uncertainty < policy.threshold
    else:
        confident = mean_uncertainty > policy.threshold
    exit_now = (policy.enabled and confident) or iteration >= policy.max_iters
    logger.debug(f"iteration {iteration}: mean sigma^2 {mean_uncertainty:.6g} exit={exit_now}")
    return GateDecision(mean_uncertainty=mean_uncertainty, exit=exit_now, iteration=iteration)


def _exit_iteration(entry):
    if isinstance(entry, GateDecision):
        return entry.iteration
    if not entry:
        raise ParameterError("empty decision list for a patch")
    return entry[-1].iteration


def compute_savings(decisions, max_iters):
    """1 - mean exit iteration / max_iters; one decision list (or final decision) per patch."""
    if not decisions:
        raise ParameterError("compute_savings needs at least one patch")
    if max_iters < 1:
        raise ParameterError(f"max_iters must be >= 1, got {max_iters}")
    mean_exit = float(np.mean([_exit_iteration(entry) for entry in decisions]))
    return 1.0 - mean_exit / max_iters
