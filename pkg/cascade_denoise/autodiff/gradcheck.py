from dataclasses import dataclass, field
import logging

import numpy as np

from .exceptions import GradientCheckError, ParameterError
from .tensor import Tape

logger = logging.getLogger(__name__)


@dataclass
class GradCheckReport:
    max_rel_errors: list = field(default_factory=list)
    tol: float = 1e-3

    @property
    def passed(self):
        return all(err < self.tol for err in self.max_rel_errors)


def grad_check(op, inputs, tol=1e-3, step=1e-6, seed=0, floor=1e-6):
    """
    Compare the tape gradient of ``sum(op(*inputs) * R)`` against central
    differences, R a fixed random weighting. Returns the max relative error
    per input; the check passes when every one is below ``tol``.
    """
    for i, tensor in enumerate(inputs):
        if not tensor.requires_grad:
            raise ParameterError(f"grad_check input {i} does not require grad")
        if not np.all(np.isfinite(tensor.data)):
            raise ParameterError(f"grad_check input {i} is not finite")
        tensor.zero_grad()

    with Tape() as tape:
        out = op(*inputs)
    weights = np.random.default_rng(seed).standard_normal(out.shape)
    tape.backward(out, weights)

    report = GradCheckReport(tol=tol)
    for i, tensor in enumerate(inputs):
        analytic = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        bad = np.argwhere(~np.isfinite(analytic))
        if len(bad):
            location = tuple(int(v) for v in bad[0])
            raise GradientCheckError(f"non-finite gradient for input {i} at index {location}")
        numeric = np.zeros_like(tensor.data)
        flat, num = tensor.data.reshape(-1), numeric.reshape(-1)
        for j in range(flat.size):
            saved = flat[j]
            flat[j] = saved + step
            plus = np.sum(op(*inputs).data * weights)
            flat[j] = saved - step
            minus = np.sum(op(*inputs).data * weights)
            flat[j] = saved
            num[j] = (plus - minus) / (2 * step)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
        report.max_rel_errors.append(float(np.max(np.abs(analytic - numeric) / denom)))
    logger.debug(f"grad_check max relative errors {report.max_rel_errors}")
    return report
