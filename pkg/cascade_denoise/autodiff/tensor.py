"""
Dense 64-bit tensor with a reverse-mode tape.

Operations executed while a ``Tape`` is active record their analytic adjoint
on that tape; ``Tape.backward`` replays the records in reverse. Outside a tape
nothing is recorded, which is how inference runs.
"""
from contextvars import ContextVar
from typing import Callable, Optional, Sequence, Tuple
import logging

import numpy as np

from .exceptions import DimensionError

logger = logging.getLogger(__name__)

_active_tape: ContextVar[Optional["Tape"]] = ContextVar("active_tape", default=None)

Backward = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def numpy(self):
        return self.data

    def item(self):
        if self.data.size != 1:
            raise DimensionError(f"item() needs a single element, shape is {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def accumulate(self, grad):
        if grad.shape != self.data.shape:
            raise DimensionError(f"gradient shape {grad.shape} does not match tensor shape {self.shape}")
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        from .ops import add
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from .ops import sub
        return sub(self, other)

    def __rsub__(self, other):
        from .ops import sub
        return sub(other, self)

    def __mul__(self, other):
        from .ops import mul
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from .ops import mul
        if isinstance(other, Tensor):
            raise TypeError("division is only defined by a scalar")
        return mul(self, 1.0 / other)

    def __neg__(self):
        from .ops import mul
        return mul(self, -1.0)


def as_tensor(value):
    return value if isinstance(value, Tensor) else Tensor(value)


class _Node:
    __slots__ = ("output", "inputs", "backward", "op")

    def __init__(self, output, inputs, backward, op):
        self.output = output
        self.inputs = inputs
        self.backward = backward
        self.op = op


class Tape:
    """
    Records every differentiable operation run inside ``with Tape() as tape``.

    Each thread or patch worker owns its tape; tapes are bound through a
    context variable so concurrent workers never share records.
    """

    def __init__(self):
        self.nodes = []
        self._token = None

    def __enter__(self):
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _active_tape.reset(self._token)
        self._token = None
        return False

    def __len__(self):
        return len(self.nodes)

    def record(self, node):
        self.nodes.append(node)

    def backward(self, output: Tensor, grad=None):
        if not output.requires_grad:
            raise ValueError("backward() called on a tensor that is not on the tape")
        seed = np.ones_like(output.data) if grad is None else np.asarray(grad, dtype=np.float64)
        output.accumulate(seed)
        for node in reversed(self.nodes):
            upstream = node.output.grad
            if upstream is None:
                continue
            grads = node.backward(upstream)
            for tensor, g in zip(node.inputs, grads):
                if g is not None and tensor.requires_grad:
                    tensor.accumulate(g)
        logger.debug(f"backward replayed {len(self.nodes)} records")


def current_tape() -> Optional[Tape]:
    return _active_tape.get()


def make_result(data, inputs: Sequence[Tensor], backward: Backward, op: str) -> Tensor:
    """Wrap an op's forward value and record its adjoint when a tape is active."""
    tape = _active_tape.get()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=track)
    if track:
        tape.record(_Node(out, tuple(inputs), backward, op))
    return out
