"""
Differentiable operations over ``Tensor``.

Every function computes its forward value with numpy and hands an analytic
adjoint to ``make_result``. Gradients for inputs that do not require them are
not computed.
"""
import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import DimensionError, DomainError, ParameterError
from .tensor import Tensor, as_tensor, make_result

logger = logging.getLogger(__name__)

POINTWISE_KINDS = ("sigmoid", "tanh", "relu", "exp", "log")


def _finite(data, op):
    if not np.all(np.isfinite(data)):
        raise DomainError(f"{op} produced non-finite values")
    return data


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast(a, b, fn, op):
    try:
        return fn(a.data, b.data)
    except ValueError as exc:
        raise DimensionError(f"{op}: cannot broadcast {a.shape} with {b.shape}") from exc


def _require_rank(x, rank, what):
    if x.ndim != rank:
        raise DimensionError(f"{what} must have rank {rank}, got shape {x.shape}")


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = _broadcast(a, b, np.add, "add")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result(data, (a, b), backward, "add")


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = _broadcast(a, b, np.subtract, "sub")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_result(data, (a, b), backward, "sub")


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = _finite(_broadcast(a, b, np.multiply, "mul"), "mul")

    def backward(g):
        ga = _unbroadcast(g * b.data, a.shape) if a.requires_grad else None
        gb = _unbroadcast(g * a.data, b.shape) if b.requires_grad else None
        return ga, gb

    return make_result(data, (a, b), backward, "mul")


def sum(x, axis=None, keepdims=False):
    data = np.sum(x.data, axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return make_result(data, (x,), backward, "sum")


def mean(x, axis=None, keepdims=False):
    count = x.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def pointwise(x, kind):
    """Elementwise sigmoid, tanh, relu, exp or log."""
    if kind not in POINTWISE_KINDS:
        raise ParameterError(f"unknown pointwise kind {kind!r}, expected one of {POINTWISE_KINDS}")
    v = x.data
    if kind == "sigmoid":
        y = 0.5 * (1.0 + np.tanh(0.5 * v))
        local = lambda: y * (1.0 - y)
    elif kind == "tanh":
        y = np.tanh(v)
        local = lambda: 1.0 - y * y
    elif kind == "relu":
        y = np.maximum(v, 0.0)
        local = lambda: (v > 0).astype(np.float64)
    elif kind == "exp":
        with np.errstate(over="ignore"):
            y = _finite(np.exp(v), "exp")
        local = lambda: y
    else:
        if np.any(v <= 0):
            raise DomainError("log requires strictly positive input")
        y = np.log(v)
        local = lambda: 1.0 / v

    def backward(g):
        return (g * local(),)

    return make_result(y, (x,), backward, kind)


def sigmoid(x):
    return pointwise(x, "sigmoid")


def tanh(x):
    return pointwise(x, "tanh")


def relu(x):
    return pointwise(x, "relu")


def exp(x):
    return pointwise(x, "exp")


def log(x):
    return pointwise(x, "log")


def clip(x, low, high):
    data = np.clip(x.data, low, high)

    def backward(g):
        return (g * ((x.data >= low) & (x.data <= high)),)

    return make_result(data, (x,), backward, "clip")


def channel_norm(x, axis=1):
    """Euclidean norm over ``axis`` (kept as a unit axis); subgradient 0 at the origin."""
    norm = np.sqrt(np.sum(x.data * x.data, axis=axis, keepdims=True))

    def backward(g):
        safe = np.where(norm > 0, norm, 1.0)
        return (np.where(norm > 0, g * x.data / safe, 0.0),)

    return make_result(norm, (x,), backward, "channel_norm")


def concat(tensors, axis=1):
    tensors = [as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        shapes = ", ".join(str(t.shape) for t in tensors)
        raise DimensionError(f"concat along axis {axis}: incompatible shapes {shapes}") from exc
    bounds = np.cumsum([0] + [t.shape[axis] for t in tensors])

    def backward(g):
        return tuple(
            np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis) if t.requires_grad else None
            for i, t in enumerate(tensors)
        )

    return make_result(data, tensors, backward, "concat")


def reshape(x, shape):
    try:
        data = x.data.reshape(shape)
    except ValueError as exc:
        raise DimensionError(f"cannot reshape {x.shape} into {shape}") from exc

    def backward(g):
        return (g.reshape(x.shape),)

    return make_result(data, (x,), backward, "reshape")


def transpose(x, axes):
    inverse = np.argsort(axes)

    def backward(g):
        return (g.transpose(inverse),)

    return make_result(x.data.transpose(axes), (x,), backward, "transpose")


def take(x, index):
    """Basic (slice/int) indexing, e.g. a crop or a channel range."""
    data = x.data[index]

    def backward(g):
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return make_result(data, (x,), backward, "take")


def crop(x, top, left, height, width):
    _require_rank(x, 4, "crop input")
    H, W = x.shape[2:]
    if top < 0 or left < 0 or top + height > H or left + width > W:
        raise DimensionError(f"crop ({top},{left},{height},{width}) outside extents H={H}, W={W}")
    return take(x, (slice(None), slice(None), slice(top, top + height), slice(left, left + width)))


def conv2d(x, weight, bias=None, stride=1, padding=0):
    """
    2D cross-correlation, input [B,C,H,W], weight [O,C,k,k] -> [B,O,H',W'].

    H' = (H + 2*padding - k) // stride + 1.
    """
    _require_rank(x, 4, "conv2d input")
    _require_rank(weight, 4, "conv2d weight")
    B, C, H, W = x.shape
    O, Cw, kh, kw = weight.shape
    if Cw != C:
        raise DimensionError(f"conv2d: input channel axis 1 has {C} but weight axis 1 has {Cw}")
    if kh != kw or kh % 2 == 0:
        raise DimensionError(f"conv2d: kernel axes 2,3 must be equal and odd, got {kh}x{kw}")
    if stride < 1 or padding < 0:
        raise ParameterError(f"conv2d: stride {stride} must be >= 1 and padding {padding} >= 0")
    if bias is not None and bias.shape != (O,):
        raise DimensionError(f"conv2d: bias axis 0 has {bias.shape} but weight axis 0 has {O}")
    k = kh
    Ho = (H + 2 * padding - k) // stride + 1
    Wo = (W + 2 * padding - k) // stride + 1
    if Ho < 1 or Wo < 1:
        raise DimensionError(f"conv2d: input extents H={H}, W={W} too small for kernel {k}")

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(xp, (k, k), axis=(2, 3))[:, :, ::stride, ::stride][:, :, :Ho, :Wo]
    out = np.tensordot(windows, weight.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + bias.data[None, :, None, None]
    inputs = (x, weight) if bias is None else (x, weight, bias)

    def backward(g):
        gx = gw = gb = None
        if x.requires_grad:
            cols = np.tensordot(g, weight.data, axes=([1], [0]))
            gxp = np.zeros_like(xp)
            for u in range(k):
                for v in range(k):
                    gxp[:, :, u:u + stride * Ho:stride, v:v + stride * Wo:stride] += (
                        cols[:, :, :, :, u, v].transpose(0, 3, 1, 2)
                    )
            gx = gxp[:, :, padding:padding + H, padding:padding + W]
        if weight.requires_grad:
            gw = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
        if bias is not None and bias.requires_grad:
            gb = g.sum(axis=(0, 2, 3))
        return (gx, gw) if bias is None else (gx, gw, gb)

    return make_result(out, inputs, backward, "conv2d")


def avg_pool2(x):
    """2x2 mean pooling with stride 2."""
    _require_rank(x, 4, "avg_pool2 input")
    B, C, H, W = x.shape
    if H % 2 or W % 2:
        raise DimensionError(f"avg_pool2: extents H={H}, W={W} must be even")
    data = x.data.reshape(B, C, H // 2, 2, W // 2, 2).mean(axis=(3, 5))

    def backward(g):
        return (np.repeat(np.repeat(g, 2, axis=2), 2, axis=3) * 0.25,)

    return make_result(data, (x,), backward, "avg_pool2")


def grid(height, width, batch=1):
    """Identity sampling grid [batch,2,height,width]; channel 0 is x (column), 1 is y (row)."""
    ys, xs = np.meshgrid(np.arange(height, dtype=np.float64), np.arange(width, dtype=np.float64), indexing="ij")
    return np.broadcast_to(np.stack([xs, ys])[None], (batch, 2, height, width)).copy()


def bilinear_sample(x, coords):
    """
    Sample x [B,C,H,W] at absolute pixel positions coords [B,2,Ho,Wo].

    Positions outside the image are clamped to the border. Differentiable in
    both x and coords; the coordinate gradient is zero where clamping is active.
    """
    x, coords = as_tensor(x), as_tensor(coords)
    _require_rank(x, 4, "bilinear_sample input")
    _require_rank(coords, 4, "bilinear_sample coords")
    B, C, H, W = x.shape
    if coords.shape[0] != B or coords.shape[1] != 2:
        raise DimensionError(f"bilinear_sample: coords shape {coords.shape} must be [{B},2,Ho,Wo]")
    Ho, Wo = coords.shape[2:]
    cx, cy = coords.data[:, 0], coords.data[:, 1]

    xc = np.clip(cx, 0.0, W - 1)
    yc = np.clip(cy, 0.0, H - 1)
    x0 = np.clip(np.floor(xc), 0, max(W - 2, 0)).astype(np.int64)
    y0 = np.clip(np.floor(yc), 0, max(H - 2, 0)).astype(np.int64)
    x1 = np.minimum(x0 + 1, W - 1)
    y1 = np.minimum(y0 + 1, H - 1)
    wx = (xc - x0)[:, None]
    wy = (yc - y0)[:, None]

    flat = x.data.reshape(B, C, H * W)

    def gather(yi, xi):
        idx = (yi * W + xi).reshape(B, 1, -1)
        return np.take_along_axis(flat, np.broadcast_to(idx, (B, C, idx.shape[2])), axis=2).reshape(B, C, Ho, Wo)

    Ia, Ib, Ic, Id = gather(y0, x0), gather(y0, x1), gather(y1, x0), gather(y1, x1)
    wa, wb = (1 - wx) * (1 - wy), wx * (1 - wy)
    wc, wd = (1 - wx) * wy, wx * wy
    out = wa * Ia + wb * Ib + wc * Ic + wd * Id

    def backward(g):
        gx = gc = None
        if x.requires_grad:
            base = ((np.arange(B)[:, None] * C + np.arange(C)[None, :]) * (H * W))[:, :, None]
            total = np.zeros(B * C * H * W)
            for yi, xi, weight in ((y0, x0, wa), (y0, x1, wb), (y1, x0, wc), (y1, x1, wd)):
                idx = base + (yi * W + xi).reshape(B, 1, -1)
                vals = (g * weight).reshape(B, C, -1)
                total += np.bincount(idx.ravel(), weights=vals.ravel(), minlength=total.size)
            gx = total.reshape(B, C, H, W)
        if coords.requires_grad:
            dwx = (1 - wy) * (Ib - Ia) + wy * (Id - Ic)
            dwy = (1 - wx) * (Ic - Ia) + wx * (Id - Ib)
            inside_x = (cx > 0) & (cx < W - 1)
            inside_y = (cy > 0) & (cy < H - 1)
            gc = np.stack([(g * dwx).sum(axis=1) * inside_x, (g * dwy).sum(axis=1) * inside_y], axis=1)
        return gx, gc

    return make_result(out, (x, coords), backward, "bilinear_sample")


def upsample2x(x):
    """Bilinear x2 upsampling (half-pixel centres), built on bilinear_sample."""
    _require_rank(x, 4, "upsample2x input")
    B, _, H, W = x.shape
    coords = grid(2 * H, 2 * W, B)
    coords = (coords + 0.5) / 2.0 - 0.5
    return bilinear_sample(x, Tensor(coords))


def correlation(f1, f2):
    """All-pairs inner products: [B,D,h,w] x [B,D,h,w] -> [B,h,w,h,w]."""
    _require_rank(f1, 4, "correlation feat1")
    if f1.shape != f2.shape:
        raise DimensionError(f"correlation: feature shapes differ, {f1.shape} vs {f2.shape}")
    B, D, h, w = f1.shape
    a = f1.data.reshape(B, D, h * w)
    b = f2.data.reshape(B, D, h * w)
    data = np.matmul(a.transpose(0, 2, 1), b).reshape(B, h, w, h, w)

    def backward(g):
        gm = g.reshape(B, h * w, h * w)
        ga = np.matmul(b, gm.transpose(0, 2, 1)).reshape(f1.shape) if f1.requires_grad else None
        gb = np.matmul(a, gm).reshape(f2.shape) if f2.requires_grad else None
        return ga, gb

    return make_result(data, (f1, f2), backward, "correlation")
