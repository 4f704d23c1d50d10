"""
Single-frame pre-denoiser: a small U-Net predicting a residual.

Level l of the encoder has ``width * 2**l`` channels; each level halves the
resolution with 2x2 average pooling, the decoder mirrors it with bilinear
upsampling and skip concatenation.
"""
from dataclasses import dataclass
import logging

from autodiff import ops
from autodiff.exceptions import DimensionError
from autodiff.params import ParamSet, init_conv

from .layers import batched, conv
from .schemas import ModelConfig

logger = logging.getLogger(__name__)

PREFIX = "predenoise"


def init_predenoiser(params, config: ModelConfig, rng):
    depth, width, channels = config.predenoise_depth, config.predenoise_width, config.channels
    widths = [width * 2 ** level for level in range(depth + 1)]
    previous = channels
    for level in range(depth):
        init_conv(params, f"{PREFIX}.enc{level}.conv1", previous, widths[level], 3, rng)
        init_conv(params, f"{PREFIX}.enc{level}.conv2", widths[level], widths[level], 3, rng)
        previous = widths[level]
    init_conv(params, f"{PREFIX}.bottleneck", previous, widths[depth], 3, rng)
    for level in reversed(range(depth)):
        init_conv(params, f"{PREFIX}.dec{level}.conv1", widths[level + 1] + widths[level], widths[level], 3, rng)
        init_conv(params, f"{PREFIX}.dec{level}.conv2", widths[level], widths[level], 3, rng)
    init_conv(params, f"{PREFIX}.out", widths[0], channels, 3, rng, scale=0.1)


def predenoise(frame, params, config: ModelConfig):
    """[C,H,W] -> [C,H,W]; H and W must be divisible by 2**depth."""
    depth = config.predenoise_depth
    C, H, W = frame.shape
    if H % 2 ** depth or W % 2 ** depth:
        raise DimensionError(f"predenoise: extents H={H}, W={W} not divisible by 2**{depth}")
    x = batched(frame)
    h, skips = x, []
    for level in range(depth):
        h = ops.relu(conv(params, f"{PREFIX}.enc{level}.conv1", h))
        h = ops.relu(conv(params, f"{PREFIX}.enc{level}.conv2", h))
        skips.append(h)
        h = ops.avg_pool2(h)
    h = ops.relu(conv(params, f"{PREFIX}.bottleneck", h))
    for level in reversed(range(depth)):
        h = ops.concat([ops.upsample2x(h), skips[level]], axis=1)
        h = ops.relu(conv(params, f"{PREFIX}.dec{level}.conv1", h))
        h = ops.relu(conv(params, f"{PREFIX}.dec{level}.conv2", h))
    out = x + conv(params, f"{PREFIX}.out", h)
    return ops.reshape(out, (C, H, W))


def _edge_pad(frame, pad_h, pad_w):
    C, H, W = frame.shape
    if pad_h:
        last = ops.take(frame, (slice(None), slice(H - 1, H)))
        frame = ops.concat([frame] + [last] * pad_h, axis=1)
    if pad_w:
        last = ops.take(frame, (slice(None), slice(None), slice(W - 1, W)))
        frame = ops.concat([frame] + [last] * pad_w, axis=2)
    return frame


def predenoise_padded(frame, params, config: ModelConfig):
    """Any extents: edge-pad to a multiple of 2**depth, run the pre-denoiser, crop back."""
    step = 2 ** config.predenoise_depth
    C, H, W = frame.shape
    pad_h, pad_w = -H % step, -W % step
    if not pad_h and not pad_w:
        return predenoise(frame, params, config)
    out = predenoise(_edge_pad(frame, pad_h, pad_w), params, config)
    return ops.take(out, (slice(None), slice(0, H), slice(0, W)))


@dataclass
class PreDenoiser:
    params: ParamSet
    config: ModelConfig

    @property
    def depth(self):
        return self.config.predenoise_depth

    def __call__(self, frame):
        return predenoise(frame, self.params, self.config)
