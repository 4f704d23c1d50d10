"""
Iterative flow refinement between a reference patch and one supporting patch.

Features live at half the patch resolution. The all-pairs correlation volume
is pooled into a pyramid, sampled around the current flow estimate and fed to
a convolutional GRU whose weights are shared by every iteration.

Flow convention: reference pixel ``p`` corresponds to supporting pixel
``p + flow[p]``; channel 0 is x, channel 1 is y.
"""
from dataclasses import dataclass
from typing import List
import logging

import numpy as np

from autodiff import ops
from autodiff.exceptions import DimensionError, ParameterError
from autodiff.params import init_conv
from autodiff.tensor import Tensor

from .layers import batched, conv
from .schemas import ModelConfig

logger = logging.getLogger(__name__)


@dataclass
class FlowField:
    flow: Tensor
    iteration: int

    @property
    def mean_magnitude(self):
        return float(np.sqrt((self.flow.data ** 2).sum(axis=1)).mean())


@dataclass
class CorrelationPyramid:
    """Level l holds the volume as [h*w, 1, h/2**l, w/2**l]."""
    levels: List[Tensor]
    height: int
    width: int

    def volume(self, level):
        hk, wk = self.levels[level].shape[2:]
        return self.levels[level].data.reshape(self.height, self.width, hk, wk)


@dataclass
class GruState:
    h: Tensor
    context: Tensor


def init_flow(params, config: ModelConfig, rng):
    c, d, cc, hid = config.channels, config.feature_dim, config.context_dim, config.hidden_dim
    for net, out in (("fnet", d), ("cnet", cc)):
        source = 2 * c if net == "fnet" else c
        init_conv(params, f"flow.{net}.conv1", source, out, 3, rng)
        init_conv(params, f"flow.{net}.conv2", out, out, 3, rng)
        init_conv(params, f"flow.{net}.conv3", out, out, 3, rng)
    init_conv(params, "flow.hinit", cc, hid, 3, rng)
    inputs = hid + config.lookup_channels + 2 + cc
    for gate in ("z", "r", "h"):
        init_conv(params, f"flow.gru.{gate}", inputs, hid, 3, rng)
    init_conv(params, "flow.head.conv1", hid, hid, 3, rng)
    init_conv(params, "flow.head.conv2", hid, 2, 3, rng, scale=0.1)


def _encode(net, x, params):
    if x.shape[-1] % 2 or x.shape[-2] % 2:
        raise DimensionError(f"flow.{net}: patch extents {x.shape[-2:]} must be divisible by 2")
    h = ops.relu(conv(params, f"flow.{net}.conv1", x))
    h = ops.relu(conv(params, f"flow.{net}.conv2", h, stride=2))
    return conv(params, f"flow.{net}.conv3", h)


def encode_features(patch_pre, patch_noisy, params):
    """[C,p,p] x2 -> [1,D,p/2,p/2]."""
    if patch_pre.shape != patch_noisy.shape:
        raise DimensionError(f"encode_features: {patch_pre.shape} vs {patch_noisy.shape}")
    return _encode("fnet", batched(ops.concat([patch_pre, patch_noisy], axis=0)), params)


def encode_context(ref_patch, params):
    return ops.relu(_encode("cnet", batched(ref_patch), params))


def build_corr_pyramid(feat1, feat2, levels=4):
    if feat1.shape != feat2.shape:
        raise DimensionError(f"build_corr_pyramid: feature shapes differ, {feat1.shape} vs {feat2.shape}")
    _, _, h, w = feat1.shape
    volume = ops.reshape(ops.correlation(feat1, feat2), (h * w, 1, h, w))
    pyramid = [volume]
    for _ in range(levels - 1):
        pyramid.append(ops.avg_pool2(pyramid[-1]))
    return CorrelationPyramid(levels=pyramid, height=h, width=w)


def lookup(pyramid, flow, radius):
    """
    Sample a (2r+1)**2 neighbourhood of every pyramid level around ``grid + flow``.

    Channel (dy + r) * (2r + 1) + (dx + r) of level l holds the sample at
    offset (dx, dy); levels are concatenated in order. The flow is detached.
    """
    if radius < 1:
        raise ParameterError(f"lookup radius must be >= 1, got {radius}")
    h, w = pyramid.height, pyramid.width
    flow_data = flow.flow.data if isinstance(flow, FlowField) else flow.data
    centres = (ops.grid(h, w) + flow_data)[0].reshape(2, h * w).T
    span = np.arange(-radius, radius + 1, dtype=np.float64)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    taps = 2 * radius + 1

    out = []
    for level, volume in enumerate(pyramid.levels):
        scaled = centres / 2 ** level
        coords = np.stack([scaled[:, 0, None, None] + dx, scaled[:, 1, None, None] + dy], axis=1)
        sampled = ops.bilinear_sample(volume, Tensor(coords))
        sampled = ops.reshape(sampled, (h, w, taps * taps))
        out.append(ops.reshape(ops.transpose(sampled, (2, 0, 1)), (1, taps * taps, h, w)))
    return ops.concat(out, axis=1)


def gru_gates(h, x, params):
    hx = ops.concat([h, x], axis=1)
    z = ops.sigmoid(conv(params, "flow.gru.z", hx))
    r = ops.sigmoid(conv(params, "flow.gru.r", hx))
    return z, r


def gru_update(state, x, params, config: ModelConfig):
    """One update: returns the new state and the flow increment at feature resolution."""
    expected = config.lookup_channels + 2 + config.context_dim
    if x.shape[1] != expected:
        raise DimensionError(f"gru_update: input axis 1 has {x.shape[1]} channels, expected {expected}")
    h = state.h
    z, r = gru_gates(h, x, params)
    candidate = ops.tanh(conv(params, "flow.gru.h", ops.concat([r * h, x], axis=1)))
    h_next = (1.0 - z) * h + z * candidate
    delta = conv(params, "flow.head.conv2", ops.relu(conv(params, "flow.head.conv1", h_next)))
    return GruState(h=h_next, context=state.context), delta


def refine_flow(triplet, n_iters, params, config: ModelConfig):
    """
    Flow iterates f_1..f_N for each supporting frame, estimated independently.

    f_0 is zero and f_{k+1} = f_k + delta_k; the lookup and the GRU input see a
    detached copy of f_k.
    """
    if n_iters < 1:
        raise ParameterError(f"n_iters must be >= 1, got {n_iters}")
    ref_features = encode_features(triplet.ref_pre, triplet.ref_noisy, params)
    context = encode_context(triplet.ref_pre, params)
    h0 = ops.tanh(conv(params, "flow.hinit", context))
    _, _, fh, fw = ref_features.shape

    sequences = []
    for sup_pre, sup_noisy in zip(triplet.sup_pre, triplet.sup_noisy):
        pyramid = build_corr_pyramid(ref_features, encode_features(sup_pre, sup_noisy, params), config.corr_levels)
        state = GruState(h=h0, context=context)
        flow = Tensor(np.zeros((1, 2, fh, fw)))
        iterates = []
        for k in range(n_iters):
            frozen = flow.detach()
            x = ops.concat([lookup(pyramid, frozen, config.corr_radius), frozen, context], axis=1)
            state, delta = gru_update(state, x, params, config)
            flow = frozen + delta
            iterates.append(FlowField(flow=flow, iteration=k + 1))
        sequences.append(iterates)
    return sequences


def upsample_flow(flow):
    """Feature-resolution flow to patch resolution: bilinear x2, values x2."""
    return ops.upsample2x(flow) * 2.0


def endpoint_error(flow, target):
    """Mean Euclidean distance between ``flow`` [1,2,h,w] and ``target`` (broadcastable, e.g. (dx, dy))."""
    flow = flow.flow if isinstance(flow, FlowField) else flow
    target = np.asarray(target.data if isinstance(target, Tensor) else target, dtype=np.float64)
    if target.ndim == 1:
        target = target.reshape(1, 2, 1, 1)
    return ops.mean(ops.channel_norm(flow - Tensor(target), axis=1))
