"""
One cascading reconstruction iteration and the loop that chains them.

Supporting features are warped with the current flow, aligned by a
flow-guided modulated deformable convolution, fused with the reference
features and decoded by two heads: a residual over the pre-denoised patch and
a log-variance map.
"""
from dataclasses import dataclass
from typing import List, Sequence
import logging

import numpy as np

from autodiff import ops
from autodiff.exceptions import DimensionError, ParameterError
from autodiff.params import init_conv
from autodiff.tensor import Tensor

from .flow import FlowField, upsample_flow
from .layers import batched, conv, init_residual_block, residual_block
from .schemas import ExitPolicy, ModelConfig
from .uncertainty import GateDecision, decide_exit

logger = logging.getLogger(__name__)


@dataclass
class FrameFeatures:
    m: Tensor


@dataclass
class IterationOutput:
    r_next: Tensor
    s: Tensor
    u: Tensor
    flows: Sequence[FlowField]
    decision: GateDecision

    @property
    def iteration(self):
        return self.decision.iteration


def init_recon(params, config: ModelConfig, rng):
    c, f = config.channels, config.restoration_dim
    taps = config.offset_groups * config.deform_kernel ** 2
    init_conv(params, "recon.rfe.conv1", 2 * c, f, 3, rng)
    init_conv(params, "recon.rfe.conv2", f, f, 3, rng)
    init_conv(params, "recon.align.offset.conv1", 2 * f, f, 3, rng)
    init_conv(params, "recon.align.offset.conv2", f, 2 * taps, 3, rng, scale=0.0)
    init_conv(params, "recon.align.mask.conv2", f, taps, 3, rng)
    init_conv(params, "recon.align.dcn", f, f, config.deform_kernel, rng)
    init_conv(params, "recon.fuse.proj", 3 * f, f, 1, rng)
    for index in range(config.fusion_blocks):
        init_residual_block(params, f"recon.fuse.block{index}", f, rng)
    init_conv(params, "recon.head_s.conv1", f, f, 3, rng)
    init_conv(params, "recon.head_s.conv2", f, c, 3, rng, scale=0.1)
    init_conv(params, "recon.head_u.conv1", f, f, 3, rng)
    init_conv(params, "recon.head_u.conv2", f, 1, 3, rng)


def extract_restoration_features(patch_noisy, patch_pre, params):
    if patch_noisy.shape != patch_pre.shape:
        raise DimensionError(f"extract_restoration_features: {patch_noisy.shape} vs {patch_pre.shape}")
    x = batched(ops.concat([patch_noisy, patch_pre], axis=0))
    h = ops.relu(conv(params, "recon.rfe.conv1", x))
    return FrameFeatures(m=ops.relu(conv(params, "recon.rfe.conv2", h)))


def warp_features(m, flow):
    """Backward warp: out[p] = m[p + flow[p]], bilinear, clamped at the border."""
    m = m.m if isinstance(m, FrameFeatures) else m
    flow = flow.flow if isinstance(flow, FlowField) else flow
    if flow.shape[2:] != m.shape[2:]:
        raise DimensionError(f"warp_features: flow extents {flow.shape[2:]} differ from features {m.shape[2:]}")
    return ops.bilinear_sample(m, Tensor(ops.grid(*m.shape[2:])) + flow)


def _zero_pad(x):
    B, C, H, W = x.shape
    columns = Tensor(np.zeros((B, C, H, 1)))
    x = ops.concat([columns, x, columns], axis=3)
    rows = Tensor(np.zeros((B, C, 1, W + 2)))
    return ops.concat([rows, x, rows], axis=2)


def deform_conv(x, offsets, mask, weight, bias, groups, kernel):
    """
    Modulated deformable convolution, stride 1, 'same' extents.

    ``offsets`` is [1, G*k*k*2, h, w] with channel (g*k*k + t)*2 + {0: x, 1: y};
    ``mask`` is [1, G*k*k, h, w]. Samples outside the input read zero.
    """
    B, F, H, W = x.shape
    taps = kernel * kernel
    if F % groups:
        raise DimensionError(f"deform_conv: {F} input channels not divisible by {groups} groups")
    if offsets.shape != (B, 2 * groups * taps, H, W):
        raise DimensionError(f"deform_conv: offsets shape {offsets.shape}, expected {(B, 2 * groups * taps, H, W)}")
    if mask.shape != (B, groups * taps, H, W):
        raise DimensionError(f"deform_conv: mask shape {mask.shape}, expected {(B, groups * taps, H, W)}")
    if weight.shape != (weight.shape[0], F, kernel, kernel):
        raise DimensionError(f"deform_conv: weight axes 1-3 {weight.shape[1:]}, expected {(F, kernel, kernel)}")

    padded = _zero_pad(x)
    half = kernel // 2
    base = ops.grid(H, W, B) + 1.0
    span = F // groups
    columns = []
    for g in range(groups):
        rows = []
        for t in range(taps):
            channel = (g * taps + t) * 2
            tap = np.array([t % kernel - half, t // kernel - half], dtype=np.float64).reshape(1, 2, 1, 1)
            rows.append(ops.take(offsets, (slice(None), slice(channel, channel + 2))) + Tensor(base + tap))
        coords = ops.concat(rows, axis=2)
        part = ops.take(padded, (slice(None), slice(g * span, (g + 1) * span)))
        sampled = ops.bilinear_sample(part, coords)
        modulation = ops.reshape(ops.take(mask, (slice(None), slice(g * taps, (g + 1) * taps))), (B, 1, taps * H, W))
        columns.append(ops.reshape(sampled * modulation, (B, span, taps, H, W)))
    stacked = ops.reshape(ops.concat(columns, axis=1), (B, F * taps, H, W))
    flat_weight = ops.reshape(weight, (weight.shape[0], F * taps, 1, 1))
    return ops.conv2d(stacked, flat_weight, bias)


def flow_guided_dcn(m_sup, m_warped, r_k, flow, params, config: ModelConfig):
    """
    Align the unwarped supporting features to the reference.

    Offsets are the flow plus a learned residual conditioned on the reference
    and warped features, clipped to the configured limit; the mask is a sigmoid.
    """
    m_sup = m_sup.m if isinstance(m_sup, FrameFeatures) else m_sup
    flow = flow.flow if isinstance(flow, FlowField) else flow
    if not (m_sup.shape == m_warped.shape == r_k.shape):
        raise DimensionError(f"flow_guided_dcn: {m_sup.shape}, {m_warped.shape}, {r_k.shape} must match")
    taps = config.offset_groups * config.deform_kernel ** 2
    trunk = ops.relu(conv(params, "recon.align.offset.conv1", ops.concat([r_k, m_warped], axis=1)))
    residual = conv(params, "recon.align.offset.conv2", trunk)
    limit = config.offset_limit
    offsets = ops.clip(residual + ops.concat([flow] * taps, axis=1), -limit, limit)
    mask = ops.sigmoid(conv(params, "recon.align.mask.conv2", trunk))
    return deform_conv(
        m_sup, offsets, mask,
        params["recon.align.dcn.weight"], params["recon.align.dcn.bias"],
        config.offset_groups, config.deform_kernel,
    )


def fuse(aligned_prev, r_k, aligned_next, params, config: ModelConfig):
    if not (aligned_prev.shape == r_k.shape == aligned_next.shape):
        raise DimensionError(f"fuse: {aligned_prev.shape}, {r_k.shape}, {aligned_next.shape} must match")
    h = conv(params, "recon.fuse.proj", ops.concat([aligned_prev, r_k, aligned_next], axis=1))
    for index in range(config.fusion_blocks):
        h = residual_block(params, f"recon.fuse.block{index}", h)
    return h


def heads(r_next, ref_pre, params):
    """Returns (s [C,p,p], u [1,p,p]); s is a residual over ``ref_pre`` and u is log variance."""
    s = conv(params, "recon.head_s.conv2", ops.relu(conv(params, "recon.head_s.conv1", r_next)))
    u = conv(params, "recon.head_u.conv2", ops.relu(conv(params, "recon.head_u.conv1", r_next)))
    s = ops.reshape(s, s.shape[1:]) + ref_pre
    return s, ops.reshape(u, u.shape[1:])


def run_cascade(triplet, flows, max_iters, params, config: ModelConfig, policy: ExitPolicy) -> List[IterationOutput]:
    """
    Chain reconstruction blocks; block k consumes flow iterate f_k and r_{k-1}.

    A gate decision is taken after every block; the loop stops at the first
    exit or after ``max_iters`` blocks.
    """
    if max_iters < 1:
        raise ParameterError(f"max_iters must be >= 1, got {max_iters}")
    for sequence in flows:
        if len(sequence) < max_iters:
            raise ParameterError(f"run_cascade: {len(sequence)} flow iterates for {max_iters} iterations")
    r = extract_restoration_features(triplet.ref_noisy, triplet.ref_pre, params).m
    supports = [
        extract_restoration_features(noisy, pre, params).m
        for noisy, pre in zip(triplet.sup_noisy, triplet.sup_pre)
    ]
    cap = policy.model_copy(update={"max_iters": min(max_iters, policy.max_iters)})

    outputs = []
    for k in range(1, max_iters + 1):
        used = [sequence[k - 1] for sequence in flows]
        aligned = []
        for m_sup, field in zip(supports, used):
            full = upsample_flow(field.flow)
            aligned.append(flow_guided_dcn(m_sup, warp_features(m_sup, full), r, full, params, config))
        r = fuse(aligned[0], r, aligned[1], params, config)
        s, u = heads(r, triplet.ref_pre, params)
        decision = decide_exit(u, cap, k)
        outputs.append(IterationOutput(r_next=r, s=s, u=u, flows=used, decision=decision))
        if decision.exit:
            break
    return outputs
