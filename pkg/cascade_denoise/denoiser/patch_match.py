"""
Patch matching between the reference frame and its two neighbours.

Similarity is the normalized cross-correlation without mean subtraction:
    R = sum(T * W) / sqrt(sum(T**2) * sum(W**2))
evaluated on the channel-mean projection of the pre-denoised frames.
"""
from dataclasses import dataclass
from typing import Tuple
import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from autodiff import ops
from autodiff.exceptions import DegenerateMatchError, DimensionError, ParameterError
from autodiff.tensor import Tensor

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12


@dataclass
class MatchScoreMap:
    scores: Tensor
    argmax: Tuple[int, int]
    displacement: Tuple[int, int]
    window_origin: Tuple[int, int]


@dataclass
class PatchTriplet:
    ref_noisy: Tensor
    ref_pre: Tensor
    sup_noisy: Tuple[Tensor, Tensor]
    sup_pre: Tuple[Tensor, Tensor]
    ref_origin: Tuple[int, int]
    sup_origins: Tuple[Tuple[int, int], Tuple[int, int]]
    t: int = 0

    @property
    def patch_size(self):
        return self.ref_noisy.shape[-1]

    @property
    def displacements(self):
        x, y = self.ref_origin
        return tuple((sx - x, sy - y) for sx, sy in self.sup_origins)


def _values(x):
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def ncc_score(template, window):
    t, w = _values(template), _values(window)
    if t.shape != w.shape:
        raise DimensionError(f"ncc_score: template {t.shape} and window {w.shape} differ")
    energy_t, energy_w = np.sum(t * t), np.sum(w * w)
    if energy_t == 0 or energy_w == 0:
        raise DegenerateMatchError("ncc_score: zero-energy operand")
    return float(np.sum(t * w) / np.sqrt(energy_t * energy_w))


def match_patch(ref_patch, sup_frame, center, search_radius):
    """
    Exhaustive NCC scan of ``sup_frame`` placements within ``center`` ± radius.

    ``center`` is the (x, y) top-left origin of the reference patch. Ties are
    broken by smallest displacement, then row-major order.
    """
    template, frame = _values(ref_patch), _values(sup_frame)
    if template.ndim == 2:
        template = template[None]
    if frame.ndim == 2:
        frame = frame[None]
    p = template.shape[-1]
    if template.shape[-2] != p or frame.shape[0] != template.shape[0]:
        raise DimensionError(f"match_patch: template {template.shape} incompatible with frame {frame.shape}")
    H, W = frame.shape[-2:]
    if search_radius < 0:
        raise ParameterError(f"search_radius must be >= 0, got {search_radius}")
    cx, cy = center
    x0, x1 = max(cx - search_radius, 0), min(cx + search_radius, W - p)
    y0, y1 = max(cy - search_radius, 0), min(cy + search_radius, H - p)
    if x0 > x1 or y0 > y1:
        raise ParameterError(f"match_patch: empty search window around ({cx}, {cy}) in {W}x{H} frame")

    energy_t = np.sum(template * template)
    if energy_t == 0:
        raise DegenerateMatchError("match_patch: zero-energy template")
    region = frame[:, y0:y1 + p, x0:x1 + p]
    windows = sliding_window_view(region, (p, p), axis=(1, 2))
    numerator = np.einsum("cyxij,cij->yx", windows, template)
    energy_w = np.einsum("cyxij,cyxij->yx", windows, windows)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(energy_w > 0, numerator / np.sqrt(energy_t * energy_w), 0.0)

    ys, xs = np.nonzero(scores >= scores.max() - TIE_TOLERANCE)
    dx, dy = xs + x0 - cx, ys + y0 - cy
    best = np.lexsort((xs, ys, dx * dx + dy * dy))[0]
    bx, by = int(xs[best] + x0), int(ys[best] + y0)
    return MatchScoreMap(
        scores=Tensor(scores),
        argmax=(bx, by),
        displacement=(bx - cx, by - cy),
        window_origin=(x0, y0),
    )


def tile_origins(extent, patch_size, stride, cover_edges=False):
    origins = list(range(0, extent - patch_size + 1, stride))
    if cover_edges and origins[-1] != extent - patch_size:
        origins.append(extent - patch_size)
    return origins


def _grey(frame):
    return frame.data.mean(axis=0)


def assemble_triplets(frames_noisy, frames_pre, t, patch_size, stride, search_radius, match=True, cover_edges=False):
    """
    Tile frame ``t`` and pair every tile with its best match in frames t-1 and t+1.

    Crops are taken with differentiable indexing, so pre-denoised patches keep
    their link to the pre-denoiser when a tape is active.
    """
    if t - 1 < 0 or t + 1 >= len(frames_noisy.frames):
        raise ParameterError(f"frame {t} needs both neighbours, sequence has {len(frames_noisy.frames)} frames")
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    _, H, W = frames_noisy.frames[t].shape
    if H < patch_size or W < patch_size:
        raise ParameterError(f"frame {W}x{H} smaller than patch size {patch_size}")

    p = patch_size
    neighbours = (t - 1, t + 1)
    grey_pre = {i: _grey(frames_pre.frames[i]) for i in (t,) + neighbours}

    def cut(frame, x, y):
        return ops.take(frame, (slice(None), slice(y, y + p), slice(x, x + p)))

    triplets = []
    for y in tile_origins(H, p, stride, cover_edges):
        for x in tile_origins(W, p, stride, cover_edges):
            template = grey_pre[t][y:y + p, x:x + p]
            origins = []
            for i in neighbours:
                if not match:
                    origins.append((x, y))
                    continue
                try:
                    origins.append(match_patch(template, grey_pre[i], (x, y), search_radius).argmax)
                except DegenerateMatchError:
                    logger.warning(f"degenerate match at ({x}, {y}) frame {t}->{i}, using zero displacement")
                    origins.append((x, y))
            triplets.append(PatchTriplet(
                ref_noisy=cut(frames_noisy.frames[t], x, y),
                ref_pre=cut(frames_pre.frames[t], x, y),
                sup_noisy=tuple(cut(frames_noisy.frames[i], *o) for i, o in zip(neighbours, origins)),
                sup_pre=tuple(cut(frames_pre.frames[i], *o) for i, o in zip(neighbours, origins)),
                ref_origin=(x, y),
                sup_origins=tuple(origins),
                t=t,
            ))
    logger.debug(f"frame {t}: assembled {len(triplets)} triplets")
    return triplets
