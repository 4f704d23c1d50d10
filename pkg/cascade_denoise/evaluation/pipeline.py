"""
Full-frame denoising by tiling, per-patch cascades and stitching.

Tiles are placed with ``stride`` (the patch size by default) and the last
row/column is anchored to the frame edge; every output pixel is taken from
the first tile covering it, so the frame is covered exactly once.
"""
from dataclasses import dataclass, field
from typing import List, Optional
import logging

import numpy as np

from autodiff.exceptions import ParameterError
from autodiff.tensor import Tensor
from denoiser.patch_match import assemble_triplets
from denoiser.schemas import ExitPolicy
from denoiser.uncertainty import GateDecision, compute_savings
from frames.synth import VideoSequence

logger = logging.getLogger(__name__)


@dataclass
class PatchResult:
    frame: int
    origin: tuple
    decision: GateDecision
    mean_abs_error: Optional[float] = None
    iteration_errors: List[float] = field(default_factory=list)

    @property
    def exit_iteration(self):
        return self.decision.iteration

    @property
    def mean_uncertainty(self):
        return self.decision.mean_uncertainty


@dataclass
class DenoiseResult:
    sequence: VideoSequence
    patches: List[PatchResult]
    max_iters: int

    @property
    def mean_iterations(self):
        return float(np.mean([p.exit_iteration for p in self.patches]))

    @property
    def savings(self):
        return compute_savings([p.decision for p in self.patches], self.max_iters)


def patch_grid(patches, attribute):
    """Per-patch values of one frame laid out on the tile grid."""
    rows = sorted({p.origin[1] for p in patches})
    cols = sorted({p.origin[0] for p in patches})
    values = np.zeros((len(rows), len(cols)))
    for p in patches:
        values[rows.index(p.origin[1]), cols.index(p.origin[0])] = getattr(p, attribute)
    return values


def window(sequence, t):
    """Frames t-1, t, t+1 with the boundary frame standing in for a missing neighbour."""
    last = len(sequence.frames) - 1
    return VideoSequence(frames=[sequence.frames[i] for i in (max(t - 1, 0), t, min(t + 1, last))])


def denoise_video(noisy: VideoSequence, model, policy: ExitPolicy, stride=None, clean: VideoSequence = None,
                  match=True, max_iters=None, track_iterations=False):
    if len(noisy.frames) < 3:
        raise ParameterError(f"denoise_video needs at least 3 frames, got {len(noisy.frames)}")
    p = model.config.patch_size
    stride = stride or p
    n = policy.max_iters if max_iters is None else max_iters
    pre = VideoSequence(frames=[model.predenoise_frame(frame) for frame in noisy.frames])

    frames, patches = [], []
    for t in range(len(noisy.frames)):
        triplets = assemble_triplets(window(noisy, t), window(pre, t), 1, p, stride,
                                     model.config.search_radius, match=match, cover_edges=True)
        out = np.zeros(noisy.frames[t].shape)
        covered = np.zeros(out.shape[1:], dtype=bool)
        target = clean.frames[t].data if clean is not None else None
        for triplet in triplets:
            outputs, _ = model.forward(triplet, policy, n)
            final = outputs[-1]
            x, y = triplet.ref_origin
            region = (slice(y, y + p), slice(x, x + p))
            fresh = ~covered[region]
            out[(slice(None),) + region][:, fresh] = final.s.data[:, fresh]
            covered[region] = True

            result = PatchResult(frame=t, origin=(x, y), decision=final.decision)
            if target is not None:
                patch = target[(slice(None),) + region]
                result.mean_abs_error = float(np.abs(final.s.data - patch).mean())
                if track_iterations:
                    result.iteration_errors = [float(np.mean((o.s.data - patch) ** 2)) for o in outputs]
            patches.append(result)
        frames.append(Tensor(out))
        done = [r for r in patches if r.frame == t]
        logger.info(f"frame {t}: {len(done)} patches, mean exit iteration "
                    f"{np.mean([r.exit_iteration for r in done]):.2f}")

    result = VideoSequence(frames=frames, frame_rate=noisy.frame_rate, name=noisy.name)
    return DenoiseResult(sequence=result, patches=patches, max_iters=n)
