"""
Synthetic noisy/clean video sequences.

A sequence is a textured base frame translated by ``k * motion`` in frame k,
with clamp-to-edge fill. Noise is added separately so the clean frames stay
available to the caller. Both steps are pure functions of their arguments.
"""
from dataclasses import dataclass, replace
from typing import List, Optional
import logging

import numpy as np

from autodiff import ops
from autodiff.exceptions import ParameterError
from autodiff.tensor import Tensor

from .schemas import GaussianNoise, PoissonGaussianNoise, SigmaMapNoise, SuiteSpec

logger = logging.getLogger(__name__)

TEXTURES = ("gradient", "checker", "perlin")


@dataclass
class VideoSequence:
    frames: List[Tensor]
    frame_rate: float = 25.0
    noise_level: Optional[List[Optional[float]]] = None
    motion: tuple = (0.0, 0.0)
    name: str = ""

    def __len__(self):
        return len(self.frames)

    @property
    def shape(self):
        return self.frames[0].shape


def _gradient(rng, height, width):
    angle = rng.uniform(0, 2 * np.pi)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    ramp = np.cos(angle) * xs + np.sin(angle) * ys
    span = ramp.max() - ramp.min()
    return 0.1 + 0.8 * (ramp - ramp.min()) / (span if span > 0 else 1.0)


def _checker(rng, height, width):
    block = int(rng.integers(4, 9))
    dy, dx = rng.integers(0, block, size=2)
    ys, xs = np.mgrid[0:height, 0:width]
    parity = ((ys + dy) // block + (xs + dx) // block) % 2
    return np.where(parity == 0, 0.2, 0.8).astype(np.float64)


def _perlin(rng, height, width):
    """Value noise: sum of bilinearly upsampled random lattices at doubling frequencies."""
    total = np.zeros((height, width))
    amplitude = 1.0
    for cells in (4, 8, 16):
        lattice = rng.uniform(0, 1, (1, 1, cells + 1, cells + 1))
        coords = ops.grid(height, width)
        coords[:, 0] *= cells / max(width - 1, 1)
        coords[:, 1] *= cells / max(height - 1, 1)
        total += amplitude * ops.bilinear_sample(Tensor(lattice), Tensor(coords)).data[0, 0]
        amplitude *= 0.5
    span = total.max() - total.min()
    return 0.1 + 0.8 * (total - total.min()) / (span if span > 0 else 1.0)


_GENERATORS = {"gradient": _gradient, "checker": _checker, "perlin": _perlin}


def synth_sequence(seed, n_frames, size, motion, texture="perlin", channels=1):
    if n_frames < 3:
        raise ParameterError(f"n_frames must be >= 3, got {n_frames}")
    if texture not in _GENERATORS:
        raise ParameterError(f"unknown texture {texture!r}, expected one of {TEXTURES}")
    height, width = size
    dx, dy = float(motion[0]), float(motion[1])
    if abs(dx) >= width or abs(dy) >= height:
        raise ParameterError(f"motion ({dx}, {dy}) exceeds frame size {width}x{height}")

    rng = np.random.default_rng(seed)
    plane = _GENERATORS[texture](rng, height, width)
    gains = np.ones(channels) if channels == 1 else rng.uniform(0.6, 1.0, channels)
    base = Tensor((gains[:, None, None] * plane)[None])

    frames = []
    for k in range(n_frames):
        coords = ops.grid(height, width)
        coords[:, 0] -= k * dx
        coords[:, 1] -= k * dy
        frames.append(Tensor(ops.bilinear_sample(base, Tensor(coords)).data[0]))
    return VideoSequence(frames=frames, motion=(dx, dy), name=f"{texture}-{seed}")


def add_noise(sequence, model, seed):
    """Return a new sequence with noise drawn from ``model``, clipped to [0, 1]."""
    rng = np.random.default_rng(seed)
    noisy, levels = [], []
    for frame in sequence.frames:
        clean = frame.data
        if isinstance(model, GaussianNoise):
            values = clean + model.sigma * rng.standard_normal(clean.shape)
            levels.append(model.sigma)
        elif isinstance(model, PoissonGaussianNoise):
            values = model.a * rng.poisson(clean / model.a) if model.a > 0 else clean.copy()
            values = values + np.sqrt(model.b) * rng.standard_normal(clean.shape)
            levels.append(float(np.sqrt(model.a * clean.mean() + model.b)))
        elif isinstance(model, SigmaMapNoise):
            sigma = np.broadcast_to(np.asarray(model.sigma_map, dtype=np.float64), clean.shape[-2:])
            if np.any(sigma < 0):
                raise ParameterError("sigma map must be non-negative")
            values = clean + sigma * rng.standard_normal(clean.shape)
            levels.append(float(sigma.mean()))
        else:
            raise ParameterError(f"unsupported noise model {model!r}")
        noisy.append(Tensor(np.clip(values, 0.0, 1.0)))
    return replace(sequence, frames=noisy, noise_level=levels)


def generate_suite(spec: SuiteSpec):
    """Yield (clean, noisy) pairs with integer motion |d| <= max_shift, cycling textures and sigmas."""
    rng = np.random.default_rng(spec.seed)
    for index in range(spec.n_sequences):
        texture = spec.textures[index % len(spec.textures)]
        sigma = spec.noise_sigmas[index % len(spec.noise_sigmas)]
        motion = tuple(int(v) for v in rng.integers(-spec.max_shift, spec.max_shift + 1, size=2))
        seed = int(rng.integers(0, 2**31 - 1))
        clean = synth_sequence(seed, spec.n_frames, spec.size, motion, texture, spec.channels)
        noisy = add_noise(clean, GaussianNoise(sigma=sigma), seed + 1)
        noisy.name = clean.name = f"{texture}-s{sigma:g}-{index:03d}"
        logger.debug(f"suite sequence {clean.name} motion {motion}")
        yield clean, noisy
