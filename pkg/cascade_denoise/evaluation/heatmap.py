from pathlib import Path
import logging

import numpy as np

from autodiff.exceptions import ParameterError
from autodiff.tensor import Tensor
from frames.netpbm import write_frame

logger = logging.getLogger(__name__)


def heatmap_image(values, size=None):
    """
    Min-max normalise a 2D grid to [0, 1] (a constant grid maps to 0.5) and
    upsample it nearest-neighbour to ``size`` = (H, W).
    """
    grid = np.asarray(values, dtype=np.float64)
    if grid.ndim != 2 or grid.size == 0:
        raise ParameterError(f"heat map needs a nonempty 2D grid, got shape {grid.shape}")
    low, high = grid.min(), grid.max()
    norm = np.full(grid.shape, 0.5) if high == low else (grid - low) / (high - low)
    if size is None:
        return norm
    H, W = size
    rows = np.arange(H) * grid.shape[0] // H
    cols = np.arange(W) * grid.shape[1] // W
    return norm[rows[:, None], cols[None, :]]


def emit_heatmap(values, path, size=None):
    image = heatmap_image(values, size)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_frame(path, Tensor(image[None]))
    logger.info(f"heat map {image.shape[1]}x{image.shape[0]} written to {path}")
    return path
