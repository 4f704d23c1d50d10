"""
Error against uncertainty scatter plots for bench runs.

One point per patch: mean predicted variance on x, mean absolute error on y,
coloured by the noise level of the sequence the patch came from.
"""
from pathlib import Path
import logging

import numpy as np

from autodiff.exceptions import ParameterError

from .metrics import format_metric

logger = logging.getLogger(__name__)


def scatter_points(reports):
    """(sigma^2, |error|, noise_sigma) per patch that carries an error."""
    points = []
    for report in reports:
        for patch in report.patches:
            if patch.mean_abs_error is not None:
                points.append((patch.mean_uncertainty, patch.mean_abs_error, report.noise_sigma))
    return points


def emit_scatter(reports, path, pearson_r=None):
    points = scatter_points(reports)
    if not points:
        raise ParameterError("scatter plot needs at least one patch with a measured error")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4), constrained_layout=True)
    levels = sorted({p[2] for p in points}, key=lambda v: (v is None, v or 0.0))
    for level in levels:
        xs = np.array([p[0] for p in points if p[2] == level])
        ys = np.array([p[1] for p in points if p[2] == level])
        ax.scatter(xs, ys, s=8, alpha=0.7, label=f"sigma {format_metric(level) or 'n/a'}")
    ax.set_xlabel("mean predicted variance")
    ax.set_ylabel("mean absolute error")
    if pearson_r is not None:
        ax.set_title(f"r = {pearson_r:.3f}")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    logger.info(f"scatter of {len(points)} patches written to {path}")
    return path
