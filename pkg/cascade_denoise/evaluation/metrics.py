"""Image quality and correlation metrics on float frames in [0, 1]."""
import logging
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from autodiff.exceptions import DimensionError, ParameterError, UndefinedCorrelationError
from autodiff.tensor import Tensor

logger = logging.getLogger(__name__)

SSIM_WINDOW = 8
K1, K2 = 0.01, 0.03


def _values(x):
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def psnr(a, b, peak=1.0):
    """10*log10(peak**2 / MSE); identical inputs give +inf."""
    a, b = _values(a), _values(b)
    if a.shape != b.shape:
        raise DimensionError(f"psnr: shapes {a.shape} and {b.shape} differ")
    if peak <= 0:
        raise ParameterError(f"peak must be > 0, got {peak}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _grey(x):
    x = _values(x)
    return x.mean(axis=0) if x.ndim == 3 else x


def ssim(a, b, window=SSIM_WINDOW, peak=1.0):
    """
    Mean SSIM over every 8x8 window (stride 1) of the channel-mean projection.

    Local statistics are population (1/N) moments; C1 = (K1*peak)**2, C2 = (K2*peak)**2.
    """
    a, b = _grey(a), _grey(b)
    if a.shape != b.shape:
        raise DimensionError(f"ssim: shapes {a.shape} and {b.shape} differ")
    if a.shape[0] < window or a.shape[1] < window:
        raise DimensionError(f"ssim: image {a.shape} smaller than {window}x{window} window")
    c1, c2 = (K1 * peak) ** 2, (K2 * peak) ** 2
    wa = sliding_window_view(a, (window, window))
    wb = sliding_window_view(b, (window, window))
    mu_a, mu_b = wa.mean(axis=(2, 3)), wb.mean(axis=(2, 3))
    var_a = (wa * wa).mean(axis=(2, 3)) - mu_a ** 2
    var_b = (wb * wb).mean(axis=(2, 3)) - mu_b ** 2
    cov = (wa * wb).mean(axis=(2, 3)) - mu_a * mu_b
    local = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))
    return float(local.mean())


def pearson(x, y):
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"pearson: inputs must be equal-length sequences, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ParameterError("pearson needs at least two points")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(np.sum(dx * dx)), float(np.sum(dy * dy))
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("pearson: zero variance input")
    return float(np.sum(dx * dy) / math.sqrt(sxx * syy))


def format_metric(value):
    """CSV cell for a metric; +inf is written as 'inf'."""
    if value is None:
        return ""
    return "inf" if math.isinf(value) and value > 0 else repr(float(value))
