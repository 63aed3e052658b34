"""Gaussian-weighted moving average."""

from __future__ import annotations

import numpy as np

from clothoid_arm.errors import ConfigError


def gaussian_kernel(window: int) -> np.ndarray:
    """Normalized Gaussian weights over ``window`` taps with sigma = window / 5."""
    if window < 1 or window % 2 == 0:
        raise ConfigError(f"smoothing window must be a positive odd integer, got {window}")
    half = window // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    sigma = window / 5.0
    w = np.exp(-0.5 * (offsets / sigma) ** 2)
    return w / w.sum()


def gaussian_smooth(series, window: int = 9) -> np.ndarray:
    """Smooth along the first axis; near the ends the kernel is renormalized over valid taps."""
    kernel = gaussian_kernel(window)
    x = np.asarray(series, dtype=float)
    n = x.shape[0]
    half = window // 2
    out = np.empty_like(x)
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        w = kernel[lo - i + half : hi - i + half]
        out[i] = np.tensordot(w, x[lo:hi], axes=(0, 0)) / w.sum()
    return out
