"""Scalar base kernels on pairs of images."""
from __future__ import annotations

import numpy as np


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("kernel inputs contain NaN or Inf")
    return x, y


def linear_kernel(x, y, normalized=True):
    """``<x, y>``, or ``<x, y> / m`` when ``normalized``."""
    x, y = _pair(x, y)
    dot = float(np.dot(x.ravel(), y.ravel()))
    return dot / x.size if normalized else dot


def poly_kernel(x, y, gamma, d):
    """``(1 + gamma <x, y>) ** d``."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if int(d) != d or d < 1:
        raise ValueError("degree must be a positive integer")
    x, y = _pair(x, y)
    return (1.0 + gamma * float(np.dot(x.ravel(), y.ravel()))) ** int(d)
