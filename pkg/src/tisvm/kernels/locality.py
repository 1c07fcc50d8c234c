"""Multi-layer locality kernels.

Layer 1 sums ``x * y`` over every window of ``k1 + 1`` pixels (squares for
images), adds one and raises to ``d1``.  Each further layer does the same over
windows of the previous layer's output map, and the top layer sums the whole
map.  Because layer 1 depends on ``x`` and ``y`` only through the pixelwise
product, everything here is written as a function of that product map.
"""
from __future__ import annotations

import numpy as np

from .spec import Locality


def _window_sums(a, width, padding, stride, ndim):
    """Sliding-window sums over the last ``ndim`` axes of ``a``."""
    if padding:
        pad = [(0, 0)] * (a.ndim - ndim) + [(padding, padding)] * ndim
        a = np.pad(a, pad)
    for axis in range(a.ndim - ndim, a.ndim):
        n = a.shape[axis]
        if width > n:
            raise ValueError(
                f"receptive field overflow: window of {width} exceeds padded size {n}")
        c = np.cumsum(a, axis=axis)
        zero = np.zeros_like(np.take(c, [0], axis=axis))
        c = np.concatenate([zero, c], axis=axis)
        hi = np.take(c, np.arange(width, n + 1, stride), axis=axis)
        lo = np.take(c, np.arange(0, n - width + 1, stride), axis=axis)
        a = hi - lo
    return a


def _gamma(layer, n_terms):
    return 1.0 / n_terms if layer.gamma is None else float(layer.gamma)


def layer_maps(products, locality, ndim=None):
    """All intermediate maps for a product map (or a stack of them).

    Returns a list whose entry ``l`` is the output of layer ``l + 1``; the last
    entry is the kernel value (shape = leading batch shape).
    """
    if not isinstance(locality, Locality):
        locality = Locality(tuple(locality))
    a = np.asarray(products, dtype=np.float64)
    ndim = a.ndim if ndim is None else ndim
    if ndim not in (1, 2):
        raise ValueError("locality kernels act on 1-D sequences or 2-D images")
    maps = []
    for layer in locality.layers:
        if layer.is_top:
            n_terms = int(np.prod(a.shape[a.ndim - ndim:]))
            s = a.reshape(a.shape[:a.ndim - ndim] + (-1,)).sum(axis=-1)
            a = (1.0 + _gamma(layer, n_terms) * s) ** int(layer.degree)
        else:
            width = layer.k + 1
            s = _window_sums(a, width, layer.padding, layer.stride, ndim)
            a = (1.0 + _gamma(layer, width ** ndim) * s) ** int(layer.degree)
        maps.append(a)
    return maps


def locality_from_products(products, locality, ndim=None):
    """Kernel value(s) from pixelwise product map(s), keeping every layer map."""
    return layer_maps(products, locality, ndim)[-1]


def _recursive_value(prod, layers, level, index, ndim):
    """Output of layer ``level`` at window start ``index`` without storing lower maps."""
    if level < 0:
        if any(i < 0 or i >= n for i, n in zip(index, prod.shape)):
            return 0.0
        return float(prod[index])
    layer = layers[level]
    lower_shape = _map_shape(prod.shape, layers[:level])
    if layer.is_top:
        starts = np.ndindex(*lower_shape)
        n_terms = int(np.prod(lower_shape))
        s = sum(_recursive_value(prod, layers, level - 1, idx, ndim) for idx in starts)
    else:
        width = layer.k + 1
        origin = [i * layer.stride - layer.padding for i in index]
        s = 0.0
        for offs in np.ndindex(*([width] * ndim)):
            pos = tuple(o + d for o, d in zip(origin, offs))
            if any(p < 0 or p >= n for p, n in zip(pos, lower_shape)):
                continue
            s += _recursive_value(prod, layers, level - 1, pos, ndim)
        n_terms = width ** ndim
    return (1.0 + _gamma(layer, n_terms) * s) ** int(layer.degree)


def _map_shape(shape, layers):
    shape = tuple(shape)
    for layer in layers:
        if layer.is_top:
            return ()
        width = layer.k + 1
        shape = tuple((n + 2 * layer.padding - width) // layer.stride + 1 for n in shape)
        if min(shape) < 1:
            raise ValueError("receptive field overflow")
    return shape


def locality_kernel(x, y, layers, low_memory=False):
    """Evaluate the locality kernel between two 1-D sequences or two 2-D images.

    Parameters
    ----------
    x, y : array_like
        Same shape, 1-D or 2-D.
    layers : Locality or sequence of LocalityLayer
    low_memory : bool
        Recompute lower-layer values on demand instead of keeping whole layer
        maps.  Same result; time grows exponentially with depth.
    """
    locality = layers if isinstance(layers, Locality) else Locality(tuple(layers))
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    prod = x * y
    if low_memory:
        _map_shape(prod.shape, locality.layers)
        return _recursive_value(prod, locality.layers, len(locality.layers) - 1, (), prod.ndim)
    return float(locality_from_products(prod, locality))
