"""Best-fit and average-fit kernels over transformation groups.

For dot-product bases everything reduces to the table of dot products
``<T x, y>`` over the group, followed by the base map (``/m`` or
``(1 + gamma t) ** d``).  Best-fit applies the base map to the largest dot
product; average-fit averages the mapped values.  Translation tables come
from frequency-domain circular cross-correlation; :func:`shifted_dots` with
``method="exhaustive"`` enumerates shifts directly and is the reference the
FFT path is tested against.
"""
from __future__ import annotations

import numpy as np

from ..transforms import as_image, enumerate_group, rotate, translate
from .locality import locality_from_products
from .spec import KernelSpec, Linear, Locality, Polynomial

_ROW_CHUNK = 8


def shifted_dots(x, y, method="fft"):
    """Table ``D[r, s] = <translate(x, r, s), y>`` for every cyclic shift."""
    x = as_image(x, "x")
    y = as_image(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if method == "fft":
        return _correlate(np.fft.rfft2(x)[None], np.fft.rfft2(y)[None], x.shape)[0, 0]
    if method == "exhaustive":
        m1, m2 = x.shape
        out = np.empty((m1, m2))
        for r in range(m1):
            for s in range(m2):
                out[r, s] = np.sum(translate(x, r, s) * y)
        return out
    raise ValueError(f"unknown method {method!r}")


def max_shifted_dot(x, y, method="fft"):
    return float(shifted_dots(x, y, method).max())


def _correlate(fa, fb, shape):
    """Circular cross-correlations of every row of ``fa`` with every row of ``fb``.

    Returns ``(len(fa), len(fb), m1, m2)`` with ``out[i, j, r, s] = <T_rs a_i, b_j>``.
    """
    return np.fft.irfft2(fa[:, None] * np.conj(fb)[None, :], s=shape)


def _reduce_init(mode, shape):
    return np.full(shape, -np.inf) if mode == "best" else np.zeros(shape)


def _dot_block(spec, A, B):
    """Kernel block for linear/polynomial bases, ``A`` transformed, ``B`` fixed."""
    base = spec.base
    m = A.shape[1] * A.shape[2]
    group = spec.effective_group
    mode = spec.invariance
    if group.kind == "identity":
        dots = A.reshape(len(A), -1) @ B.reshape(len(B), -1).T
        return base.apply(dots, m)

    acc = _reduce_init(mode, (len(A), len(B)))
    count = 0
    for rotated, offsets in _group_stages(group, A):
        if offsets is None:
            tables = (rotated.reshape(len(A), -1) @ B.reshape(len(B), -1).T)[..., None]
        else:
            tables = _translation_tables(rotated, B, offsets)
        if mode == "best":
            np.maximum(acc, tables.max(axis=-1), out=acc)
        else:
            acc += base.apply(tables, m).sum(axis=-1)
        count += tables.shape[-1]
    return base.apply(acc, m) if mode == "best" else acc / count


def _translation_tables(A, B, offsets):
    """``(len(A), len(B), len(offsets))`` shifted dot products via FFT."""
    shape = A.shape[1:]
    fb = np.fft.rfft2(B)
    r_idx, s_idx = offsets
    out = np.empty((len(A), len(B), len(r_idx)))
    for start in range(0, len(A), _ROW_CHUNK):
        fa = np.fft.rfft2(A[start:start + _ROW_CHUNK])
        corr = _correlate(fa, fb, shape)
        out[start:start + len(fa)] = corr[..., r_idx, s_idx]
    return out


def _group_stages(group, A):
    """Yield ``(transformed A, translation offsets or None)`` covering every group element.

    Rotations are materialized one angle at a time; translations stay implicit
    so they can be handled by correlation.
    """
    dims = A.shape[1:]
    rotations, translations = _split_factors(group)
    offsets = None
    if translations is not None:
        pairs = translations.translation_offsets(dims)
        offsets = (np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))
    if rotations is None:
        yield A, offsets
        return
    for theta in rotations.angles():
        yield rotate(A, theta, rotations.interp), offsets


def _split_factors(group):
    if group.kind == "translations":
        return None, group
    if group.kind == "rotations":
        return group, None
    if group.kind == "product":
        kinds = [f.kind for f in group.factors]
        if kinds == ["rotations", "translations"]:
            return group.factors[0], group.factors[1]
    raise ValueError(f"no fast path for group {group.to_dict()}")


def _has_fast_path(group):
    if group.kind == "identity":
        return True
    try:
        _split_factors(group)
    except ValueError:
        return False
    return True


_LOCALITY_BUDGET = 1 << 22  # float64 elements per product batch


def _locality_values(products, locality):
    # single-row images are 1-D sequences: windows run along the row only
    if products.shape[-2] == 1:
        return locality_from_products(products[..., 0, :], locality, ndim=1)
    return locality_from_products(products, locality, ndim=2)


def _locality_block(spec, A, B):
    locality = spec.base
    group = spec.effective_group
    mode = spec.invariance
    elements = enumerate_group(group, A.shape[1:])
    m = A.shape[1] * A.shape[2]
    step = max(1, _LOCALITY_BUDGET // (len(elements) * m))
    out = np.empty((len(A), len(B)))
    for i in range(len(A)):
        transformed = np.stack([t.apply(A[i]) for t in elements])
        for start in range(0, len(B), step):
            chunk = B[start:start + step]
            # (|G|, len(chunk), m1, m2) pixelwise products
            values = _locality_values(transformed[:, None] * chunk[None], locality)
            out[i, start:start + len(chunk)] = values.max(axis=0) if mode == "best" else values.mean(axis=0)
    return out


def exhaustive_block(spec, A, B):
    """Kernel block by explicit enumeration of every group element (reference path)."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    m = A.shape[1] * A.shape[2]
    elements = enumerate_group(spec.effective_group, A.shape[1:])
    values = []
    for t in elements:
        TA = np.stack([t.apply(a) for a in A])
        if isinstance(spec.base, Locality):
            values.append(_locality_values(TA[:, None] * B[None], spec.base))
        else:
            values.append(TA.reshape(len(A), -1) @ B.reshape(len(B), -1).T)
    values = np.stack(values, axis=-1)
    if isinstance(spec.base, Locality):
        return values.max(axis=-1) if spec.invariance == "best" else values.mean(axis=-1)
    if spec.invariance == "average":
        return spec.base.apply(values, m).mean(axis=-1)
    return spec.base.apply(values.max(axis=-1), m)


def kernel_block(spec, A, B, method="fast"):
    """Matrix ``K[i, j] = k(A[i], B[j])`` for stacks of same-shaped images.

    The first argument is the transformed one: ``k(x, y) = reduce_T base(T x, y)``.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[1:] != B.shape[1:]:
        raise ValueError(f"dimension mismatch: {A.shape[1:]} vs {B.shape[1:]}")
    if method == "exhaustive":
        return exhaustive_block(spec, A, B)
    if method != "fast":
        raise ValueError(f"unknown method {method!r}")
    if isinstance(spec.base, Locality):
        return _locality_block(spec, A, B)
    if not _has_fast_path(spec.effective_group):
        return exhaustive_block(spec, A, B)
    return _dot_block(spec, A, B)


def kernel_value(spec, x, y, method="fast"):
    x = as_image(x, "x")
    y = as_image(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(kernel_block(spec, x[None], y[None], method)[0, 0])


def _base_spec(base, normalized):
    if base is None:
        return Linear(normalized)
    if isinstance(base, (Linear, Polynomial, Locality)):
        return base
    raise TypeError(f"unsupported base kernel {base!r}")


def best_fit_kernel(x, y, group, base=None, method="fast"):
    """``max_T base(T x, y)``; polynomial bases use ``(1 + gamma max_T <T x, y>) ** d``."""
    return kernel_value(KernelSpec(_base_spec(base, True), "best", group), x, y, method)


def avg_fit_kernel(x, y, group, base=None, method="fast"):
    """``mean_T base(T x, y)`` over the enumerated group."""
    return kernel_value(KernelSpec(_base_spec(base, True), "average", group), x, y, method)


def compose_invariant_locality(spec):
    """Kernel function ``(x, y) -> reduce_T locality(T x, y)`` for a locality spec."""
    if not isinstance(spec.base, Locality):
        raise ValueError("spec has no locality stack")

    def kernel(x, y):
        return kernel_value(spec, x, y)

    return kernel


def kernel_function(spec, method="fast"):
    """Scalar kernel ``(x, y) -> float`` for any spec."""
    def kernel(x, y):
        return kernel_value(spec, x, y, method)
    return kernel


__all__ = [
    "avg_fit_kernel", "best_fit_kernel", "compose_invariant_locality",
    "exhaustive_block", "kernel_block", "kernel_function", "kernel_value",
    "max_shifted_dot", "shifted_dots",
]
