"""Images and the finite transformation groups that act on them.

Images are plain 2-D float arrays (``m1 x m2``).  A :class:`TransformGroup`
is a declarative description (cyclic translations, a windowed or strided
subset of them, discretized rotations, or a product of these); its elements
are enumerated for a concrete image shape by :func:`enumerate_group`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

INTERP_MODES = ("nearest", "bilinear")


def as_image(img, name="image"):
    """Validate and return ``img`` as a finite float64 2-D array (1-D input is promoted to ``1 x m``)."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} has a zero-sized dimension: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def as_image_stack(images, name="images"):
    """Validate a sequence of same-shaped images and return an ``(n, m1, m2)`` array."""
    arr = np.asarray(images, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, None, :]
    if arr.ndim != 3:
        raise ValueError(f"{name} must be a stack of 2-D images, got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ValueError(f"{name} is empty or has a zero-sized dimension: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def translate(img, r, s):
    """Cyclically shift ``img`` so that ``out[p, q] == img[(p + r) % m1, (q + s) % m2]``."""
    arr = np.asarray(img)
    m1, m2 = arr.shape[-2:]
    return np.roll(arr, (-(r % m1), -(s % m2)), axis=(-2, -1))


def _rotation_sources(shape, theta):
    m1, m2 = shape
    c1, c2 = (m1 - 1) / 2.0, (m2 - 1) / 2.0
    p, q = np.meshgrid(np.arange(m1) - c1, np.arange(m2) - c2, indexing="ij")
    cos, sin = math.cos(theta), math.sin(theta)
    return c1 + p * cos - q * sin, c2 + p * sin + q * cos


def rotate(img, theta, interp="bilinear"):
    """Rotate one image (or a stack of images) by ``theta`` radians about the image center.

    Output pixel ``(p, q)`` reads the input at
    ``(p cos t - q sin t, p sin t + q cos t)`` measured from the center, using
    inverse mapping.  Sources outside the grid read as 0.

    Parameters
    ----------
    img : array_like, shape (m1, m2) or (n, m1, m2)
    theta : float
        Angle in radians.
    interp : {"bilinear", "nearest"}
    """
    if interp not in INTERP_MODES:
        raise ValueError(f"unknown interpolation {interp!r}; expected one of {INTERP_MODES}")
    arr = np.asarray(img, dtype=np.float64)
    arr = as_image_stack(arr) if arr.ndim == 3 else as_image(arr)
    if theta == 0.0:
        return arr.copy()
    m1, m2 = arr.shape[-2:]
    src_p, src_q = _rotation_sources((m1, m2), theta)
    padded = np.zeros(arr.shape[:-2] + (m1 + 2, m2 + 2))
    padded[..., 1:-1, 1:-1] = arr

    if interp == "nearest":
        ip = np.rint(src_p).astype(np.int64)
        iq = np.rint(src_q).astype(np.int64)
        inside = (ip >= 0) & (ip < m1) & (iq >= 0) & (iq < m2)
        ip = np.where(inside, ip + 1, 0)
        iq = np.where(inside, iq + 1, 0)
        return padded[..., ip, iq]

    # Coordinates more than one pixel off-grid touch only the zero border.
    src_p = np.clip(src_p, -1.0, m1)
    src_q = np.clip(src_q, -1.0, m2)
    p0 = np.floor(src_p).astype(np.int64)
    q0 = np.floor(src_q).astype(np.int64)
    fp = src_p - p0
    fq = src_q - q0
    p0 = np.clip(p0 + 1, 0, m1 + 1)
    q0 = np.clip(q0 + 1, 0, m2 + 1)
    p1 = np.minimum(p0 + 1, m1 + 1)
    q1 = np.minimum(q0 + 1, m2 + 1)
    return (
        padded[..., p0, q0] * (1 - fp) * (1 - fq)
        + padded[..., p1, q0] * fp * (1 - fq)
        + padded[..., p0, q1] * (1 - fp) * fq
        + padded[..., p1, q1] * fp * fq
    )


class Translation(NamedTuple):
    r: int
    s: int

    def apply(self, img):
        return translate(img, self.r, self.s)

    def compose(self, other, dims):
        """``self`` after ``other``: translating by ``other`` then ``self`` adds the offsets."""
        m1, m2 = dims
        return Translation((self.r + other.r) % m1, (self.s + other.s) % m2)

    def inverse(self, dims):
        m1, m2 = dims
        return Translation((-self.r) % m1, (-self.s) % m2)


class Rotation(NamedTuple):
    theta: float
    interp: str = "bilinear"

    def apply(self, img):
        return rotate(img, self.theta, self.interp)


class Composite(NamedTuple):
    """Apply ``parts`` left to right (rotation first, then translation, for the built-in products)."""

    parts: tuple

    def apply(self, img):
        for part in self.parts:
            img = part.apply(img)
        return img


@dataclass(frozen=True)
class TransformGroup:
    """Declarative description of a finite transformation group.

    Use the constructors :func:`identity_group`, :func:`translation_group`,
    :func:`rotation_group` and :func:`product_group` rather than building
    instances by hand.
    """

    kind: str
    r_max: int | None = None
    s_max: int | None = None
    r_step: int = 1
    s_step: int = 1
    n_angles: int = 36
    interp: str = "bilinear"
    factors: tuple = ()

    def __post_init__(self):
        if self.kind not in ("identity", "translations", "rotations", "product"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind == "rotations":
            if self.n_angles < 1:
                raise ValueError("rotation group needs at least one angle")
            if self.interp not in INTERP_MODES:
                raise ValueError(f"unknown interpolation {self.interp!r}")
        if self.kind == "translations":
            if self.r_step < 1 or self.s_step < 1:
                raise ValueError("translation steps must be >= 1")
            for v in (self.r_max, self.s_max):
                if v is not None and v < 0:
                    raise ValueError("translation window must be non-negative")
        if self.kind == "product" and not self.factors:
            raise ValueError("product group needs at least one factor")

    @property
    def is_full_translations(self):
        return (self.kind == "translations" and self.r_max is None and self.s_max is None
                and self.r_step == 1 and self.s_step == 1)

    def size(self, dims):
        return len(enumerate_group(self, dims))

    def translation_offsets(self, dims):
        """Shift offsets ``(r, s)`` of a translation group, reduced modulo ``dims``."""
        if self.kind != "translations":
            raise ValueError(f"{self.kind} group has no translation offsets")
        m1, m2 = dims
        rs = _axis_offsets(m1, self.r_max, self.r_step)
        ss = _axis_offsets(m2, self.s_max, self.s_step)
        return [(r, s) for r in rs for s in ss]

    def angles(self):
        if self.kind != "rotations":
            raise ValueError(f"{self.kind} group has no rotation angles")
        return rotation_angles(self.n_angles)

    def to_dict(self):
        if self.kind == "identity":
            return {"kind": "identity"}
        if self.kind == "translations":
            return {"kind": "translations", "r_max": self.r_max, "s_max": self.s_max,
                    "r_step": self.r_step, "s_step": self.s_step}
        if self.kind == "rotations":
            return {"kind": "rotations", "n_angles": self.n_angles, "interp": self.interp}
        return {"kind": "product", "factors": [f.to_dict() for f in self.factors]}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d["kind"] == "product":
            return product_group(*(cls.from_dict(f) for f in d["factors"]))
        return cls(**d)


def _axis_offsets(m, window, step):
    if window is None:
        if m % step:
            raise ValueError(f"translation step {step} does not divide dimension {m}")
        return list(range(0, m, step))
    # windowed: |offset| <= window, stepping from 0 outward; duplicates mod m removed
    seen = []
    for k in range(-(window // step), window // step + 1):
        off = (k * step) % m
        if off not in seen:
            seen.append(off)
    return sorted(seen)


def rotation_angles(n_angles):
    """``n_angles`` equally spaced angles in (-pi, pi], starting at 0."""
    out = []
    for k in range(n_angles):
        theta = 2.0 * math.pi * k / n_angles
        if theta > math.pi:
            theta -= 2.0 * math.pi
        out.append(theta)
    return out


def identity_group():
    return TransformGroup("identity")


def translation_group(r_max=None, s_max=None, r_step=1, s_step=1):
    """Cyclic translations.

    With no arguments this is the full group of all ``m1 * m2`` shifts.
    ``r_max``/``s_max`` restrict to ``|r| <= r_max, |s| <= s_max`` (a window,
    not closed under composition); ``r_step``/``s_step`` select the cyclic
    subgroup of shifts that are multiples of the step (step must divide the
    dimension).
    """
    return TransformGroup("translations", r_max=r_max, s_max=s_max, r_step=r_step, s_step=s_step)


def rotation_group(n_angles=36, interp="bilinear"):
    return TransformGroup("rotations", n_angles=n_angles, interp=interp)


def product_group(*groups):
    """Cartesian product; an element applies one member of each factor in order."""
    flat = []
    for g in groups:
        flat.extend(g.factors if g.kind == "product" else [g])
    flat = [g for g in flat if g.kind != "identity"]
    if not flat:
        return identity_group()
    if len(flat) == 1:
        return flat[0]
    return TransformGroup("product", factors=tuple(flat))


def enumerate_group(group, dims):
    """List every element of ``group`` acting on images of shape ``dims``.

    Returns
    -------
    list
        ``Translation``, ``Rotation`` or ``Composite`` descriptors; the first
        element is always the identity.
    """
    m1, m2 = dims
    if m1 < 1 or m2 < 1:
        raise ValueError(f"zero-sized dimensions {dims}")
    if group.kind == "identity":
        return [Translation(0, 0)]
    if group.kind == "translations":
        return [Translation(r, s) for r, s in group.translation_offsets(dims)]
    if group.kind == "rotations":
        return [Rotation(t, group.interp) for t in group.angles()]
    per_factor: Sequence[list] = [enumerate_group(f, dims) for f in group.factors]
    return [Composite(tuple(parts)) for parts in itertools.product(*per_factor)]


def apply_all(group, img):
    """Stack of ``T img`` for every enumerated ``T``, shape ``(|G|, m1, m2)``."""
    img = as_image(img)
    return np.stack([t.apply(img) for t in enumerate_group(group, img.shape)])
