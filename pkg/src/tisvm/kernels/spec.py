"""Declarative kernel descriptions.

A :class:`KernelSpec` couples a base kernel (linear, polynomial or a
locality stack) with an invariance mode (none, best-fit, average-fit) over a
:class:`~tisvm.transforms.TransformGroup`.  Specs are frozen, hashable and
serialize to a canonical JSON form whose SHA-256 is the spec digest used in
file headers.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..transforms import TransformGroup, identity_group

INVARIANCE_MODES = ("none", "best", "average")


@dataclass(frozen=True)
class Linear:
    """``<x, y>``, divided by the pixel count ``m`` when ``normalized``."""

    normalized: bool = True

    def apply(self, dots, m):
        return dots / m if self.normalized else dots

    def to_dict(self):
        return {"family": "linear", "normalized": self.normalized}


@dataclass(frozen=True)
class Polynomial:
    """``(1 + gamma <x, y>) ** degree``; ``gamma=None`` means ``1/m``."""

    gamma: float | None = None
    degree: int = 8

    def __post_init__(self):
        if self.gamma is not None and self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree}")

    def resolved_gamma(self, m):
        return 1.0 / m if self.gamma is None else float(self.gamma)

    def apply(self, dots, m):
        return (1.0 + self.resolved_gamma(m) * dots) ** int(self.degree)

    def to_dict(self):
        return {"family": "polynomial", "gamma": self.gamma, "degree": int(self.degree)}


@dataclass(frozen=True)
class LocalityLayer:
    """One layer of a locality stack.

    ``k`` is the locality parameter: a window covers ``k + 1`` consecutive
    lower-layer outputs along each axis (``k = 0`` is a single pixel).
    ``k=None`` marks the top layer, which sums every lower output.  Each
    window sum ``S`` becomes ``(1 + gamma * S) ** degree``; ``gamma=None``
    divides by the number of summed terms.
    """

    k: int | None
    degree: int
    padding: int = 0
    stride: int = 1
    gamma: float | None = 1.0

    def __post_init__(self):
        if self.k is not None and self.k < 0:
            raise ValueError(f"locality width k must be >= 0, got {self.k}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"layer degree must be a positive integer, got {self.degree}")
        if self.padding < 0 or self.stride < 1:
            raise ValueError("padding must be >= 0 and stride >= 1")
        if self.gamma is not None and self.gamma < 0:
            raise ValueError("layer gamma must be >= 0")
        if self.k is None and (self.padding or self.stride != 1):
            raise ValueError("the top layer takes no padding or stride")

    @property
    def is_top(self):
        return self.k is None

    def to_dict(self):
        return {"k": self.k, "degree": int(self.degree), "padding": self.padding,
                "stride": self.stride, "gamma": self.gamma}


def top_layer(degree, gamma=1.0):
    return LocalityLayer(None, degree, gamma=gamma)


@dataclass(frozen=True)
class Locality:
    """Stack of locality layers, the last one being a top layer."""

    layers: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise ValueError("locality stack is empty")
        if not layers[-1].is_top:
            raise ValueError("the last locality layer must be a top layer (k=None)")
        if any(layer.is_top for layer in layers[:-1]):
            raise ValueError("only the last locality layer may be a top layer")

    @property
    def total_degree(self):
        out = 1
        for layer in self.layers:
            out *= int(layer.degree)
        return out

    def to_dict(self):
        return {"family": "locality", "layers": [layer.to_dict() for layer in self.layers]}


def two_layer_locality(k1=5, d1=2, d2=4, normalized=True):
    """Two-layer stack with ``(k1 - 1) // 2`` zero padding and stride 1."""
    gamma = None if normalized else 1.0
    return Locality((LocalityLayer(k1, d1, padding=(k1 - 1) // 2, stride=1, gamma=gamma),
                     top_layer(d2, gamma=gamma)))


@dataclass(frozen=True)
class KernelSpec:
    """Base kernel plus optional invariance over a transformation group."""

    base: Linear | Polynomial | Locality = field(default_factory=Linear)
    invariance: str = "none"
    group: TransformGroup = field(default_factory=identity_group)

    def __post_init__(self):
        if self.invariance not in INVARIANCE_MODES:
            raise ValueError(f"invariance must be one of {INVARIANCE_MODES}, got {self.invariance!r}")
        if self.invariance == "none" and self.group.kind != "identity":
            raise ValueError("a transformation group requires best or average invariance")

    @property
    def effective_group(self):
        return identity_group() if self.invariance == "none" else self.group

    def to_dict(self):
        return {"base": self.base.to_dict(), "invariance": self.invariance,
                "group": self.effective_group.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(base=base_from_dict(d["base"]), invariance=d["invariance"],
                   group=TransformGroup.from_dict(d["group"]))

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self):
        """Raw 32-byte SHA-256 of the canonical JSON."""
        return hashlib.sha256(self.canonical_json().encode()).digest()

    def hexdigest(self):
        return self.digest().hex()


def base_from_dict(d):
    d = dict(d)
    family = d.pop("family")
    if family == "linear":
        return Linear(**d)
    if family == "polynomial":
        return Polynomial(**d)
    if family == "locality":
        return Locality(tuple(LocalityLayer(**layer) for layer in d["layers"]))
    raise ValueError(f"unknown base kernel family {family!r}")
