"""Datasets: IDX ingestion, Translated/Rotated synthesis, subsampling, cache files.

IDX is the big-endian container used by MNIST and EMNIST: magic
``0x00000801`` for label files (uint8 vector) and ``0x00000803`` for image
files (uint8 ``count x rows x cols``).  Files ending in ``.gz`` are read and
written through gzip.
"""
from __future__ import annotations

import gzip
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .transforms import rotate

IDX_LABELS = 0x00000801
IDX_IMAGES = 0x00000803
CACHE_MAGIC = b"TIDSET01"


class DataError(ValueError):
    """Base class for dataset errors."""


class BadMagicError(DataError):
    pass


class TruncatedFileError(DataError):
    pass


class CountMismatchError(DataError):
    pass


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    images: np.ndarray
    labels: np.ndarray
    classes: tuple = ()
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if images.ndim != 3:
            raise DataError(f"images must be (n, m1, m2), got {images.shape}")
        if len(images) != len(labels):
            raise DataError(f"{len(images)} images but {len(labels)} labels")
        classes = tuple(self.classes) if self.classes else tuple(sorted(set(labels.tolist())))
        if not set(labels.tolist()) <= set(classes):
            raise DataError("labels outside the declared class set")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "classes", classes)

    def __len__(self):
        return len(self.labels)

    @property
    def shape(self):
        return self.images.shape[1:]

    def take(self, idx, **provenance):
        idx = np.asarray(idx, dtype=np.int64)
        prov = dict(self.provenance, **provenance)
        return LabeledDataset(self.images[idx], self.labels[idx], self.classes, prov)


def _read_bytes(path):
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as fh:
            return fh.read()
    return path.read_bytes()


def _write_bytes(path, payload):
    path = Path(path)
    if path.suffix != ".gz":
        path.write_bytes(payload)
        return
    # fixed mtime and no stored name keep the compressed bytes reproducible
    with open(path, "wb") as raw, gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as fh:
        fh.write(payload)


def read_idx(path):
    """Raw uint8 array from an IDX file (labels -> 1-D, images -> 3-D)."""
    raw = _read_bytes(path)
    if len(raw) < 8:
        raise TruncatedFileError(f"{path}: file too short for an IDX header")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic == IDX_LABELS:
        dims = struct.unpack(">I", raw[4:8])
        offset = 8
    elif magic == IDX_IMAGES:
        if len(raw) < 16:
            raise TruncatedFileError(f"{path}: truncated image header")
        dims = struct.unpack(">III", raw[4:16])
        offset = 16
    else:
        raise BadMagicError(f"{path}: unexpected magic 0x{magic:08x}")
    expected = int(np.prod(dims))
    body = raw[offset:]
    if len(body) < expected:
        raise TruncatedFileError(f"{path}: expected {expected} bytes of data, found {len(body)}")
    return np.frombuffer(body[:expected], dtype=np.uint8).reshape(dims).copy()


def write_idx(path, array):
    """Write a uint8 array (1-D labels or 3-D images) as IDX."""
    arr = np.asarray(array)
    if arr.dtype != np.uint8:
        raise DataError("IDX writer expects uint8 data")
    if arr.ndim == 1:
        header = struct.pack(">II", IDX_LABELS, *arr.shape)
    elif arr.ndim == 3:
        header = struct.pack(">IIII", IDX_IMAGES, *arr.shape)
    else:
        raise DataError(f"IDX writer expects 1-D or 3-D data, got {arr.ndim}-D")
    _write_bytes(path, header + arr.tobytes())


def load_idx(images_path, labels_path, transpose=False, source=None):
    """Load an IDX image/label pair with pixels scaled to [0, 1].

    ``transpose`` swaps rows and columns of every image (EMNIST files are
    stored transposed).
    """
    raw_images = read_idx(images_path)
    raw_labels = read_idx(labels_path)
    if raw_images.ndim != 3:
        raise BadMagicError(f"{images_path}: not an image file")
    if raw_labels.ndim != 1:
        raise BadMagicError(f"{labels_path}: not a label file")
    if len(raw_images) != len(raw_labels):
        raise CountMismatchError(
            f"{len(raw_images)} images in {images_path} but {len(raw_labels)} labels in {labels_path}")
    images = raw_images.astype(np.float64) / 255.0
    if transpose:
        images = images.transpose(0, 2, 1)
    prov = {"source": source or str(images_path), "transform": "none", "transpose": bool(transpose)}
    return LabeledDataset(images, raw_labels.astype(np.int64), provenance=prov)


def to_idx_bytes(dataset, transpose=False):
    """Inverse of :func:`load_idx` for datasets with pixels on the 1/255 grid."""
    images = dataset.images.transpose(0, 2, 1) if transpose else dataset.images
    return np.rint(images * 255.0).astype(np.uint8), dataset.labels.astype(np.uint8)


def make_translated(dataset, canvas=(64, 64), noise_sigma=0.1, seed=0, center=False):
    """Paste each image at a uniformly random offset inside a larger canvas, then add noise.

    Offsets range over every position that keeps the whole image inside the
    canvas.  Noise is N(0, noise_sigma^2) per canvas pixel and is not clipped.
    ``center=True`` collapses the offset range to the (floor) center.
    """
    c1, c2 = canvas
    m1, m2 = dataset.shape
    if m1 > c1 or m2 > c2:
        raise DataError(f"image {dataset.shape} does not fit canvas {canvas}")
    rng = np.random.default_rng(seed)
    n = len(dataset)
    if center:
        offsets = np.tile([(c1 - m1) // 2, (c2 - m2) // 2], (n, 1))
    else:
        offsets = np.column_stack([rng.integers(0, c1 - m1 + 1, n), rng.integers(0, c2 - m2 + 1, n)])
    out = np.zeros((n, c1, c2))
    for k, (a, b) in enumerate(offsets):
        out[k, a:a + m1, b:b + m2] = dataset.images[k]
    if noise_sigma:
        out += noise_sigma * rng.standard_normal(out.shape)
    prov = dict(dataset.provenance, transform="translated", canvas=list(canvas),
                noise_sigma=noise_sigma, seed=seed)
    return LabeledDataset(out, dataset.labels.copy(), dataset.classes, prov)


ROTATED_SKIP = (6, 9)


def make_rotated(dataset, noise_sigma=0.1, seed=0, skip=ROTATED_SKIP, max_angle=math.pi,
                 interp="bilinear"):
    """Drop the ``skip`` classes, rotate each image by U(-max_angle, max_angle], add noise.

    ``max_angle=0`` disables rotation.
    """
    keep = ~np.isin(dataset.labels, skip)
    images = dataset.images[keep]
    labels = dataset.labels[keep]
    rng = np.random.default_rng(seed)
    # pi - U[0, 2pi) lands in (-pi, pi]
    thetas = max_angle - rng.uniform(0.0, 2.0 * max_angle, len(labels)) if max_angle else np.zeros(len(labels))
    out = np.stack([rotate(img, float(t), interp) for img, t in zip(images, thetas)]) if len(labels) else images.copy()
    if noise_sigma:
        out = out + noise_sigma * rng.standard_normal(out.shape)
    classes = tuple(c for c in dataset.classes if c not in skip)
    prov = dict(dataset.provenance, transform="rotated", noise_sigma=noise_sigma, seed=seed,
                skipped=list(skip))
    return LabeledDataset(out, labels, classes, prov)


def _stratified_counts(class_sizes, n):
    """Split ``n`` over classes proportionally; remainders go to the largest fractional parts."""
    total = sum(class_sizes)
    exact = [n * s / total for s in class_sizes]
    counts = [min(int(math.floor(e)), s) for e, s in zip(exact, class_sizes)]
    order = sorted(range(len(exact)), key=lambda k: (-(exact[k] - math.floor(exact[k])), k))
    short = n - sum(counts)
    while short > 0:
        progressed = False
        for k in order:
            if short and counts[k] < class_sizes[k]:
                counts[k] += 1
                short -= 1
                progressed = True
        if not progressed:
            break
    return counts


def subsample_indices(labels, n, seed=0, stratified=True, classes=None):
    """Indices of an ``n``-item sample without replacement, uniform or per class."""
    labels = np.asarray(labels)
    if n > len(labels):
        raise DataError(f"cannot draw {n} samples from {len(labels)}")
    if n < 1:
        raise DataError("n must be positive")
    rng = np.random.default_rng(seed)
    if not stratified:
        return rng.permutation(len(labels))[:n]
    classes = sorted(set(labels.tolist())) if classes is None else classes
    members = [np.flatnonzero(labels == c) for c in classes]
    members = [m for m in members if len(m)]
    counts = _stratified_counts([len(m) for m in members], n)
    picked = np.concatenate([rng.permutation(m)[:k] for m, k in zip(members, counts)])
    return picked[rng.permutation(len(picked))]


def subsample(dataset, n, seed=0, stratified=True):
    """Sample ``n`` items without replacement, uniformly or class-stratified."""
    idx = subsample_indices(dataset.labels, n, seed, stratified, dataset.classes)
    return dataset.take(idx, subsample_seed=seed)


def split(dataset, test_size, seed=0):
    """Deterministic stratified held-out split; returns ``(train, test)``."""
    test_idx = subsample_indices(dataset.labels, test_size, seed, True, dataset.classes)
    mask = np.ones(len(dataset), dtype=bool)
    mask[test_idx] = False
    train = dataset.take(np.flatnonzero(mask), split="train", split_seed=seed)
    test = dataset.take(np.sort(test_idx), split="test", split_seed=seed)
    return train, test


def save_dataset(path, dataset):
    """Cache file: magic, JSON header, float32 pixel block, int32 labels."""
    header = json.dumps({"count": len(dataset), "shape": list(dataset.shape),
                         "classes": list(dataset.classes), "provenance": dataset.provenance},
                        sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC + struct.pack("<I", len(header)) + header)
        fh.write(dataset.images.astype("<f4").tobytes())
        fh.write(dataset.labels.astype("<i4").tobytes())


def load_dataset(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != CACHE_MAGIC:
        raise BadMagicError(f"{path}: not a dataset cache file")
    (length,) = struct.unpack_from("<I", raw, 8)
    header = json.loads(raw[12:12 + length].decode())
    n = header["count"]
    m1, m2 = header["shape"]
    offset = 12 + length
    need = offset + 4 * n * m1 * m2 + 4 * n
    if len(raw) < need:
        raise TruncatedFileError(f"{path}: expected {need} bytes, found {len(raw)}")
    images = np.frombuffer(raw, "<f4", n * m1 * m2, offset).reshape(n, m1, m2).astype(np.float64)
    labels = np.frombuffer(raw, "<i4", n, offset + 4 * n * m1 * m2).astype(np.int64)
    return LabeledDataset(images, labels, tuple(header["classes"]), header["provenance"])
