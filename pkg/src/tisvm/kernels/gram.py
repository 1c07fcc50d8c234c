"""Gram-matrix assembly, parallel over fixed tiles, and its file formats.

Work is split into fixed ``tile x tile`` blocks of the upper triangle before
any worker sees it, so every entry is produced by the same arithmetic no
matter how many workers run: results are bitwise identical across worker
counts.

Binary layout (little-endian)::

    8 bytes   magic b"TIGRAM01"
    8 bytes   uint64 n
    32 bytes  SHA-256 spec digest
    32 bytes  SHA-256 dataset fingerprint
    n(n+1)/2  float64, lower triangle in row-major order
"""
from __future__ import annotations

import csv
import hashlib
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..transforms import as_image_stack
from .invariant import kernel_block
from .spec import KernelSpec

GRAM_MAGIC = b"TIGRAM01"
_HEADER = struct.Struct("<8sQ32s32s")
DEFAULT_TILE = 32


def dataset_fingerprint(images):
    """SHA-256 over shape and float64 bytes of an image stack."""
    arr = np.ascontiguousarray(images, dtype=np.float64)
    h = hashlib.sha256()
    h.update(struct.pack("<3Q", *arr.shape))
    h.update(arr.tobytes())
    return h.digest()


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray
    spec: KernelSpec | None
    fingerprint: bytes
    spec_digest: bytes = b""

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"Gram matrix must be square, got {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if not self.spec_digest and self.spec is not None:
            object.__setattr__(self, "spec_digest", self.spec.digest())

    @property
    def n(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def submatrix(self, idx):
        idx = np.asarray(idx)
        return self.entries[np.ix_(idx, idx)]

    def save(self, path):
        save_gram(path, self)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.entries:
                w.writerow([repr(float(v)) for v in row])


def _tiles(n, tile):
    starts = range(0, n, tile)
    return [(i, j) for i in starts for j in starts if i <= j]


def gram_matrix(dataset, spec, workers=1, tile=DEFAULT_TILE, method="fast"):
    """Symmetric Gram matrix ``K[i, j] = k(x_i, x_j)`` over a dataset.

    Entries with ``i <= j`` are computed once and mirrored, so the result is
    exactly symmetric even for kernels that are only approximately symmetric
    (e.g. interpolated rotations).

    Parameters
    ----------
    dataset : sequence of images, uniform shape
    spec : KernelSpec
    workers : int
        Thread count; results do not depend on it.
    """
    images = as_image_stack(dataset, "dataset")
    n = len(images)
    entries = np.empty((n, n))

    def work(ij):
        i, j = ij
        return i, j, kernel_block(spec, images[i:i + tile], images[j:j + tile], method)

    jobs = _tiles(n, tile)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(ij) for ij in jobs]
    for i, j, block in results:
        entries[i:i + block.shape[0], j:j + block.shape[1]] = block
    upper = np.triu(entries)
    entries = upper + np.triu(upper, 1).T
    return GramMatrix(entries, spec, dataset_fingerprint(images))


def cross_kernel(spec, A, B, workers=1, tile=DEFAULT_TILE, method="fast"):
    """Rectangular block ``K[i, j] = k(A[i], B[j])``, tiled the same way as :func:`gram_matrix`."""
    A = as_image_stack(A, "A")
    B = as_image_stack(B, "B")
    out = np.empty((len(A), len(B)))
    jobs = [(i, j) for i in range(0, len(A), tile) for j in range(0, len(B), tile)]

    def work(ij):
        i, j = ij
        return i, j, kernel_block(spec, A[i:i + tile], B[j:j + tile], method)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(ij) for ij in jobs]
    for i, j, block in results:
        out[i:i + block.shape[0], j:j + block.shape[1]] = block
    return out


def save_gram(path, gram):
    n = gram.n
    rows, cols = np.tril_indices(n)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(GRAM_MAGIC, n, gram.spec_digest.ljust(32, b"\0"),
                              gram.fingerprint.ljust(32, b"\0")))
        fh.write(gram.entries[rows, cols].astype("<f8").tobytes())


def load_gram(path, spec=None):
    """Read a Gram file; if ``spec`` is given its digest must match the header."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise ValueError(f"{path}: truncated Gram header")
        magic, n, digest, fingerprint = _HEADER.unpack(head)
        if magic != GRAM_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        body = fh.read()
    count = n * (n + 1) // 2
    if len(body) != 8 * count:
        raise ValueError(f"{path}: expected {count} entries, found {len(body) // 8}")
    if spec is not None and spec.digest() != digest:
        raise ValueError(f"{path}: spec digest does not match")
    tri = np.frombuffer(body, dtype="<f8")
    entries = np.zeros((n, n))
    rows, cols = np.tril_indices(n)
    entries[rows, cols] = tri
    entries[cols, rows] = tri
    return GramMatrix(entries, spec, fingerprint, spec_digest=digest)
