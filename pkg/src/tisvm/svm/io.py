"""Binary model files and a human-readable summary.

Layout (little-endian)::

    8 bytes   magic b"TISVMMD1"
    4 bytes   uint32 header length L
    L bytes   UTF-8 JSON header: spec, spec digest, SV count, image shape,
              bias, C, tol, training diagnostics
    n_sv      float64 dual coefficients alpha
    n_sv      int8 labels
    n_sv*m    float64 support-vector images, row-major

A multiclass file is magic b"TISVMMC1", a JSON header (classes, pairs), then
one binary record per class pair in header order.
"""
from __future__ import annotations

import json
import struct

import numpy as np

from ..kernels import KernelSpec
from .multiclass import MulticlassModel
from .smo import SvmModel

MODEL_MAGIC = b"TISVMMD1"
MULTI_MAGIC = b"TISVMMC1"


def _header_bytes(obj):
    raw = json.dumps(obj, sort_keys=True).encode()
    return struct.pack("<I", len(raw)) + raw


def _read_header(buf, offset):
    (length,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    return json.loads(buf[offset:offset + length].decode()), offset + length


def model_to_bytes(model):
    if model.support_images is None or model.spec is None:
        raise ValueError("only models with a spec and support images can be serialized")
    shape = list(model.support_images.shape[1:])
    header = {
        "spec": model.spec.to_dict(), "spec_digest": model.spec.hexdigest(),
        "n_sv": int(model.n_support), "image_shape": shape, "bias": model.bias,
        "C": model.C, "tol": model.tol, "kkt_violation": model.kkt_violation,
        "iterations": model.iterations, "objective": model.objective,
        "indefinite": model.indefinite, "n_train": model.n_train,
        "support": [int(i) for i in model.support],
    }
    return b"".join([
        MODEL_MAGIC, _header_bytes(header),
        model.alpha.astype("<f8").tobytes(),
        model.labels.astype("<i1").tobytes(),
        model.support_images.astype("<f8").tobytes(),
    ])


def model_from_bytes(buf, offset=0):
    """Parse one binary record; returns ``(model, next_offset)``."""
    if buf[offset:offset + 8] != MODEL_MAGIC:
        raise ValueError("not a model record")
    header, offset = _read_header(buf, offset + 8)
    spec = KernelSpec.from_dict(header["spec"])
    if spec.hexdigest() != header["spec_digest"]:
        raise ValueError("spec digest mismatch")
    n = header["n_sv"]
    m1, m2 = header["image_shape"]
    alpha = np.frombuffer(buf, "<f8", n, offset).copy()
    offset += 8 * n
    labels = np.frombuffer(buf, "<i1", n, offset).astype(np.float64)
    offset += n
    images = np.frombuffer(buf, "<f8", n * m1 * m2, offset).reshape(n, m1, m2).copy()
    offset += 8 * n * m1 * m2
    model = SvmModel(
        support=np.array(header["support"], dtype=np.int64), alpha=alpha, labels=labels,
        bias=header["bias"], C=header["C"], tol=header["tol"], spec=spec,
        support_images=images, kkt_violation=header["kkt_violation"],
        iterations=header["iterations"], objective=header["objective"],
        indefinite=header["indefinite"], n_train=header["n_train"],
    )
    return model, offset


def save_model(path, model):
    with open(path, "wb") as fh:
        if isinstance(model, MulticlassModel):
            pairs = sorted(model.models)
            fh.write(MULTI_MAGIC)
            fh.write(_header_bytes({"classes": list(model.classes),
                                    "pairs": [list(p) for p in pairs]}))
            for p in pairs:
                fh.write(model_to_bytes(model.models[p]))
        else:
            fh.write(model_to_bytes(model))


def load_model(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:8] == MODEL_MAGIC:
        return model_from_bytes(buf)[0]
    if buf[:8] != MULTI_MAGIC:
        raise ValueError(f"{path}: unrecognized model file")
    header, offset = _read_header(buf, 8)
    models = {}
    for pair in header["pairs"]:
        models[tuple(pair)], offset = model_from_bytes(buf, offset)
    return _rebuild_multiclass(tuple(header["classes"]), models)


def _rebuild_multiclass(classes, models):
    union = sorted({int(i) for m in models.values() for i in m.support})
    position = {g: k for k, g in enumerate(union)}
    first = {}
    for m in models.values():
        for g, img in zip(m.support, m.support_images):
            first.setdefault(int(g), img)
    images = np.stack([first[g] for g in union])
    columns = {p: np.array([position[int(g)] for g in m.support], dtype=np.int64)
               for p, m in models.items()}
    spec = next(iter(models.values())).spec
    return MulticlassModel(classes, models, spec, images, columns)


def model_summary(model):
    """Plain-text dump of a binary or multiclass model."""
    if isinstance(model, MulticlassModel):
        lines = [f"one-vs-one model, classes {list(model.classes)}",
                 f"spec {model.spec.canonical_json()}"]
        for p in sorted(model.models):
            m = model.models[p]
            lines.append(f"  {p[0]} vs {p[1]}: {m.n_support} SV, b={m.bias:.6g}, "
                         f"kkt={m.kkt_violation:.2e}")
        return "\n".join(lines) + "\n"
    spec = model.spec.canonical_json() if model.spec is not None else "<none>"
    lines = [
        f"binary SVM, spec {spec}",
        f"support vectors: {model.n_support} of {model.n_train}",
        f"bias: {model.bias:.12g}",
        f"C: {model.C:g}  tol: {model.tol:g}  iterations: {model.iterations}",
        f"dual objective: {model.objective:.12g}",
        f"max KKT violation: {model.kkt_violation:.3e}",
        f"indefinite Gram: {model.indefinite}",
    ]
    for i, a, y in zip(model.support, model.alpha, model.labels):
        lines.append(f"  sv {int(i)}: alpha={a:.12g} y={int(y):+d}")
    return "\n".join(lines) + "\n"
