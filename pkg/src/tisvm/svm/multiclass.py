"""One-vs-one multiclass reduction over a shared Gram matrix."""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..kernels import KernelSpec, cross_kernel, gram_matrix
from ..transforms import as_image_stack
from .smo import solve_dual_smo


@dataclass(frozen=True, eq=False)
class MulticlassModel:
    """Binary models keyed by class pair ``(a, b)``, ``a < b``; +1 means class ``a``.

    Support vectors of every binary model live in ``support_images``;
    ``columns[(a, b)]`` maps each binary model's support vectors into it.
    """

    classes: tuple
    models: dict
    spec: KernelSpec
    support_images: np.ndarray = field(repr=False)
    columns: dict = field(repr=False)

    def __post_init__(self):
        k = len(self.classes)
        if len(self.models) != k * (k - 1) // 2:
            raise ValueError("one-vs-one needs one model per class pair")


def _pair_problem(gram, labels, a, b):
    idx = np.flatnonzero((labels == a) | (labels == b))
    y = np.where(labels[idx] == a, 1.0, -1.0)
    return idx, gram[np.ix_(idx, idx)], y


def train_multiclass(images, labels, spec, C=10.0, tol=1e-3, workers=1, gram=None):
    """Train one binary SVM per class pair on sub-Grams of one shared Gram matrix.

    Parameters
    ----------
    images : (n, m1, m2) array
    labels : (n,) class ids
    spec : KernelSpec
    gram : optional precomputed (n, n) Gram over ``images``
    """
    images = as_image_stack(images)
    labels = np.asarray(labels)
    if len(labels) != len(images):
        raise ValueError("images and labels differ in length")
    classes = tuple(sorted(np.unique(labels).tolist()))
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    K = gram_matrix(images, spec, workers=workers).entries if gram is None else np.asarray(gram)

    def fit(pair):
        a, b = pair
        idx, sub, y = _pair_problem(K, labels, a, b)
        model = solve_dual_smo(sub, y, C=C, tol=tol, spec=spec)
        return pair, idx, model

    pairs = list(itertools.combinations(classes, 2))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fitted = list(pool.map(fit, pairs))
    else:
        fitted = [fit(p) for p in pairs]

    used = sorted({int(idx[i]) for _, idx, m in fitted for i in m.support})
    position = {g: k for k, g in enumerate(used)}
    models, columns = {}, {}
    for pair, idx, model in fitted:
        global_sv = idx[model.support]
        models[pair] = replace(model, support=global_sv, support_images=images[global_sv].copy(),
                              n_train=len(images))
        columns[pair] = np.array([position[int(g)] for g in global_sv], dtype=np.int64)
    return MulticlassModel(classes, models, spec, images[used].copy(), columns)


def pairwise_scores(model, X, workers=1):
    """Decision values of every binary model, shape ``(n_pairs, len(X))``."""
    X = as_image_stack(X)
    K = cross_kernel(model.spec, model.support_images, X, workers=workers)
    pairs = sorted(model.models)
    return pairs, np.stack([
        model.models[p].dual_coef @ K[model.columns[p]] + model.models[p].bias for p in pairs
    ])


def vote(classes, pairs, scores):
    """Majority vote; ties go to the larger summed score, then the smallest class id."""
    index = {c: k for k, c in enumerate(classes)}
    n = scores.shape[1]
    votes = np.zeros((len(classes), n))
    totals = np.zeros((len(classes), n))
    for (a, b), s in zip(pairs, scores):
        win_a = s >= 0
        votes[index[a]] += win_a
        votes[index[b]] += ~win_a
        totals[index[a]] += s
        totals[index[b]] -= s
    out = np.empty(n, dtype=np.asarray(classes).dtype)
    for t in range(n):
        best = np.flatnonzero(votes[:, t] == votes[:, t].max())
        if len(best) > 1:
            top = totals[best, t]
            best = best[top == top.max()]
        out[t] = classes[int(best[0])]
    return out


def predict_multiclass(model, X, workers=1):
    pairs, scores = pairwise_scores(model, X, workers)
    return vote(model.classes, pairs, scores)


def binary_models(model):
    return [model.models[p] for p in sorted(model.models)]
