"""Soft-margin dual SVM by sequential minimal optimization on a precomputed Gram.

Maximizes ``sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij`` subject to
``0 <= a_i <= C`` and ``sum_i a_i y_i = 0``.  Each step picks the maximal
KKT-violating pair and solves the two-variable subproblem in closed form,
following the update rules of Fan, Chen & Lin (JMLR 2005) used by LIBSVM.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..kernels import GramMatrix, KernelSpec, cross_kernel, gram_matrix
from ..transforms import as_image, as_image_stack

log = logging.getLogger(__name__)

HARD_MARGIN_C = 1e6
TAU = 1e-12


class SingleClassError(ValueError):
    """Training labels contain only one class."""


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Trained binary SVM.

    ``support`` indexes the training set; ``alpha``, ``labels`` and
    ``support_images`` are restricted to the support vectors.  Decision value
    is ``sum_i alpha_i y_i K(x_i, x) + bias``.
    """

    support: np.ndarray
    alpha: np.ndarray
    labels: np.ndarray
    bias: float
    C: float
    tol: float
    spec: KernelSpec | None = None
    support_images: np.ndarray | None = field(default=None, repr=False)
    kkt_violation: float = 0.0
    iterations: int = 0
    objective: float = 0.0
    indefinite: bool = False
    n_train: int = 0

    @property
    def dual_coef(self):
        return self.alpha * self.labels

    @property
    def n_support(self):
        return len(self.support)


def _as_gram(gram):
    a = np.asarray(gram.entries if isinstance(gram, GramMatrix) else gram, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Gram matrix must be square, got {a.shape}")
    return a


def _check_labels(labels, n):
    y = np.asarray(labels, dtype=np.float64).ravel()
    if len(y) != n:
        raise ValueError(f"{len(y)} labels for a {n}x{n} Gram matrix")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if np.all(y == y[0]):
        raise SingleClassError("both classes must be present")
    return y


def _violating_pair(alpha, grad, y, C):
    """Indices of the maximal violating pair and the violation ``m - M``."""
    score = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    if not up.any() or not low.any():
        return -1, -1, 0.0
    i = int(np.argmax(np.where(up, score, -np.inf)))
    j = int(np.argmin(np.where(low, score, np.inf)))
    return i, j, float(score[i] - score[j])


def kkt_violation(alpha, gram, labels, C):
    """Maximal KKT violation ``m(a) - M(a)`` of a dual point (0 at an exact optimum)."""
    K = _as_gram(gram)
    y = np.asarray(labels, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    grad = y * (K @ (alpha * y)) - 1.0
    return max(0.0, _violating_pair(alpha, grad, y, C)[2])


def _bias(alpha, grad, y, C):
    yg = y * grad
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        return float(-yg[free].mean())
    ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    return float(-(ub + lb) / 2.0)


def solve_dual_smo(gram, labels, C=10.0, tol=1e-3, max_iter=None, images=None, spec=None):
    """Train a binary SVM on a precomputed Gram matrix.

    Parameters
    ----------
    gram : GramMatrix or (n, n) array
    labels : sequence of -1/+1
    C : float or None
        Box constant; ``None`` or ``inf`` means the hard-margin surrogate
        ``C = 1e6``.
    tol : float
        Stop once the maximal KKT violation drops below ``tol``.
    images : optional (n, m1, m2) training images, kept for the support vectors
    spec : optional KernelSpec; taken from ``gram`` when it is a GramMatrix

    Returns
    -------
    SvmModel
    """
    K = _as_gram(gram)
    n = K.shape[0]
    y = _check_labels(labels, n)
    if C is None or np.isinf(C):
        C = HARD_MARGIN_C
    if C <= 0 or tol <= 0:
        raise ValueError("C and tol must be positive")
    if spec is None and isinstance(gram, GramMatrix):
        spec = gram.spec
    if max_iter is None:
        max_iter = max(1_000_000, 100 * n)

    indefinite = bool(np.linalg.eigvalsh(K)[0] < -1e-10 * max(1.0, np.abs(K).max()))
    if indefinite:
        log.warning("Gram matrix is indefinite; SMO result is a heuristic stationary point")

    Q = (y[:, None] * y[None, :]) * K
    qd = np.diag(Q).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    violation = np.inf
    while it < max_iter:
        i, j, violation = _violating_pair(alpha, grad, y, C)
        if i < 0 or violation < tol:
            break
        it += 1
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = qd[i] + qd[j] + 2.0 * Q[i, j]
            quad = quad if quad > 0 else TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = qd[i] + qd[j] - 2.0 * Q[i, j]
            quad = quad if quad > 0 else TAU
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        di, dj = ni - ai, nj - aj
        alpha[i], alpha[j] = ni, nj
        grad += Q[:, i] * di + Q[:, j] * dj
    else:
        log.warning("SMO stopped at max_iter=%d with violation %.3g", max_iter, violation)

    violation = max(0.0, violation if np.isfinite(violation) else 0.0)
    bias = _bias(alpha, grad, y, C)
    objective = float(alpha.sum() - 0.5 * alpha @ (Q @ alpha))
    support = np.flatnonzero(alpha > 0)
    sv_images = None
    if images is not None:
        sv_images = as_image_stack(images)[support].copy()
    return SvmModel(
        support=support, alpha=alpha[support].copy(), labels=y[support].copy(), bias=bias,
        C=float(C), tol=float(tol), spec=spec, support_images=sv_images,
        kkt_violation=violation, iterations=it, objective=objective,
        indefinite=indefinite, n_train=n,
    )


def train_binary(images, labels, spec, C=10.0, tol=1e-3, workers=1):
    """Gram assembly plus :func:`solve_dual_smo`, keeping support-vector images."""
    images = as_image_stack(images)
    gram = gram_matrix(images, spec, workers=workers)
    return solve_dual_smo(gram, labels, C=C, tol=tol, images=images)


def full_alpha(model):
    """Dual vector over the whole training set (zeros off the support)."""
    out = np.zeros(model.n_train)
    out[model.support] = model.alpha
    return out


def weight_norm_sq(model, gram=None):
    """``||w||^2 = sum_ij a_i a_j y_i y_j K_ij`` over the support vectors.

    ``gram`` is the training Gram; without it the kernel is re-evaluated on
    the stored support images.
    """
    if gram is not None:
        K = _as_gram(gram)[np.ix_(model.support, model.support)]
    else:
        K = gram_matrix(model.support_images, model.spec).entries
    c = model.dual_coef
    return float(c @ K @ c)


def geometric_margin(model, gram=None):
    return 1.0 / np.sqrt(weight_norm_sq(model, gram))


def decision_function(model, X, workers=1):
    """Scores ``sum_i a_i y_i K(x_i, x) + b`` for a stack of images."""
    if model.support_images is None or model.spec is None:
        raise ValueError("model was trained without images/spec; use decision_from_kernel")
    X = as_image_stack(X)
    if X.shape[1:] != model.support_images.shape[1:]:
        raise ValueError(f"dimension mismatch: {X.shape[1:]} vs {model.support_images.shape[1:]}")
    K = cross_kernel(model.spec, model.support_images, X, workers=workers)
    return model.dual_coef @ K + model.bias


def decision_from_kernel(model, K_train_x):
    """Scores from a precomputed ``(n_train, n_x)`` kernel block against the full training set."""
    K = np.asarray(K_train_x, dtype=np.float64)
    return model.dual_coef @ K[model.support] + model.bias


def sign_labels(scores):
    """Score sign with ties going to +1."""
    return np.where(np.asarray(scores) >= 0, 1, -1)


def predict(model, x):
    """Label in {-1, +1} (0 maps to +1) and the raw score for one image."""
    x = as_image(x)
    score = float(decision_function(model, x[None])[0])
    return (1 if score >= 0 else -1), score
