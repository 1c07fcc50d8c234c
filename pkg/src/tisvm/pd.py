"""Positive-definiteness diagnostics for Gram matrices.

The eigenvalue oracle decides definiteness; Gershgorin strict diagonal
dominance is reported alongside as the conservative sufficient condition.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh

from .kernels import GramMatrix, KernelSpec, gram_matrix
from .transforms import as_image_stack

PD_RTOL = 1e-10
MAJORITY_DRAWS = 5


def _matrix(gram):
    a = np.asarray(gram.entries if isinstance(gram, GramMatrix) else gram, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def gershgorin_pd(gram):
    """True iff every row has ``K_ii > sum_{j != i} |K_ij|`` (positive, strictly dominant diagonal)."""
    a = _matrix(gram)
    diag = np.diag(a)
    radii = np.abs(a).sum(axis=1) - np.abs(diag)
    return bool(np.all(diag > radii))


def min_eigenvalue(gram, tol=1e-10):
    """Smallest eigenvalue from a dense symmetric eigensolver.

    LAPACK's ``syevr`` resolves eigenvalues to roughly machine precision times
    the matrix norm, well inside ``tol`` for the matrix sizes used here.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = _matrix(gram)
    if not np.all(np.isfinite(a)):
        raise ValueError("Gram matrix has non-finite entries")
    if a.shape[0] == 0:
        raise ValueError("empty matrix")
    return float(eigvalsh(a, subset_by_index=[0, 0], check_finite=False)[0])


def is_pd(gram):
    """Eigenvalue-oracle decision with tolerance ``1e-10 * n``."""
    a = _matrix(gram)
    return min_eigenvalue(a) > PD_RTOL * a.shape[0]


@dataclass(frozen=True)
class PdReport:
    gershgorin_pass: bool
    min_eigenvalue: float
    is_pd: bool
    n: int
    spec_digest: str = ""


def pd_report(gram):
    a = _matrix(gram)
    lam = min_eigenvalue(a)
    digest = gram.spec_digest.hex() if isinstance(gram, GramMatrix) else ""
    return PdReport(gershgorin_pd(a), lam, lam > PD_RTOL * a.shape[0], a.shape[0], digest)


def auto_sample_count(m, beta, c=1.0):
    """``floor(c * m ** (1/2 - beta))``, at least 1."""
    if not 0 < beta < 0.5:
        raise ValueError("beta must lie in (0, 1/2)")
    return max(1, int(math.floor(c * m ** (0.5 - beta))))


@dataclass(frozen=True)
class PdTrialConfig:
    """Monte-Carlo setup for the Gaussian-pixel model.

    ``n=None`` derives the sample count from ``beta`` and ``c`` via
    :func:`auto_sample_count`.
    """

    m1: int
    m2: int
    spec: KernelSpec
    n: int | None = 5
    trials: int = 100
    seed: int = 0
    beta: float | None = None
    c: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n is None and self.beta is None:
            raise ValueError("give n or beta")
        if self.n is not None and self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def sample_count(self):
        if self.n is not None:
            return self.n
        return auto_sample_count(self.m1 * self.m2, self.beta, self.c)


@dataclass
class TrialResult:
    pd_fraction: float
    min_eigenvalues: np.ndarray = field(repr=False)
    gershgorin_fraction: float = 0.0


def _trial(config, index):
    rng = np.random.default_rng([config.seed, index])
    images = rng.standard_normal((config.sample_count, config.m1, config.m2))
    a = gram_matrix(images, config.spec).entries
    return min_eigenvalue(a), gershgorin_pd(a)


def run_pd_trials(config):
    """All trial outcomes; trial ``t`` draws from ``default_rng([seed, t])``."""
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            out = list(pool.map(lambda t: _trial(config, t), range(config.trials)))
    else:
        out = [_trial(config, t) for t in range(config.trials)]
    lams = np.array([o[0] for o in out])
    n = config.sample_count
    return TrialResult(float(np.mean(lams > PD_RTOL * n)), lams,
                       float(np.mean([o[1] for o in out])))


def pd_probability_trial(config):
    """Fraction of i.i.d. N(0, 1) datasets whose Gram is positive definite."""
    return run_pd_trials(config).pd_fraction


def pd_threshold_search(dataset, spec, seed=0, trials=MAJORITY_DRAWS, gram=None, workers=1):
    """Largest subsample size ``n`` whose Gram is PD by majority vote over ``trials`` draws.

    The Gram over the whole dataset is computed once; subsample Grams are its
    principal submatrices.  Sizes are probed by doubling from 2, then bisected
    between the last PD and first non-PD size.  Returns the dataset size if
    every probe stays PD.
    """
    images = as_image_stack(dataset, "dataset")
    total = len(images)
    if total < 2:
        raise ValueError("threshold search needs at least two images")
    full = (gram if gram is not None else gram_matrix(images, spec, workers=workers)).entries
    if full.shape[0] != total:
        raise ValueError("precomputed Gram does not match the dataset")

    def passes(n):
        votes = 0
        for t in range(trials):
            rng = np.random.default_rng([seed, n, t])
            idx = rng.choice(total, size=n, replace=False)
            votes += min_eigenvalue(full[np.ix_(idx, idx)]) > PD_RTOL * n
        return 2 * votes > trials

    if not passes(1):
        return 0
    lo, hi = 1, None
    n = 2
    while n <= total:
        if passes(n):
            lo = n
            n *= 2
        else:
            hi = n
            break
    if hi is None:
        if lo == total or passes(total):
            return total
        hi = total
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo
