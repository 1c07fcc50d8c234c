"""Experiment harness: method names -> kernel specs, accuracy tables, PD reports, toy demo.

Method names
------------
``SVM``      polynomial kernel ``(1 + gamma <x, y>) ** d``
``L``        two-layer locality kernel (window ``k1 + 1``, ``(k1 - 1) // 2`` zero
             padding, stride 1, degrees ``d1`` then ``d2``)
``TI``       best-fit polynomial over all cyclic translations
``RI``       best-fit polynomial over ``n_angles`` rotations
``TI-RI``    best-fit polynomial over rotations followed by translations
``L-TI``, ``L-RI``, ``L-TI-RI``  the locality kernel as base of the matching best-fit kernel
``RI-avg``   average-fit polynomial over rotations

For PD reports the additional names ``linear``, ``TI-linear`` (normalized
linear base) and ``TI-poly`` (alias of ``TI``) are accepted.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import LabeledDataset, load_dataset, load_idx, make_rotated, make_translated, split, subsample
from .kernels import (KernelSpec, Linear, Polynomial, cross_kernel, gram_matrix,
                      two_layer_locality)
from .pd import PdTrialConfig, pd_threshold_search, run_pd_trials
from .svm import (augment_dataset, binary_models, decision_function, geometric_margin,
                  predict_multiclass, train_binary, train_multiclass)
from .transforms import identity_group, product_group, rotation_group, translation_group

log = logging.getLogger(__name__)

METHODS = ("SVM", "L", "TI", "RI", "L-TI", "L-RI", "TI-RI", "L-TI-RI", "RI-avg")
PD_METHODS = METHODS + ("linear", "TI-linear", "TI-poly")


@dataclass(frozen=True)
class KernelParams:
    gamma: float | None = None
    degree: int = 8
    k1: int = 5
    d1: int = 2
    d2: int = 4
    n_angles: int = 36
    interp: str = "bilinear"
    locality_normalized: bool = True
    translation_window: int | None = None


def method_spec(name, params=KernelParams()):
    """Kernel spec for a method name; see the module docstring for the mapping."""
    poly = Polynomial(params.gamma, params.degree)
    loc = two_layer_locality(params.k1, params.d1, params.d2, params.locality_normalized)
    w = params.translation_window
    trans = translation_group(w, w) if w is not None else translation_group()
    rot = rotation_group(params.n_angles, params.interp)
    table = {
        "SVM": (poly, "none", identity_group()),
        "L": (loc, "none", identity_group()),
        "TI": (poly, "best", trans),
        "TI-poly": (poly, "best", trans),
        "RI": (poly, "best", rot),
        "TI-RI": (poly, "best", product_group(rot, trans)),
        "L-TI": (loc, "best", trans),
        "L-RI": (loc, "best", rot),
        "L-TI-RI": (loc, "best", product_group(rot, trans)),
        "RI-avg": (poly, "average", rot),
        "linear": (Linear(True), "none", identity_group()),
        "TI-linear": (Linear(True), "best", trans),
    }
    if name not in table:
        raise ValueError(f"unknown method {name!r}; expected one of {PD_METHODS}")
    base, mode, group = table[name]
    return KernelSpec(base, mode, group)


@dataclass(frozen=True)
class DataConfig:
    """Where the training pool and test set come from and how they are transformed.

    Without explicit test files, ``test_size`` images are held out from the
    source by a stratified split drawn with ``split_seed``.
    """

    images: str = ""
    labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    cache: str = ""
    test_cache: str = ""
    test_size: int = 1000
    split_seed: int = 0
    transpose: bool = False
    transform: str = "none"
    canvas: tuple = (64, 64)
    noise_sigma: float = 0.1
    transform_seed: int = 1
    test_transform_seed: int = 2
    limit: int = 0


def _load_source(images, labels, cache, transpose):
    if cache:
        return load_dataset(cache)
    if not images or not labels:
        raise ValueError("data config needs images+labels paths or a cache file")
    return load_idx(images, labels, transpose=transpose)


def _transform(dataset, cfg, seed):
    if cfg.transform == "none":
        return dataset
    if cfg.transform == "translated":
        return make_translated(dataset, tuple(cfg.canvas), cfg.noise_sigma, seed)
    if cfg.transform == "rotated":
        return make_rotated(dataset, cfg.noise_sigma, seed)
    raise ValueError(f"unknown transform {cfg.transform!r}")


def load_experiment_data(cfg):
    """``(train_pool, test_set)`` for a :class:`DataConfig`."""
    source = _load_source(cfg.images, cfg.labels, cfg.cache, cfg.transpose)
    if cfg.test_images or cfg.test_cache:
        pool = source
        test = _load_source(cfg.test_images, cfg.test_labels, cfg.test_cache, cfg.transpose)
        if cfg.test_size and cfg.test_size < len(test):
            test = subsample(test, cfg.test_size, seed=cfg.split_seed)
    else:
        pool, test = split(source, cfg.test_size, seed=cfg.split_seed)
    if cfg.limit and cfg.limit < len(pool):
        pool = subsample(pool, cfg.limit, seed=cfg.split_seed)
    return _transform(pool, cfg, cfg.transform_seed), _transform(test, cfg, cfg.test_transform_seed)


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    methods: tuple = ("SVM",)
    train_sizes: tuple = (100,)
    repetitions: int = 5
    seed: int = 0
    C: float = 1.0
    tol: float = 1e-3
    kernel: KernelParams = field(default_factory=KernelParams)
    workers: int = 1
    stratified: bool = True

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if any(n < 1 for n in self.train_sizes):
            raise ValueError("train sizes must be positive")
        for name in self.methods:
            if name not in METHODS:
                raise ValueError(f"unknown method {name!r}")


@dataclass(frozen=True)
class RepetitionResult:
    method: str
    train_size: int
    repetition: int
    accuracy: float
    seconds: float
    max_kkt_violation: float
    n_models: int


@dataclass(frozen=True)
class ResultRow:
    method: str
    train_size: int
    mean_accuracy: float
    std_accuracy: float
    seconds: float
    repetitions: int


@dataclass
class ResultTable:
    rows: list
    runs: list

    def row(self, method, train_size):
        for r in self.rows:
            if r.method == method and r.train_size == train_size:
                return r
        raise KeyError((method, train_size))

    def accuracies(self, method, train_size):
        return [r.accuracy for r in self.runs if r.method == method and r.train_size == train_size]

    def deterministic_view(self):
        """Everything except wall-clock times."""
        return ([(r.method, r.train_size, r.mean_accuracy, r.std_accuracy, r.repetitions) for r in self.rows],
                [(r.method, r.train_size, r.repetition, r.accuracy, r.max_kkt_violation) for r in self.runs])

    def to_csv(self, fh=None):
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf)
        w.writerow(["method", "train_size", "mean_accuracy", "std_accuracy", "seconds", "repetitions"])
        for r in self.rows:
            w.writerow([r.method, r.train_size, f"{r.mean_accuracy:.4f}", f"{r.std_accuracy:.4f}",
                        f"{r.seconds:.3f}", r.repetitions])
        return None if fh is not None else buf.getvalue()

    def to_text(self):
        """Aligned table: one line per method, one ``mean +- std`` column per train size."""
        sizes = sorted({r.train_size for r in self.rows})
        methods = list(dict.fromkeys(r.method for r in self.rows))
        head = ["Method"] + [f"n={n}" for n in sizes]
        body = []
        for m in methods:
            cells = [m]
            for n in sizes:
                try:
                    r = self.row(m, n)
                    cells.append(f"{r.mean_accuracy:6.2f} +- {r.std_accuracy:5.2f}")
                except KeyError:
                    cells.append("-")
            body.append(cells)
        widths = [max(len(row[k]) for row in [head] + body) for k in range(len(head))]
        lines = ["  ".join(c.ljust(w) if k == 0 else c.rjust(w) for k, (c, w) in enumerate(zip(row, widths)))
                 for row in [head] + body]
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines) + "\n"


def repetition_seed(seed, train_size, repetition):
    return [seed, train_size, repetition]


def run_experiment(config, data=None):
    """Accuracy table over methods x train sizes x repetitions.

    Each repetition draws one stratified training subset (shared by all
    methods) from the pool, trains a one-vs-one model and scores it on the
    fixed test set.  ``data`` may pass a preloaded ``(pool, test)`` pair.
    """
    pool, test = data if data is not None else load_experiment_data(config.data)
    runs = []
    for name in config.methods:
        spec = method_spec(name, config.kernel)
        for n in config.train_sizes:
            for rep in range(config.repetitions):
                rng_seed = int(np.random.SeedSequence(repetition_seed(config.seed, n, rep)).generate_state(1)[0])
                train = subsample(pool, n, seed=rng_seed, stratified=config.stratified)
                t0 = time.perf_counter()
                model = train_multiclass(train.images, train.labels, spec, C=config.C,
                                         tol=config.tol, workers=config.workers)
                pred = predict_multiclass(model, test.images, workers=config.workers)
                seconds = time.perf_counter() - t0
                acc = 100.0 * float(np.mean(pred == test.labels))
                kkt = max(m.kkt_violation for m in binary_models(model))
                runs.append(RepetitionResult(name, n, rep, acc, seconds, kkt, len(model.models)))
                log.info("%s n=%d rep=%d acc=%.2f (%.1fs)", name, n, rep, acc, seconds)
    rows = []
    for name in config.methods:
        for n in config.train_sizes:
            sel = [r for r in runs if r.method == name and r.train_size == n]
            accs = np.array([r.accuracy for r in sel])
            rows.append(ResultRow(name, n, float(accs.mean()), float(accs.std()),
                                  float(sum(r.seconds for r in sel)), len(sel)))
    return ResultTable(rows, runs)


# --------------------------------------------------------------------- PD report

@dataclass(frozen=True)
class PdReportConfig:
    methods: tuple = ("TI-linear",)
    gaussian_dims: tuple = ((8, 8), (16, 16), (32, 32))
    gaussian_n: int = 5
    gaussian_trials: int = 100
    threshold_subset: int = 0
    threshold_trials: int = 5
    seed: int = 0
    data: DataConfig | None = None
    kernel: KernelParams = field(default_factory=KernelParams)
    workers: int = 1


PD_REPORT_FIELDS = ("kind", "method", "spec_digest", "dataset", "m", "n", "trials", "pd_fraction",
                    "gershgorin_fraction", "min_eig_mean", "min_eig_min", "min_eig_max", "n_star")


def run_pd_report(config):
    """Rows for the Gaussian-model PD sweep and (optionally) dataset PD thresholds."""
    rows = []
    for name in config.methods:
        spec = method_spec(name, config.kernel)
        for m1, m2 in config.gaussian_dims:
            trial = PdTrialConfig(m1, m2, spec, n=config.gaussian_n, trials=config.gaussian_trials,
                                  seed=config.seed, workers=config.workers)
            res = run_pd_trials(trial)
            lams = res.min_eigenvalues
            rows.append({
                "kind": "gaussian", "method": name, "spec_digest": spec.hexdigest()[:16],
                "dataset": "iid-normal", "m": m1 * m2, "n": config.gaussian_n,
                "trials": config.gaussian_trials, "pd_fraction": res.pd_fraction,
                "gershgorin_fraction": res.gershgorin_fraction, "min_eig_mean": float(lams.mean()),
                "min_eig_min": float(lams.min()), "min_eig_max": float(lams.max()), "n_star": "",
            })
    if config.threshold_subset and config.data is not None:
        pool, _ = load_experiment_data(config.data)
        subset = subsample(pool, min(config.threshold_subset, len(pool)), seed=config.seed)
        for name in config.methods:
            spec = method_spec(name, config.kernel)
            n_star = pd_threshold_search(subset.images, spec, seed=config.seed,
                                         trials=config.threshold_trials, workers=config.workers)
            rows.append({
                "kind": "threshold", "method": name, "spec_digest": spec.hexdigest()[:16],
                "dataset": subset.provenance.get("transform", "none"),
                "m": int(np.prod(subset.shape)), "n": len(subset), "trials": config.threshold_trials,
                "pd_fraction": "", "gershgorin_fraction": "", "min_eig_mean": "",
                "min_eig_min": "", "min_eig_max": "", "n_star": n_star,
            })
    return rows


def pd_report_csv(rows, fh=None):
    buf = fh if fh is not None else io.StringIO()
    w = csv.DictWriter(buf, fieldnames=PD_REPORT_FIELDS)
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return None if fh is not None else buf.getvalue()


# --------------------------------------------------------------------- toy example

TOY_X = np.array([[[1.0, 2.0]], [[5.0, 2.0]]])
TOY_Y = np.array([1, -1])


@dataclass
class ToyDemoResult:
    augmented: object
    average: object
    best_fit: object
    grid: np.ndarray = field(repr=False)
    scores: dict = field(repr=False)
    margins: dict = field(default_factory=dict)
    augmented_line: tuple = ()

    def sign_agreement(self, threshold=1e-3):
        """``(agreeing, compared)`` grid points between augmented and average-fit models."""
        a, b = self.scores["augmented"], self.scores["average"]
        mask = (np.abs(a) > threshold) & (np.abs(b) > threshold)
        return int(np.sum(np.sign(a[mask]) == np.sign(b[mask]))), int(mask.sum())

    def report(self):
        w1, w2, b = self.augmented_line
        agree, total = self.sign_agreement()
        return "\n".join([
            "toy set: x1=(1,2) y=+1, x2=(5,2) y=-1; group = cyclic shifts of a 1x2 image (swap)",
            f"augmented linear SVM boundary: {w1:+.6f} x(1) {w2:+.6f} x(2) {b:+.6f} = 0"
            f"  ->  x(1) + x(2) = {-b / w1:.6f}",
            f"margin  augmented: {self.margins['augmented']:.6f}",
            f"margin  average-fit: {self.margins['average']:.6f}",
            f"margin  best-fit TI: {self.margins['best_fit']:.6f}",
            f"average-fit vs augmented signs agree on {agree}/{total} grid points (|score| > 1e-3)",
        ]) + "\n"

    def grid_csv(self, fh=None):
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf)
        w.writerow(["x1", "x2", "augmented", "average", "best_fit"])
        for k, (p, q) in enumerate(self.grid):
            w.writerow([f"{p:g}", f"{q:g}"] + [repr(float(self.scores[n][k]))
                                                for n in ("augmented", "average", "best_fit")])
        return None if fh is not None else buf.getvalue()


def toy_grid(lo=0.0, hi=6.0, steps=21):
    ticks = np.linspace(lo, hi, steps)
    return np.array([(p, q) for q in ticks for p in ticks])


def demo_toy_example(C=None, tol=1e-12, steps=21):
    """Train the augmented-linear, average-fit and best-fit TI models on the two-point toy set."""
    group = translation_group()
    base = Linear(normalized=False)
    aug_x, aug_y = augment_dataset(TOY_X, TOY_Y, group)
    aug_spec = KernelSpec(base)
    augmented = train_binary(aug_x, aug_y, aug_spec, C=C, tol=tol)
    size = group.size((1, 2))
    avg_C = None if C is None else C * size
    average = train_binary(TOY_X, TOY_Y, KernelSpec(base, "average", group), C=avg_C, tol=tol)
    best = train_binary(TOY_X, TOY_Y, KernelSpec(base, "best", group), C=C, tol=tol)

    grid = toy_grid(steps=steps)
    images = grid[:, None, :]
    scores = {name: decision_function(model, images)
              for name, model in (("augmented", augmented), ("average", average), ("best_fit", best))}
    w = augmented.dual_coef @ augmented.support_images.reshape(augmented.n_support, -1)
    margins = {"augmented": geometric_margin(augmented), "average": geometric_margin(average),
               "best_fit": geometric_margin(best)}
    return ToyDemoResult(augmented, average, best, grid, scores, margins,
                         (float(w[0]), float(w[1]), float(augmented.bias)))


def boundary_crossings(grid, scores, steps=21):
    """Zero crossings of the decision values along each grid row, by linear interpolation."""
    pts = grid.reshape(steps, steps, 2)
    vals = np.asarray(scores).reshape(steps, steps)
    out = []
    for row_pts, row_vals in zip(pts, vals):
        for k in range(steps - 1):
            a, b = row_vals[k], row_vals[k + 1]
            if a == 0:
                out.append(tuple(row_pts[k]))
            elif a * b < 0:
                t = a / (a - b)
                out.append(tuple(row_pts[k] + t * (row_pts[k + 1] - row_pts[k])))
    return out


def as_dict(obj):
    return asdict(obj)


__all__ = [
    "DataConfig", "ExperimentConfig", "KernelParams", "METHODS", "PD_METHODS",
    "PdReportConfig", "ResultTable", "ToyDemoResult", "boundary_crossings",
    "demo_toy_example", "load_experiment_data", "method_spec", "pd_report_csv",
    "run_experiment", "run_pd_report", "toy_grid",
]
