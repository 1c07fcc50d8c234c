"""Transformation-invariant kernels and SVMs for small images."""
from .data import LabeledDataset, load_idx, make_rotated, make_translated, split, subsample
from .kernels import (KernelSpec, Linear, Locality, Polynomial, avg_fit_kernel, best_fit_kernel,
                      cross_kernel, gram_matrix, kernel_value, locality_kernel, two_layer_locality)
from .pd import is_pd, min_eigenvalue, pd_report, pd_threshold_search
from .svm import (predict, predict_multiclass, solve_dual_smo, train_binary, train_multiclass)
from .transforms import (TransformGroup, identity_group, product_group, rotation_group,
                         translation_group)

__version__ = "0.1.0"

__all__ = [
    "KernelSpec", "LabeledDataset", "Linear", "Locality", "Polynomial", "TransformGroup",
    "avg_fit_kernel", "best_fit_kernel", "cross_kernel", "gram_matrix", "identity_group",
    "is_pd", "kernel_value", "load_idx", "locality_kernel", "make_rotated", "make_translated",
    "min_eigenvalue", "pd_report", "pd_threshold_search", "predict", "predict_multiclass",
    "product_group", "rotation_group", "solve_dual_smo", "split", "subsample", "train_binary",
    "train_multiclass", "translation_group", "two_layer_locality",
]
