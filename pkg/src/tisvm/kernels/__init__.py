from .base import linear_kernel, poly_kernel
from .gram import (GramMatrix, cross_kernel, dataset_fingerprint, gram_matrix,
                   load_gram, save_gram)
from .invariant import (avg_fit_kernel, best_fit_kernel, compose_invariant_locality,
                        exhaustive_block, kernel_block, kernel_function, kernel_value,
                        max_shifted_dot, shifted_dots)
from .locality import layer_maps, locality_from_products, locality_kernel
from .spec import (KernelSpec, Linear, Locality, LocalityLayer, Polynomial,
                   top_layer, two_layer_locality)

__all__ = [
    "GramMatrix", "KernelSpec", "Linear", "Locality", "LocalityLayer", "Polynomial",
    "avg_fit_kernel", "best_fit_kernel", "compose_invariant_locality", "cross_kernel",
    "dataset_fingerprint", "exhaustive_block", "gram_matrix", "kernel_block",
    "kernel_function", "kernel_value", "layer_maps", "linear_kernel", "load_gram",
    "locality_from_products", "locality_kernel", "max_shifted_dot", "poly_kernel",
    "save_gram", "shifted_dots", "top_layer", "two_layer_locality",
]
