from .augment import augment_dataset
from .io import load_model, model_summary, save_model
from .multiclass import (MulticlassModel, binary_models, pairwise_scores, predict_multiclass,
                         train_multiclass, vote)
from .smo import (HARD_MARGIN_C, SingleClassError, SvmModel, decision_from_kernel,
                  decision_function, full_alpha, geometric_margin, kkt_violation, predict,
                  sign_labels, solve_dual_smo, train_binary, weight_norm_sq)

__all__ = [
    "HARD_MARGIN_C", "MulticlassModel", "SingleClassError", "SvmModel", "augment_dataset",
    "binary_models", "decision_from_kernel", "decision_function", "full_alpha",
    "geometric_margin", "kkt_violation", "load_model", "model_summary", "pairwise_scores",
    "predict", "predict_multiclass", "save_model", "sign_labels", "solve_dual_smo",
    "train_binary", "train_multiclass", "vote", "weight_norm_sq",
]
