"""Screening-Selection model selection for sparse convex-loss models."""

from .data import (CoefficientVector, Dataset, LambdaGrid, SupportSet, TrueModel,
                   load_csv, make_dataset, standardize_design, validate_dataset)
from .losses import (LossFamily, logistic_convexity_constant, loss_family,
                     loss_gradient, loss_value)
from .refit import RefitCache, RefitResult, null_loss, refit_ml
from .selection import (GicTrace, NestedFamily, SelectionResult, gic,
                        nested_family, safest_lambda, select_ss, select_ssnet,
                        threshold_lasso)
from .solver import (LassoFit, SolverConfig, default_lambda_grid, fit_lasso,
                     fit_lasso_path, kkt_residual)
from .theory import (BoundConstants, TheoryReport, admissible_lambda_interval,
                     compatibility_factor, compute_delta, compute_delta_k,
                     empirical_bound_validation, scif_estimate,
                     selection_error_bound, subgaussian_tail_check, theory_report)

__version__ = "0.1.0"

__all__ = [
    "BoundConstants", "CoefficientVector", "Dataset", "GicTrace", "LambdaGrid",
    "LassoFit", "LossFamily", "NestedFamily", "RefitCache", "RefitResult",
    "SelectionResult", "SolverConfig", "SupportSet", "TheoryReport", "TrueModel",
    "admissible_lambda_interval", "compatibility_factor", "compute_delta",
    "compute_delta_k", "default_lambda_grid", "empirical_bound_validation",
    "fit_lasso", "fit_lasso_path", "gic", "kkt_residual", "load_csv",
    "logistic_convexity_constant", "loss_family", "loss_gradient", "loss_value",
    "make_dataset", "nested_family", "null_loss", "refit_ml", "safest_lambda",
    "scif_estimate", "select_ss", "select_ssnet", "selection_error_bound",
    "standardize_design", "subgaussian_tail_check", "theory_report",
    "threshold_lasso", "validate_dataset",
]
