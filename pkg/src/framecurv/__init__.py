"""Scalar curvature of Riemannian metrics from orthonormal frames, and its
behaviour when the metric is collapsed along a sub-bundle."""

from .collapse import (CollapseProfile, SplitSpec, classify, collapse_profile,
                       evaluate_profile, npb_indicator, rescale_frame, sign_thresholds,
                       specialized_profile, transform_structure_functions)
from .curvature import (curvature_two_form, scalar_curvature_frame, scalar_curvature_lie,
                        scalar_curvature_oracle)
from .expr import evaluate, parse
from .geometry import AD, FD, ChartManifold, DerivativeEngine, frame_matrix, metric_from_frame
from .structure import lie_bracket, structure_derivative, structure_tensor

__all__ = [
    "AD", "FD", "ChartManifold", "CollapseProfile", "DerivativeEngine", "SplitSpec",
    "classify", "collapse_profile", "curvature_two_form", "evaluate", "evaluate_profile",
    "frame_matrix", "lie_bracket", "metric_from_frame", "npb_indicator", "parse",
    "rescale_frame", "scalar_curvature_frame", "scalar_curvature_lie",
    "scalar_curvature_oracle", "sign_thresholds", "specialized_profile",
    "structure_derivative", "structure_tensor", "transform_structure_functions",
]
