"""Closed geodesics and lightlike foliations of Lorentzian tori and Klein bottles."""

from ._core import (
    ConfigError,
    FlowError,
    FoliationError,
    Model,
    ModelError,
    ModelRejected,
    SearchError,
    atlas,
    compute_kg,
    geodesic,
    maximize,
    predicted_counts,
    report,
    rotation_number,
    self_intersections,
    shoot,
    survey,
)

__all__ = [
    "ConfigError",
    "FlowError",
    "FoliationError",
    "Model",
    "ModelError",
    "ModelRejected",
    "SearchError",
    "atlas",
    "compute_kg",
    "geodesic",
    "maximize",
    "predicted_counts",
    "report",
    "rotation_number",
    "self_intersections",
    "shoot",
    "survey",
]
