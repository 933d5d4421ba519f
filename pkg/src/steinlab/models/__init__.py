"""Worked statistics with closed-form or graphical normality certificates."""

from .coverage import (
    CoverageModel,
    GridArea,
    ProbeArea,
    ball_volume,
    coverage_bound,
    proximity_rule,
)
from .nearest import (
    NnModel,
    capped_scaled_distance,
    co_neighbor_rule,
    cone_cover_number,
    draw_tiefree,
    levina_bickel,
    neighbor_ranks,
    neighborhood_change,
    nn_bound,
    reverse_neighborhood,
)
from .occupancy import (
    OccupancyModel,
    empty_box_count,
    rate_constant,
    same_box_rule,
)
from .quadratic import QuadraticFormModel, goe_like_matrix, quadratic_bound

__all__ = [
    "CoverageModel",
    "GridArea",
    "NnModel",
    "OccupancyModel",
    "ProbeArea",
    "QuadraticFormModel",
    "ball_volume",
    "capped_scaled_distance",
    "co_neighbor_rule",
    "cone_cover_number",
    "coverage_bound",
    "draw_tiefree",
    "empty_box_count",
    "goe_like_matrix",
    "levina_bickel",
    "neighbor_ranks",
    "neighborhood_change",
    "nn_bound",
    "proximity_rule",
    "quadratic_bound",
    "rate_constant",
    "reverse_neighborhood",
    "same_box_rule",
]
