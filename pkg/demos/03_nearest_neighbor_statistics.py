"""
Nearest-neighbor statistics: geometry, locality, and intrinsic dimension
========================================================================

Functionals of k-nearest-neighbor distances are classic spatial statistics.
Moving one point only disturbs the statistic near that point, and the number
of points that can list a given point among their neighbors is capped by a
cone-covering constant of the ambient space.  These facts are checkable, and
the same machinery carries a maximum-likelihood estimator of intrinsic
dimension.
"""

import numpy as np

from steinlab import check_interaction_rule
from steinlab.models.nearest import (
    NnModel,
    capped_scaled_distance,
    co_neighbor_rule,
    cone_cover_number,
    draw_tiefree,
    levina_bickel,
    neighbor_ranks,
    reverse_neighborhood,
)

rng = np.random.default_rng(23)

# ---------------------------------------------------------------------------
# 1. Tie-free samples and exact neighbor ranks.  The kd-tree route and the
#    brute-force route must name exactly the same ranks.

points, tries = draw_tiefree(rng, 200, 2)
ranks_tree = neighbor_ranks(points, "tree")
ranks_brute = neighbor_ranks(points, "brute")
print(f"200 points in dimension 2 (tie-free, {tries} redraws needed)")
print(f"  kd-tree ranks == brute-force ranks: {np.array_equal(ranks_tree, ranks_brute)}")

# ---------------------------------------------------------------------------
# 2. How many points can claim point j as a near neighbor?  The reverse
#    neighborhood is capped by a constant that depends only on dimension.

k = 2
alpha = cone_cover_number(2)
sizes = [len(reverse_neighborhood(points, j, k)) for j in range(len(points))]
print(f"\nreverse {k}-neighborhoods: largest {max(sizes)},"
      f" geometric cap alpha*k = {alpha * k}  (alpha = {alpha} cones in the plane)")

# ---------------------------------------------------------------------------
# 3. Certify locality: two points interact only when one is among the
#    other's neighbors or they share a close common neighbor.

model = NnModel(n_points=40, dim=2, k=1,
                functional=capped_scaled_distance(2, 40))
report = check_interaction_rule(
    model.statistic,
    co_neighbor_rule(1),
    lambda r: draw_tiefree(r, 40, 2)[0],
    8_000,
    rng,
)
print(f"\nsum of capped nearest-neighbor distances, 40 points")
print(f"  four-point locality test: {report.tested} clean quadruples,"
      f" {report.violations} violations")

# ---------------------------------------------------------------------------
# 4. The same neighbor distances estimate intrinsic dimension: data on a
#    curve reads as 1-dimensional even when embedded in the plane.

t = np.sort(rng.random(500))
curve = np.column_stack([np.cos(3 * t), np.sin(3 * t)])  # an arc in R^2
square = rng.random((500, 2))
print("\nmaximum-likelihood intrinsic dimension (k = 10):")
print(f"  points on an arc      : {levina_bickel(curve, 10):.3f}")
print(f"  points filling a square: {levina_bickel(square, 10):.3f}")
