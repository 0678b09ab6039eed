"""Regular trees, their boundary rays and automorphism dynamics."""

from hypercross.tree_boundary.automorphism import (
    AxisShift,
    DynamicsClass,
    PortraitAutomorphism,
    TreeAutomorphism,
    child_swap,
    classify_automorphism,
)
from hypercross.tree_boundary.dynamics import (
    AtomSpace,
    collapsing_limit,
    conical_witness,
    gerasimov_limit,
    interpolated_ray,
    ray_triple_geodesic,
)
from hypercross.tree_boundary.rays import (
    BoundaryPoint,
    RegularTreeModel,
    VisualMetric,
    approximating_subtree,
    boundary_crossratio,
    ray_median,
)

__all__ = [
    "AtomSpace", "AxisShift", "BoundaryPoint", "DynamicsClass", "PortraitAutomorphism",
    "RegularTreeModel", "TreeAutomorphism", "VisualMetric", "approximating_subtree",
    "boundary_crossratio", "child_swap", "classify_automorphism", "collapsing_limit",
    "conical_witness", "gerasimov_limit", "interpolated_ray", "ray_median", "ray_triple_geodesic",
]
