"""Polynomial-reproducing simplex-spline spaces from regular fine zonotopal tilings."""

from .construction import (
    ConstructionState,
    LinkRegion,
    brute_force_regular_tiling,
    chk_membership,
    incremental_build,
    link_region,
    weighted_delaunay,
)
from .exact import (
    GeometryError,
    HeightFunction,
    NonGenericHeightError,
    PointConfig,
    det_plus,
    det_sub,
    is_affine_basis,
    lifted_det_sign,
    random_generic_height,
    validate_generic_height,
)
from .query import (
    EvalGraph,
    NonGenericPointError,
    OrientationCycleError,
    build_eval_graph,
    edge_direction,
    eval_graph_run,
    locate_zero,
    orient_graph,
    supported_tiles,
)
from .splines import (
    Polynomial,
    PolarForm,
    blossom,
    eval_polar,
    eval_spline,
    knot_insertion_lhs_rhs,
    reproduce,
)
from .tiling import (
    AdjacencyGraph,
    Facet,
    Tile,
    ZonotopalTiling,
    build_adjacency,
    classify_facet,
    facets_of,
    induced_tiling,
    shared_facet,
    verify_tiling,
)

from .io import load_config, load_tiling, save_config, save_tiling

__version__ = "0.1.0"

__all__ = [
    "AdjacencyGraph",
    "blossom",
    "brute_force_regular_tiling",
    "build_adjacency",
    "build_eval_graph",
    "chk_membership",
    "classify_facet",
    "ConstructionState",
    "det_plus",
    "det_sub",
    "edge_direction",
    "eval_graph_run",
    "eval_polar",
    "eval_spline",
    "EvalGraph",
    "Facet",
    "facets_of",
    "GeometryError",
    "HeightFunction",
    "incremental_build",
    "induced_tiling",
    "is_affine_basis",
    "knot_insertion_lhs_rhs",
    "lifted_det_sign",
    "link_region",
    "LinkRegion",
    "load_config",
    "load_tiling",
    "locate_zero",
    "NonGenericHeightError",
    "NonGenericPointError",
    "orient_graph",
    "OrientationCycleError",
    "PointConfig",
    "PolarForm",
    "Polynomial",
    "random_generic_height",
    "reproduce",
    "save_config",
    "save_tiling",
    "shared_facet",
    "supported_tiles",
    "Tile",
    "validate_generic_height",
    "verify_tiling",
    "weighted_delaunay",
    "ZonotopalTiling",
]
