"""Reverse Loomis-Whitney constants of rational convex polytopes."""
from .exact import Enclosure, fmt, to_fraction
from .fixtures import load_zoo, zoo_names
from .frames import (
    Frame,
    PseudoFrame,
    SearchConfig,
    SearchResult,
    crosspolytope_edge_frame,
    heuristic_search,
    lambda_ratio,
    lambda_ratio_exact,
    lw_approx,
    lw_exact_2d,
    min_box,
    min_perimeter_rect_2d,
    near_normal_basis,
    grid_shell,
    pseudo_average,
    psi,
    random_frame,
    structured_search,
)
from .polytope import (
    HPolytope,
    VPolytope,
    as_h,
    as_v,
    facets,
    load_polytope,
    scale_to_unit_surface,
    summary,
    surface_area,
    volume,
)
from .zonotope import Zonotope, projection_area, projection_area_rational, projection_body, zhang_check

__all__ = [
    "Enclosure", "fmt", "to_fraction", "load_zoo", "zoo_names", "Frame", "PseudoFrame",
    "SearchConfig", "SearchResult", "crosspolytope_edge_frame", "heuristic_search", "lambda_ratio",
    "lambda_ratio_exact", "lw_approx", "lw_exact_2d", "min_box", "min_perimeter_rect_2d",
    "near_normal_basis", "grid_shell", "pseudo_average", "psi", "random_frame", "structured_search",
    "HPolytope", "VPolytope", "as_h", "as_v", "facets", "load_polytope", "scale_to_unit_surface",
    "summary", "surface_area", "volume", "Zonotope", "projection_area", "projection_area_rational",
    "projection_body", "zhang_check",
]
