"""Layered box tilings, their tangency graphs, growth and separator analysis,
and sphere-packing realisations."""

from .errors import (
    BudgetExceededError,
    DimensionError,
    DisconnectedGraphError,
    InvariantError,
    ParameterError,
    TileGraphError,
    ValidationError,
)
from .graph import Graph, bfs_distances, subdivide
from .growth import ball, diameter, eccentricity, growth_profile, sphere
from .infinite import LocalView, level_for_radius, orthant_ball
from .packing import (
    CubePacking,
    SpherePacking,
    check_neat,
    cube_packing,
    sphere_pack,
    star_spheres,
    validate_packing,
)
from .separators import (
    annulus_flow,
    annulus_path_certificate,
    disjoint_path_count,
    min_annular_separator,
    project,
)
from .tangency import TangencyGraph, alpha_stats, brute_force_tangency, build_tangency_graph
from .tiling import (
    GammaSequence,
    Tile,
    Tiling,
    gamma_pqh,
    growth_degree,
    identity_tiling,
    layered_tiling,
    power_tiling,
    s_tradeoff,
    size_formula,
    tensor,
    tensor_power,
    tile_product,
    tiling_power,
    validate_tiling,
)

__version__ = "0.1.0"
