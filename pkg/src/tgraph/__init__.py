"""Convex tilings of polygons, their t-graphs and the dimer model."""
from .areamap import InterceptModel, blow_air_check, d_psi, psi, psi_inverse
from .dimer import (
    KasteleynMatrix,
    canonical_matching,
    edge_probability,
    enumerate_matchings,
    kasteleyn_from_tiling,
    pair_probability,
    verify_kasteleyn,
)
from .geom import AreaForm, Direction, Line, TileShape, area_form, same_cone, signed_area
from .homology import enumerate_sectors, find_sector_point, homology_tiles, solve_homology
from .render import render_svg
from .solvers import check_2_nondegenerate, prescribe_shapes, reconstruct_from_graph
from .tiling import TGraph, Tiling, build_graph, combinatorially_equivalent, intercepts, validate

__version__ = "0.1.0"
