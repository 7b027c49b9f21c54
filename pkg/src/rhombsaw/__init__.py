"""Exact computations for the Yang-Baxter weighted self-avoiding walk on rhombic tilings."""

from .weights import LocalState, WeightTable, local_weights, parse_angle, parse_angles, y_star
from .tiling import Domain, build_hexagon, build_rect, build_strip_trunc, build_triangle
from .enumeration import accumulate, observable, rect_partition, two_point
from .transfer import TransferMatrix, strip_partition, yc_strip

__all__ = [
    "LocalState", "WeightTable", "local_weights", "parse_angle", "parse_angles", "y_star",
    "Domain", "build_hexagon", "build_rect", "build_strip_trunc", "build_triangle",
    "accumulate", "observable", "rect_partition", "two_point",
    "TransferMatrix", "strip_partition", "yc_strip",
]

__version__ = "0.1.0"
