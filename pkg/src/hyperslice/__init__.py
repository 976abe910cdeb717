"""Verify, count and search for hyperplane collections slicing the edges of the hypercube."""

__version__ = "0.1.0"

from .core import (
    Edge,
    Hyperplane,
    PlaneSet,
    count_sliced,
    format_planes,
    parse_planes,
    slices,
    verify_full,
)
from .reduced import (
    Composition,
    ReducedGrid,
    build_grid,
    reduce_plane,
    reduced_dot,
    sliced_reduced_edges,
    weighted_sliced_count,
)
from .bounds import lookup_snk, subadditive_chain, upper_bound

__all__ = [
    "Composition", "Edge", "Hyperplane", "PlaneSet", "ReducedGrid", "build_grid", "count_sliced",
    "format_planes", "lookup_snk", "parse_planes", "reduce_plane", "reduced_dot", "slices",
    "sliced_reduced_edges", "subadditive_chain", "upper_bound", "verify_full", "weighted_sliced_count",
]
