"""Explicit geometry for second-order solutions: edges, faces, cells and tilings."""
from .arcs import ArcEdge, ArcError, arc_edge
from .cellmesh import (
    CellMesh,
    HalfTangentAssignment,
    PropagationError,
    WeldError,
    build_cell_mesh,
    propagate_halftangents,
    weld,
)
from .surface import FaceMesh, MeshDegenerationError, relax_face, seed_disk_mesh
from .tiling import TilingMesh, placement, tile_box

__all__ = [
    "ArcEdge", "ArcError", "arc_edge", "CellMesh", "HalfTangentAssignment",
    "PropagationError", "WeldError", "build_cell_mesh", "propagate_halftangents",
    "weld", "FaceMesh", "MeshDegenerationError", "relax_face", "seed_disk_mesh",
    "TilingMesh", "placement", "tile_box",
]
