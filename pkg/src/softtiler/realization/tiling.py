"""Placement of cell copies in the tiling and box tiling of a cell mesh."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.spatial import cKDTree

from ..symmetry import T_C
from ..tiling_core import bcc_lattice, builtin_e2, cubic_lattice, face_translations

FACE_MATCH_TOL = 1e-6


@lru_cache(maxsize=None)
def _twin_offset():
    # centre displacement of the cell's image under x -> T_c x (node 1 is the origin)
    c = builtin_e2().center
    return T_C @ c - c


def _in_cubic(p):
    B = cubic_lattice().basis
    n = np.linalg.solve(B.T, p)
    return np.abs(n - np.round(n)).max() < 1e-9


def placement(mode, p):
    """Affine map (L, t) taking the reference cell to the cell centred at centre + p."""
    p = np.asarray(p, dtype=float)
    if mode == "octahedral" or _in_cubic(p):
        return np.eye(3), p
    if mode == "tetrahedral":
        return T_C.copy(), p - _twin_offset()
    raise ValueError(f"unknown mode {mode!r}")


def neighbor_maps(mode):
    """Per face of the reference cell: the placement of the cell across it."""
    return [placement(mode, d) for d in face_translations(builtin_e2())]


@dataclass(frozen=True, eq=False)
class Adjacency:
    i: int
    j: int
    face_i: int
    face_j: int
    residual: float

    @property
    def matched(self):
        return self.residual <= FACE_MATCH_TOL


@dataclass(frozen=True, eq=False)
class TilingMesh:
    cell: object  # CellMesh
    placements: tuple  # (L, t) per cell
    adjacency: tuple

    def __len__(self):
        return len(self.placements)

    def cell_vertices(self, k):
        L, t = self.placements[k]
        return self.cell.vertices @ L.T + t

    def centers(self):
        c = builtin_e2().center
        return np.array([L @ c + t for L, t in self.placements])

    @property
    def face_matched(self):
        return all(a.matched for a in self.adjacency)

    @property
    def max_face_residual(self):
        return max((a.residual for a in self.adjacency), default=0.0)


def _box_points(lattice, box, fractional):
    if fractional:
        counts = [int(n) for n in box]
        return [np.array(n, dtype=float) @ lattice.basis for n in product(*(range(n) for n in counts))]
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    c = builtin_e2().center
    corners = np.array(list(product(*zip(lo, hi)))) - c
    frac = np.linalg.solve(lattice.basis.T, corners.T).T
    ranges = [range(int(np.floor(frac[:, k].min())) - 1, int(np.ceil(frac[:, k].max())) + 2) for k in range(3)]
    out = []
    for n in product(*ranges):
        p = np.array(n, dtype=float) @ lattice.basis
        q = c + p
        if np.all(q >= lo - 1e-9) and np.all(q <= hi + 1e-9):
            out.append(p)
    return out


def _face_for(cell_mesh, L, direction):
    local = L.T @ direction
    d = face_translations(builtin_e2())
    k = int(np.argmin(np.linalg.norm(d - local, axis=1)))
    if np.linalg.norm(d[k] - local) > 1e-9:
        return None
    return k


def tile_box(cell_mesh, box, lattice=None, fractional=False):
    """Copies of ``cell_mesh`` whose centres lie in ``box``.

    ``box`` is ``(lo, hi)`` Cartesian bounds on the centres, or with
    ``fractional=True`` a triple of cell counts along the lattice basis.
    """
    lattice = bcc_lattice() if lattice is None else lattice
    mode = cell_mesh.mode
    pts = _box_points(lattice, box, fractional)
    pts.sort(key=lambda p: tuple(np.round(p, 9)))
    placements = tuple(placement(mode, p) for p in pts)
    c = builtin_e2().center
    centers = np.array([L @ c + t for L, t in placements]) if placements else np.zeros((0, 3))

    adjacency = []
    for i, j in product(range(len(placements)), repeat=2):
        if j <= i:
            continue
        d = centers[j] - centers[i]
        Li, ti = placements[i]
        Lj, tj = placements[j]
        fi = _face_for(cell_mesh, Li, d)
        fj = _face_for(cell_mesh, Lj, -d)
        if fi is None or fj is None:
            continue
        A = cell_mesh.face_points(fi) @ Li.T + ti
        B = cell_mesh.face_points(fj) @ Lj.T + tj
        if len(A) != len(B):
            res = np.inf
        else:
            res = max(cKDTree(B).query(A)[0].max(), cKDTree(A).query(B)[0].max())
        adjacency.append(Adjacency(i, j, fi, fj, float(res)))
    return TilingMesh(cell_mesh, placements, tuple(adjacency))
