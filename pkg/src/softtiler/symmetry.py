"""Transformation matrices acting on half-tangents and finite point groups."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from .tiling_core import builtin_e2, reference_nodal_structure

MATCH_TOL = 1e-9
R2 = 1.0 / np.sqrt(2.0)

T_B = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
T_C = np.array([[-0.5, -0.5, R2], [-0.5, -0.5, -R2], [R2, -R2, 0.0]])
T_D1 = np.array([[-0.5, -0.5, R2], [-0.5, -0.5, -R2], [-R2, R2, 0.0]])
T_D2 = np.array([[-0.5, -0.5, -R2], [-0.5, -0.5, R2], [-R2, R2, 0.0]])
SWAP_XY = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
MIRROR_Z = np.diag([1.0, 1.0, -1.0])

MODES = ("octahedral", "tetrahedral")

for _m in (T_B, T_C, T_D1, T_D2, SWAP_XY, MIRROR_Z):
    _m.setflags(write=False)


def check_orthogonal(m, tol=1e-12):
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    if np.abs(m.T @ m - np.eye(3)).max() > tol:
        raise ValueError("matrix is not orthogonal")
    if abs(abs(np.linalg.det(m)) - 1.0) > tol:
        raise ValueError("determinant is not +-1")
    return m


def paper_matrices(mode):
    """(T_b, T_c, T_d) for the given symmetry mode."""
    if mode == "octahedral":
        return T_B, T_C, T_D1
    if mode == "tetrahedral":
        return T_B, T_C, T_D2
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def nodal_transforms(mode):
    """Maps from the fundamental vector a to (a, b, c, d)."""
    return (np.eye(3),) + tuple(paper_matrices(mode))


def _index_of(m, elements, tol=MATCH_TOL):
    for k, e in enumerate(elements):
        if np.abs(m - e).max() < tol:
            return k
    return -1


@dataclass(frozen=True, eq=False)
class PointGroup:
    elements: tuple
    generators: tuple = ()

    @property
    def order(self):
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, m):
        return _index_of(np.asarray(m, dtype=float), self.elements) >= 0

    def is_closed(self, tol=MATCH_TOL):
        for g in self.elements:
            if _index_of(g.T, self.elements, tol) < 0:
                return False
            for h in self.elements:
                if _index_of(g @ h, self.elements, tol) < 0:
                    return False
        return True

    def to_json(self):
        return [[float(x) for x in g.ravel()] for g in self.elements]


def closure(generators, max_order=96):
    """Breadth-first product closure of ``generators``."""
    gens = [check_orthogonal(g) for g in generators]
    elements = [np.eye(3)]
    frontier = [np.eye(3)]
    while frontier:
        fresh = []
        for g in frontier:
            for h in gens:
                p = h @ g
                if _index_of(p, elements) < 0:
                    elements.append(p)
                    fresh.append(p)
                    if len(elements) > max_order:
                        raise ValueError(
                            f"closure exceeds max_order={max_order}; generators do not "
                            "produce a finite group at this tolerance"
                        )
        frontier = fresh
    return PointGroup(tuple(elements), tuple(gens))


def _same_set(xs, ys, tol=MATCH_TOL):
    if len(xs) != len(ys):
        return False
    used = set()
    for x in xs:
        for k, y in enumerate(ys):
            if k not in used and np.abs(x - y).max() < tol:
                used.add(k)
                break
        else:
            return False
    return True


def maps_set_onto(g, xs, ys, tol=MATCH_TOL):
    return _same_set([g @ x for x in xs], list(ys), tol)


def nodal_stabilizer(group, directions):
    """Elements of ``group`` permuting ``directions`` as a set."""
    dirs = [np.asarray(d, dtype=float) for d in directions]
    keep = [g for g in group.elements if maps_set_onto(g, dirs, dirs)]
    return PointGroup(tuple(keep), group.generators)


def orbit(group, v, tol=MATCH_TOL):
    out = []
    for g in group.elements:
        w = g @ np.asarray(v, dtype=float)
        if all(np.abs(w - u).max() >= tol for u in out):
            out.append(w)
    return out


@lru_cache(maxsize=None)
def dedup_group():
    """Stabilizer of the polyhedral nodal set inside <T_b, T_c, T_d1, S, -I>."""
    big = closure([T_B, T_C, T_D1, SWAP_XY, -np.eye(3)], max_order=96)
    ns = reference_nodal_structure()
    return nodal_stabilizer(big, ns.polyhedral_directions)


@lru_cache(maxsize=None)
def cell_point_group():
    """Orthogonal maps about the cell centre permuting the 24 nodes."""
    cell = builtin_e2()
    P = cell.nodes - cell.center
    base = P[[0, 1, 4]]  # nodes 1, 2, 5: linearly independent about the centre
    inv = np.linalg.inv(base)
    found = []
    # node 1 may go to any node; its edge partners must go to that node's partners
    for i in range(24):
        nbrs = [j - 1 for j in cell.neighbors(i + 1)]
        for j, k in permutations(nbrs, 2):
            G = (inv @ P[[i, j, k]]).T
            if np.abs(G.T @ G - np.eye(3)).max() > 1e-9:
                continue
            Q = P @ G.T
            d = np.linalg.norm(Q[:, None, :] - P[None, :, :], axis=2).min(axis=1)
            if d.max() < 1e-9 and _index_of(G, found) < 0:
                found.append(G)
    return PointGroup(tuple(found))


@lru_cache(maxsize=None)
def cell_tetrahedral_group():
    """Order-24 subgroup of the cell group fixing one tetrahedron of hex-face normals."""
    cell = builtin_e2()
    normals = [cell.face_normal(f) for f in cell.faces if f.kind == "hex"]
    n0 = normals[0]
    tet = [n for n in normals if abs(n @ n0 - 1) < 1e-9 or abs(n @ n0 + 1 / 3) < 1e-9]
    keep = [g for g in cell_point_group().elements if maps_set_onto(g, tet, tet)]
    return PointGroup(tuple(keep))


def cell_group(mode):
    """Symmetries of a single cell's second-order structure for ``mode``."""
    if mode == "octahedral":
        return cell_point_group()
    if mode == "tetrahedral":
        return cell_tetrahedral_group()
    raise ValueError(f"unknown mode {mode!r}")


def node_permutation(g, cell=None):
    """Node index map i -> j induced by a cell-group element about the centre."""
    cell = builtin_e2() if cell is None else cell
    c = cell.center
    moved = (cell.nodes - c) @ g.T + c
    d = np.linalg.norm(moved[:, None, :] - cell.nodes[None, :, :], axis=2)
    j = d.argmin(axis=1)
    if d[np.arange(len(j)), j].max() > 1e-9:
        raise ValueError("matrix is not a symmetry of the cell")
    return {i + 1: int(k) + 1 for i, k in enumerate(j)}
