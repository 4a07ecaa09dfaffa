"""Half-tangent propagation, edge curves, face meshes and the welded cell mesh."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..sphere_solver import worker_count
from ..symmetry import cell_group, node_permutation
from ..tiling_core import builtin_e2, reference_nodal_structure
from .arcs import arc_edge
from .surface import FaceMesh, relax_face, seed_face_mesh, seed_symmetric_mesh
from .tiling import neighbor_maps

WELD_TOL = 1e-6
CONSISTENCY_TOL = 1e-9
CUSP_TOL = 1e-6


class PropagationError(ValueError):
    pass


class WeldError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class HalfTangentAssignment:
    tangents: dict  # (node, neighbour) -> unit tangent at node
    residual: float  # largest disagreement between admissible group elements

    def __getitem__(self, key):
        return self.tangents[key]

    def at(self, node):
        return {j: t for (i, j), t in self.tangents.items() if i == node}


def _group_key(g):
    return tuple(np.round(g.ravel(), 9))


def propagate_halftangents(cell, solution, group=None):
    """Spread node 1's half-tangents over the cell with the cell symmetry group."""
    cell = builtin_e2() if cell is None else cell
    group = cell_group(solution.mode) if group is None else group
    targets = reference_nodal_structure(cell).edge_targets[:3]
    ref = {m: np.asarray(solution.nodal[k], dtype=float) for k, m in enumerate(targets)}

    by_node = {}
    for g in sorted(group.elements, key=_group_key):
        perm = node_permutation(g, cell)
        by_node.setdefault(perm[1], []).append((g, perm))

    tangents = {}
    residual = 0.0
    for n in range(1, len(cell.nodes) + 1):
        if n not in by_node:
            raise PropagationError(f"no group element maps node 1 to node {n}")
        choices = by_node[n]
        g0, p0 = choices[0]
        for m, t in ref.items():
            tangents[(n, p0[m])] = g0 @ t
        for g, p in choices[1:]:
            for m, t in ref.items():
                residual = max(residual, float(np.abs(g @ t - tangents[(n, p[m])]).max()))
    if residual > CONSISTENCY_TOL:
        raise PropagationError(
            f"group elements disagree on the half-tangents (residual {residual:.3g}); "
            f"the solution is not invariant under the {solution.mode} cell group"
        )
    return HalfTangentAssignment(tangents, residual)


def build_edges(cell, assignment, resolution=64):
    out = {}
    for i, j in cell.edges:
        out[(i, j)] = arc_edge(cell.node(i), cell.node(j), assignment[(i, j)], assignment[(j, i)], resolution)
    return out


def face_boundary(face, edges):
    """Concatenated edge samples around the face cycle, plus corner indices in the loop."""
    pts = []
    corners = []
    c = face.cycle
    for k in range(len(c)):
        i, j = c[k], c[(k + 1) % len(c)]
        s = edges[(i, j)].samples if i < j else edges[(j, i)].samples[::-1]
        corners.append(len(pts))
        pts.extend(s[:-1])
    return np.array(pts), corners


def cusp_corners(face, assignment, corners):
    """Loop indices of corners where the two face edges leave in the same direction."""
    c = face.cycle
    out = []
    for k, idx in enumerate(corners):
        n, prev, nxt = c[k], c[k - 1], c[(k + 1) % len(c)]
        if assignment[(n, prev)] @ assignment[(n, nxt)] > 1 - CUSP_TOL:
            out.append(idx)
    return tuple(out)


@dataclass(eq=False)
class CellMesh:
    solution: object
    mode: str
    assignment: HalfTangentAssignment
    edges: dict
    faces: list  # FaceMesh per cell face, outward oriented
    vertices: np.ndarray
    triangles: np.ndarray
    face_ids: np.ndarray
    face_vertex_ids: list
    weld_residual: float
    shared_from: dict  # face index -> partner face index whose mesh was mapped

    def face_points(self, k):
        return self.vertices[np.unique(self.face_vertex_ids[k])]

    def face_areas(self):
        return [f.area() for f in self.faces]

    def area(self):
        return float(sum(self.face_areas()))

    def open_edges(self):
        return _edge_use_violations(self.triangles)

    def planarity_residual(self, k):
        P = self.face_points(k)
        P = P - P.mean(axis=0)
        _, _, vt = np.linalg.svd(P, full_matrices=False)
        return float(np.abs(P @ vt[2]).max())

    def min_angle(self):
        return min(f.min_angle() for f in self.faces)

    def stats(self):
        cell = builtin_e2()
        return {
            "solution": self.solution.name,
            "mode": self.mode,
            "a": [float(x) for x in self.solution.a],
            "vertices": int(len(self.vertices)),
            "triangles": int(len(self.triangles)),
            "total_area": self.area(),
            "face_areas": {f.name: a for f, a in zip(cell.faces, self.face_areas())},
            "planarity_residuals": {f.name: self.planarity_residual(k) for k, f in enumerate(cell.faces)},
            "edge_kinds": {f"{i}-{j}": e.kind for (i, j), e in self.edges.items()},
            "weld_residual": self.weld_residual,
            "open_edges": int(self.open_edges()),
            "min_angle_deg": self.min_angle(),
            "propagation_residual": self.assignment.residual,
        }


def _edge_use_violations(T):
    e = np.sort(np.r_[T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]], axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    return int((counts != 2).sum())


def weld(faces, tol=WELD_TOL):
    """Merge coincident vertices of the face meshes; returns (V, T, face_ids, per-face ids, residual)."""
    V = np.vstack([f.vertices for f in faces])
    offsets = np.cumsum([0] + [len(f.vertices) for f in faces])
    pairs = cKDTree(V).query_pairs(tol, output_type="ndarray")
    n = len(V)
    G = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else coo_matrix((n, n))
    _, label = connected_components(G, directed=False)
    # relabel in order of first appearance
    first = {}
    remap = np.empty(n, dtype=np.int64)
    for k, l in enumerate(label):
        remap[k] = first.setdefault(l, len(first))
    out = np.zeros((len(first), 3))
    out[remap] = V  # the last writer of a cluster wins; clusters are within tol
    residual = float(np.linalg.norm(V - out[remap], axis=1).max()) if n else 0.0
    tris, fids, ids = [], [], []
    for k, f in enumerate(faces):
        local = remap[offsets[k]:offsets[k + 1]]
        ids.append(local)
        tris.append(local[f.triangles])
        fids.append(np.full(len(f.triangles), k))
    return out, np.vstack(tris), np.concatenate(fids), ids, residual


def _face_partner(cell, k, maps):
    """Index of the face mapped onto face k by the neighbour placement across it."""
    L, t = maps[k]
    face = cell.faces[k]
    pts = (cell.nodes[[i - 1 for i in face.cycle]] - t) @ L  # inverse map, L orthogonal
    for j, f in enumerate(cell.faces):
        if len(f.cycle) != len(face.cycle):
            continue
        Q = cell.nodes[[i - 1 for i in f.cycle]]
        if max(np.linalg.norm(Q - p, axis=1).min() for p in pts) < 1e-9:
            return j
    return None


def build_cell_mesh(solution, resolution=64, max_iter=2000, eps=1e-7, threads=None):
    """Closed mesh of the cell realised with arc edges and area-relaxed faces."""
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    cell = builtin_e2()
    assignment = propagate_halftangents(cell, solution)
    edges = build_edges(cell, assignment, resolution)
    maps = neighbor_maps(solution.mode)

    # faces whose boundary is an image of an earlier face reuse that mesh, so
    # neighbouring cells in the tiling share identical face samples
    plan = {}
    self_paired = set()
    for k in range(len(cell.faces)):
        j = _face_partner(cell, k, maps)
        if j == k:
            self_paired.add(k)
        elif j is not None and j < k and j not in plan:
            plan[k] = j

    boundaries = [face_boundary(f, edges) for f in cell.faces]

    def mesh_face(k):
        pts, corners = boundaries[k]
        exempt = cusp_corners(cell.faces[k], assignment, corners)
        seed = None
        if k in self_paired:
            seed = seed_symmetric_mesh(pts, *maps[k], exempt)
        if seed is None:
            seed = seed_face_mesh(pts, exempt)
        return relax_face(seed, max_iter=max_iter, eps=eps)

    fresh = [k for k in range(len(cell.faces)) if k not in plan]
    workers = worker_count() if threads is None else threads
    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        meshes = dict(zip(fresh, ex.map(mesh_face, fresh)))

    shared = {}
    for k, j in plan.items():
        L, t = maps[k]
        cand = meshes[j].transformed(L, t)
        own = boundaries[k][0]
        dist, idx = cKDTree(own).query(cand.boundary)
        if dist.max() < 1e-9 and len(own) == cand.n_boundary:
            V = cand.vertices.copy()
            V[: cand.n_boundary] = own[idx]  # snap onto this face's own samples
            meshes[k] = FaceMesh(V, cand.triangles, cand.n_boundary, cand.exempt, cand.area_history)
            shared[k] = j
        else:
            meshes[k] = mesh_face(k)

    faces = []
    c = cell.center
    for k, f in enumerate(cell.faces):
        m = meshes[k]
        centroid = cell.nodes[[i - 1 for i in f.cycle]].mean(axis=0)
        if m.vector_area() @ (centroid - c) < 0:
            m = m.flipped()
        faces.append(m)

    V, T, fids, ids, residual = weld(faces)
    mesh = CellMesh(solution, solution.mode, assignment, edges, faces, V, T, fids, ids, residual, shared)
    bad = mesh.open_edges()
    if bad:
        raise WeldError(f"{bad} mesh edges are not shared by exactly two triangles after welding at {WELD_TOL}")
    return mesh
