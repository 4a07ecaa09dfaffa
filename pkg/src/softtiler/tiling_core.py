"""First-order description of the bcc Dirichlet-Voronoi cell (the (e2) cell).

Node coordinates are the 24 vertices of a unit-edge truncated octahedron in a
frame where node 1 sits at the origin and the quadrangular face (1,2,3,4)
lies in the plane z = 0.  All node indices are 1-based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import ConvexHull

SQ2 = np.sqrt(2.0)

# (x, y, z) with z in units of 1/sqrt(2)
_TABLE = [
    (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
    (-0.5, -0.5, 1), (1.5, -0.5, 1), (1.5, 1.5, 1), (-0.5, 1.5, 1),
    (-1, 0, 2), (0, -1, 2), (1, -1, 2), (2, 0, 2),
    (2, 1, 2), (1, 2, 2), (0, 2, 2), (-1, 1, 2),
    (-0.5, -0.5, 3), (1.5, -0.5, 3), (1.5, 1.5, 3), (-0.5, 1.5, 3),
    (0, 0, 4), (1, 0, 4), (1, 1, 4), (0, 1, 4),
]

LETTERS = "abcd"


def unit(v, tol=1e-12):
    """Return ``v`` as a float array after checking it has unit length."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"not a finite 3-vector: {v!r}")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"not a unit vector (|v| = {np.linalg.norm(v)!r})")
    return v


def normalize(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


@dataclass(frozen=True)
class Face:
    kind: str  # "quad" | "hex"
    cycle: tuple[int, ...]

    @property
    def name(self):
        return "(" + ",".join(str(i) for i in self.cycle) + ")"

    def edges(self):
        c = self.cycle
        return [tuple(sorted((c[k], c[(k + 1) % len(c)]))) for k in range(len(c))]


@dataclass(frozen=True, eq=False)
class FirstOrderCell:
    nodes: np.ndarray  # (24, 3), row k holds node k+1
    faces: tuple[Face, ...]

    @property
    def edges(self):
        out = sorted({e for f in self.faces for e in f.edges()})
        return out

    @property
    def center(self):
        return self.nodes.mean(axis=0)

    def node(self, i):
        return self.nodes[i - 1]

    def neighbors(self, i):
        return sorted({j for e in self.edges for j in e if i in e and j != i})

    def face_normal(self, face):
        """Outward unit normal of the plane through ``face``'s nodes."""
        pts = self.nodes[[i - 1 for i in face.cycle]]
        centroid = pts.mean(axis=0)
        _, _, vt = np.linalg.svd(pts - centroid)
        n = vt[2]
        if n @ (centroid - self.center) < 0:
            n = -n
        return n

    def find_face(self, *nodes):
        want = set(nodes)
        for f in self.faces:
            if want <= set(f.cycle):
                return f
        raise KeyError(f"no face contains nodes {nodes}")

    def to_json(self):
        return {
            "nodes": [[float(x) for x in p] for p in self.nodes],
            "faces": [{"kind": f.kind, "cycle": list(f.cycle)} for f in self.faces],
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        nodes = np.array(data["nodes"], dtype=float)
        faces = tuple(Face(f["kind"], tuple(f["cycle"])) for f in data["faces"])
        return cls(nodes, faces)


def _canonical_cycle(cycle):
    # start at the smallest index, walk toward the smaller neighbour
    k = cycle.index(min(cycle))
    c = cycle[k:] + cycle[:k]
    if c[-1] < c[1]:
        c = [c[0]] + c[1:][::-1]
    return tuple(c)


def _hull_faces(nodes, tol=1e-9):
    hull = ConvexHull(nodes)
    planes = []
    for eq in hull.equations:
        if not any(np.allclose(eq, p, atol=tol) for p in planes):
            planes.append(eq)
    faces = []
    for eq in planes:
        on = np.flatnonzero(np.abs(nodes @ eq[:3] + eq[3]) < tol)
        pts = nodes[on]
        centroid = pts.mean(axis=0)
        n = eq[:3]
        u = normalize(pts[0] - centroid)
        w = np.cross(n, u)
        ang = np.arctan2((pts - centroid) @ w, (pts - centroid) @ u)
        cycle = [int(i) + 1 for i in on[np.argsort(ang)]]
        kind = {4: "quad", 6: "hex"}.get(len(cycle))
        if kind is None:
            raise ValueError(f"unexpected facet with {len(cycle)} vertices")
        faces.append(Face(kind, _canonical_cycle(cycle)))
    faces.sort(key=lambda f: (f.kind != "quad", f.cycle))
    return tuple(faces)


@lru_cache(maxsize=None)
def builtin_e2():
    """The (e2) cell: tabulated nodes plus convex-hull faces."""
    nodes = np.array([(x, y, z / SQ2) for x, y, z in _TABLE], dtype=float)
    nodes.setflags(write=False)
    return FirstOrderCell(nodes, _hull_faces(nodes))


@dataclass(frozen=True)
class Lattice:
    """Translations of the cell; ``extra`` holds affine maps (G, t): x -> G x + t."""

    basis: np.ndarray
    translations: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    extra: tuple = ()

    def point(self, n):
        return np.asarray(n, dtype=float) @ self.basis


def face_translations(cell):
    """Translation carrying the cell onto its neighbour across each face."""
    c = cell.center
    out = []
    for f in cell.faces:
        n = cell.face_normal(f)
        d = n @ (cell.node(f.cycle[0]) - c)
        out.append(2.0 * d * n)
    return np.array(out)


def _pick_basis(vectors):
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            for k in range(j + 1, len(vectors)):
                B = vectors[[i, j, k]]
                if abs(np.linalg.det(B)) > 1e-6:
                    return B
    raise ValueError("translations do not span space")


@lru_cache(maxsize=None)
def bcc_lattice():
    """bcc lattice in the cell frame, from reflections of the centre in face planes."""
    cell = builtin_e2()
    t = face_translations(cell)
    hexes = np.array([v for v, f in zip(t, cell.faces) if f.kind == "hex"])
    return Lattice(basis=_pick_basis(hexes), translations=t)


def cubic_lattice():
    """Primitive cubic sublattice spanned by the quad-face translations."""
    cell = builtin_e2()
    t = face_translations(cell)
    quads = np.array([v for v, f in zip(t, cell.faces) if f.kind == "quad"])
    B = _pick_basis(quads)
    return Lattice(basis=B, translations=quads)


@dataclass(frozen=True, eq=False)
class NodalStructure:
    K: int
    N: int
    v: tuple[int, ...]
    polyhedral_directions: np.ndarray  # (4, 3): a0, b0, c0, d0
    vertex_sets: tuple[tuple[int, ...], ...]  # 0-based indices into the directions
    edge_targets: tuple  # node reached along a0, b0, c0 (None for the external edge)

    def vertex_set_names(self):
        return ["".join(LETTERS[i] for i in vs) for vs in self.vertex_sets]


def _incident_directions(cell, lattice, node):
    """Edge directions at ``node`` over the cell and its face neighbours, per cell."""
    p = cell.node(node)
    per_cell = []
    for shift in [np.zeros(3), *lattice.translations]:
        moved = cell.nodes + shift
        hit = np.flatnonzero(np.linalg.norm(moved - p, axis=1) < 1e-9)
        if len(hit) == 0:
            continue
        k = int(hit[0]) + 1
        dirs = [normalize(moved[j - 1] - p) for j in cell.neighbors(k)]
        per_cell.append(dirs)
    return per_cell


def reference_nodal_structure(cell=None, node=1):
    """Nodal set and vertex sets at ``node``, found by scanning neighbouring cells."""
    cell = builtin_e2() if cell is None else cell
    per_cell = _incident_directions(cell, bcc_lattice(), node)
    dirs = []
    for group in per_cell:
        for d in group:
            if not any(np.linalg.norm(d - e) < 1e-9 for e in dirs):
                dirs.append(d)
    if len(dirs) != 4:
        raise ValueError(f"node {node} has degree {len(dirs)} in the tiling, expected 4")

    p = cell.node(node)
    own = cell.neighbors(node)
    # a, b, c follow the cell's own edges in the order (smallest target first,
    # then the edge in the same quad face, then the remaining one)
    quad = next(f for f in cell.faces if f.kind == "quad" and node in f.cycle)
    first = min(own)
    second = next(j for j in own if j != first and j in quad.cycle)
    third = next(j for j in own if j not in (first, second))
    targets = (first, second, third)
    ordered = [normalize(cell.node(j) - p) for j in targets]
    external = [d for d in dirs if all(np.linalg.norm(d - e) > 1e-9 for e in ordered)]
    ordered.append(external[0])
    D = np.array(ordered)

    def index(d):
        return int(np.argmin(np.linalg.norm(D - d, axis=1)))

    vsets = sorted({tuple(sorted(index(d) for d in group)) for group in per_cell})
    D.setflags(write=False)
    return NodalStructure(
        K=len(dirs),
        N=len(vsets),
        v=tuple(len(vs) for vs in vsets),
        polyhedral_directions=D,
        vertex_sets=tuple(vsets),
        edge_targets=targets + (None,),
    )
