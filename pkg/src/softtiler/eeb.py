"""Extended edge bending: softening systems, catalogue and one-parameter families."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import sphere_solver as ss
from .symmetry import dedup_group, maps_set_onto, nodal_transforms, paper_matrices
from .tiling_core import LETTERS, builtin_e2, reference_nodal_structure

SOFT_TOL = 1e-9
SQ2 = np.sqrt(2.0)
SQ3 = np.sqrt(3.0)
SQ6 = np.sqrt(6.0)

# Labels for the classes the catalogue is expected to find; only used for naming.
KNOWN_CELLS = {
    "e2": (1.0, 0.0, 0.0),
    "f2": (1 / SQ2, 1 / SQ2, 0.0),
    "g2": (1 / SQ2, -1 / SQ2, 0.0),
    "h2": (0.5, -0.5, 1 / SQ2),
    "i2": (SQ3 / 2, SQ3 / 6, 1 / SQ6),
}


@dataclass(frozen=True)
class SofteningSystem:
    pairs: tuple[tuple[int, int], ...]  # 0-based nodal indices, i < j

    @property
    def name(self):
        return "".join(LETTERS[i] + LETTERS[j] for i, j in self.pairs)

    def covers(self, vertex_sets):
        return all(any(i in vs and j in vs for i, j in self.pairs) for vs in vertex_sets)


def _consistent(pairs):
    # u_i = -u_j chains: a cycle either repeats or contradicts an earlier equation
    parent = list(range(4))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


def enumerate_complete_systems(ns=None):
    """Minimal complete sets of softening equations for a nodal structure."""
    ns = reference_nodal_structure() if ns is None else ns
    all_pairs = list(combinations(range(ns.K), 2))
    complete = []
    for r in range(1, len(all_pairs) + 1):
        for subset in combinations(all_pairs, r):
            sysm = SofteningSystem(subset)
            if not _consistent(subset) or not sysm.covers(ns.vertex_sets):
                continue
            if any(set(c.pairs) < set(subset) for c in complete):
                continue
            complete.append(sysm)
    return complete


def solve_system(system, T):
    return ss.intersect_all(
        ss.antipodal_constraint(ss.pair_matrix(T[i], T[j])) for i, j in system.pairs
    )


def nodal_set(a, mode):
    return np.array([T @ a for T in nodal_transforms(mode)])


def is_soft(nodal, vertex_sets=None, tol=SOFT_TOL):
    if vertex_sets is None:
        vertex_sets = reference_nodal_structure().vertex_sets
    return all(
        any(nodal[i] @ nodal[j] <= -1.0 + tol for i, j in combinations(vs, 2))
        for vs in vertex_sets
    )


def is_standard(nodal, tol=1e-9):
    s = np.linalg.svd(np.asarray(nodal, dtype=float), compute_uv=False)
    return int((s > tol).sum()) == 1


def min_pair_dot(nodal):
    return min(nodal[i] @ nodal[j] for i, j in combinations(range(len(nodal)), 2))


# --- planar faces --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FaceConstraint:
    name: str
    face: object
    u: np.ndarray  # inward unit normal of the face
    letters: tuple[int, ...]  # nodal indices of node-1 edges lying on the face

    def transforms(self, mode):
        T = nodal_transforms(mode)
        return [T[k] for k in self.letters]

    def solution(self, mode="tetrahedral"):
        return ss.planar_face_constraint(self.u, self.transforms(mode))

    def residual(self, a, mode="tetrahedral"):
        return max(abs(self.u @ (T @ a)) for T in self.transforms(mode))


@lru_cache(maxsize=None)
def face_constraints():
    """Planarity constraints for the three faces through node 1: quad, hex1, hex2."""
    cell = builtin_e2()
    ns = reference_nodal_structure(cell)
    targets = ns.edge_targets  # nodes reached along a, b, c
    out = []
    faces = [f for f in cell.faces if 1 in f.cycle]
    quad = next(f for f in faces if f.kind == "quad")
    hexes = sorted((f for f in faces if f.kind == "hex"), key=lambda f: f.cycle)
    for name, f in [("quad", quad), ("hex1", hexes[0]), ("hex2", hexes[1])]:
        letters = tuple(k for k, t in enumerate(targets) if t is not None and t in f.cycle)
        u = -cell.face_normal(f)
        u.setflags(write=False)
        out.append(FaceConstraint(name, f, u, letters))
    return tuple(out)


def classify_planar_faces(a, mode, tol=1e-9):
    return [fc.name for fc in face_constraints() if fc.residual(np.asarray(a), mode) < tol]


@lru_cache(maxsize=None)
def named_circles(mode):
    """Great circles used for labelling: the first softening equation of each
    system (a.b, a.c, b.c) and the three planarity circles."""
    T = nodal_transforms(mode)
    out = {
        "abcd": ss.antipodal_constraint(ss.pair_matrix(T[0], T[1])),
        "acbd": ss.antipodal_constraint(ss.pair_matrix(T[0], T[2])),
        "adbc": ss.antipodal_constraint(ss.pair_matrix(T[1], T[2])),
    }
    for fc in face_constraints():
        out[fc.name] = fc.solution(mode)
    return out


# --- solutions and equivalence ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CellSolution:
    name: str
    a: np.ndarray
    euler: ss.EulerAngles
    nodal: np.ndarray
    mode: str
    member_circles: tuple[str, ...]
    soft: bool
    standard: bool
    planar_faces: tuple[str, ...]
    soft_systems: tuple[str, ...] = ()
    sigma: float | None = None  # softness measure; not computed

    @property
    def pair_dots(self):
        N = self.nodal
        return {LETTERS[i] + LETTERS[j]: float(N[i] @ N[j]) for i, j in combinations(range(4), 2)}

    def to_json(self):
        return {
            "name": self.name,
            "a": [float(x) for x in self.a],
            "phi": self.euler.phi,
            "theta": self.euler.theta,
            "soft": self.soft,
            "standard": self.standard,
            "planar_faces": list(self.planar_faces),
            "member_circles": list(self.member_circles),
            "soft_systems": list(self.soft_systems),
            "nodal": [[float(x) for x in v] for v in self.nodal],
            "sigma": self.sigma,
        }


def make_solution(a, mode, name="", tol=SOFT_TOL):
    a = np.asarray(a, dtype=float) + 0.0
    a.setflags(write=False)
    N = nodal_set(a, mode)
    N.setflags(write=False)
    systems = tuple(
        s.name for s in enumerate_complete_systems()
        if all(N[i] @ N[j] <= -1.0 + tol for i, j in s.pairs)
    )
    circles = tuple(k for k, c in named_circles(mode).items() if c.contains(a))
    return CellSolution(
        name=name,
        a=a,
        euler=ss.euler_from_unit(a),
        nodal=N,
        mode=mode,
        member_circles=circles,
        soft=is_soft(N, tol=tol),
        standard=is_standard(N, tol),
        planar_faces=tuple(classify_planar_faces(a, mode, tol)),
        soft_systems=systems,
    )


def equivalent(a1, a2, mode, group=None):
    """True if some dedup-group element maps one nodal multiset onto the other."""
    group = dedup_group() if group is None else group
    N1, N2 = nodal_set(a1, mode), nodal_set(a2, mode)
    return any(maps_set_onto(g, N1, N2) for g in group)


def class_members(a, mode, group=None):
    """Fundamental vectors whose nodal set is a dedup-group image of a's."""
    group = dedup_group() if group is None else group
    N = nodal_set(a, mode)
    out = []
    for g in group:
        GN = [g @ v for v in N]
        for v in GN:
            if maps_set_onto(np.eye(3), nodal_set(v, mode), GN) and all(
                np.abs(v - w).max() > 1e-9 for w in out
            ):
                out.append(v)
    return out


def _rep_key(v):
    return tuple(np.round([v[0], v[2], v[1]], 9))


def representative(a, mode, group=None):
    """Class member with the largest (a_x, a_z, a_y), lexicographically."""
    return max(class_members(a, mode, group), key=_rep_key) + 0.0


def label_for(a, mode):
    for name, ref in KNOWN_CELLS.items():
        if np.abs(np.asarray(a) - ref).max() < 1e-9:
            return name
    return ""


# --- catalogue ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Catalogue:
    mode: str
    constraints: dict
    solutions: tuple[CellSolution, ...]
    dedup_group_order: int

    def by_name(self, name):
        for s in self.solutions:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_json(self):
        return {
            "mode": self.mode,
            "constraints": self.constraints,
            "dedup_group_order": self.dedup_group_order,
            "solutions": [s.to_json() for s in self.solutions],
        }


def candidate_points(mode):
    T = nodal_transforms(mode)
    systems = enumerate_complete_systems()
    if not systems:
        raise InconsistentSystem("no complete softening system exists")
    system_sets = [solve_system(s, T) for s in systems]
    if all(isinstance(x, ss.Empty) for x in system_sets):
        raise InconsistentSystem("every complete softening system is inconsistent")
    constraint_sets = [fc.solution(mode) for fc in face_constraints()]
    sets = system_sets + constraint_sets
    found = []
    for s in system_sets:
        if isinstance(s, ss.AntipodalPair):
            found.append(s)
    for s1, s2 in combinations(sets, 2):
        x = ss.intersect(s1, s2)
        if isinstance(x, ss.AntipodalPair):
            found.append(x)
    pts = []
    for pair in found:
        for p in pair.points:
            if all(np.abs(p - q).max() > 1e-9 for q in pts):
                pts.append(p + 0.0)
    return pts


class InconsistentSystem(ValueError):
    """A constraint system has no solution or the catalogue cannot be formed."""


def run_catalogue(mode, require_planar_face=False, require_soft=True, tol=SOFT_TOL):
    if tol <= 0:
        raise ValueError("tol must be positive")
    group = dedup_group()
    kept = []
    for a in candidate_points(mode):
        N = nodal_set(a, mode)
        if require_soft and not is_soft(N, tol=tol):
            continue
        if require_planar_face and not classify_planar_faces(a, mode, tol):
            continue
        if any(equivalent(a, b, mode, group) for b in kept):
            continue
        kept.append(a)

    reps = [representative(a, mode, group) for a in kept]
    reps.sort(key=lambda v: tuple(np.round(v, 12)))
    solutions = []
    unnamed = 0
    for a in reps:
        name = label_for(a, mode)
        if not name:
            unnamed += 1
            name = f"x{unnamed}"
        solutions.append(make_solution(a, mode, name, tol))
    return Catalogue(
        mode=mode,
        constraints={"soft": require_soft, "planar_face": require_planar_face, "tol": tol},
        solutions=tuple(solutions),
        dedup_group_order=group.order,
    )


# --- special cells -----------------------------------------------------------

@lru_cache(maxsize=None)
def kelvin_solution():
    """Equal-angle cell of the octahedral family lying on the quad-planarity circle."""
    quad = named_circles("octahedral")["quad"]
    roots = [a for a in ss.equal_angle_solve(paper_matrices("octahedral")) if quad.contains(a)]
    if not roots:
        raise RuntimeError("equal-angle solver returned no root on the quad circle")
    reps = [representative(a, "octahedral") for a in roots]
    a = max(reps, key=_rep_key)
    return make_solution(a, "octahedral", "kelvin")


@lru_cache(maxsize=None)
def pd_circle():
    cat = run_catalogue("tetrahedral", require_planar_face=True, require_soft=True)
    return ss.geodesic_through(cat.by_name("g2").a, cat.by_name("i2").a)


@lru_cache(maxsize=None)
def pd_solution():
    hex1 = named_circles("tetrahedral")["hex1"]
    x = ss.intersect(pd_circle(), hex1)
    if not isinstance(x, ss.AntipodalPair):
        raise RuntimeError(f"g_PD and g_hex1 do not meet in a point: {x!r}")
    return make_solution(x.p, "tetrahedral", "pd")


def named_solution(name):
    """Look up a cell by name across the catalogue runs and special cells."""
    name = name.lower()
    if name == "kelvin":
        return kelvin_solution()
    if name == "pd":
        return pd_solution()
    if name in ("f2", "g2"):
        return run_catalogue("octahedral", require_soft=True).by_name(name)
    if name in ("h2", "i2"):
        return run_catalogue("tetrahedral", require_planar_face=True).by_name(name)
    if name == "e2":
        return run_catalogue("tetrahedral", require_planar_face=True,
                             require_soft=False).by_name("e2")
    raise KeyError(f"unknown solution {name!r}")


# --- families ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FamilyPoint:
    parameter: float
    solution: CellSolution
    min_pair_dot: float


def family(circle, samples, mode, start=None, end=None, extra=()):
    """Classified points along a great circle.

    Without ``start``/``end`` the full circle is sampled uniformly in its own
    parameter; with both, the shorter arc from ``start`` to ``end`` is sampled
    with both endpoints included.  ``extra`` adds parameters to the sweep.
    """
    if not isinstance(circle, ss.GreatCircle):
        raise TypeError(f"family needs a GreatCircle, got {type(circle).__name__}")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if (start is None) != (end is None):
        raise ValueError("give both start and end, or neither")
    if start is None:
        ts = list(-np.pi + 2 * np.pi * np.arange(samples) / samples)
        point = circle.point
    else:
        e1 = np.asarray(start, dtype=float)
        e2 = np.asarray(end, dtype=float) - (np.asarray(end) @ e1) * e1
        e2 = e2 / np.linalg.norm(e2)
        if not (circle.contains(e1, 1e-9) and circle.contains(np.asarray(end), 1e-9)):
            raise ValueError("start/end do not lie on the circle")
        span = float(np.arccos(np.clip(e1 @ np.asarray(end), -1, 1)))
        ts = list(np.linspace(0.0, span, samples))

        def point(t):
            return np.cos(t) * e1 + np.sin(t) * e2

    ts = sorted(set(ts) | set(extra))
    out = []
    for t in ts:
        a = point(t)
        sol = make_solution(a, mode)
        out.append(FamilyPoint(float(t), sol, float(min_pair_dot(sol.nodal))))
    return out


def family_circle(name, mode):
    """Circle (and optional arc endpoints) for a named family."""
    if name == "pd":
        cat = run_catalogue("tetrahedral", require_planar_face=True)
        return pd_circle(), cat.by_name("g2").a, cat.by_name("i2").a
    circles = named_circles(mode)
    if name in ("quad", "abcd", "acbd", "adbc", "hex1", "hex2"):
        return circles[name], None, None
    raise KeyError(f"unknown circle {name!r}")
