"""Disk triangulations of closed boundary curves and fixed-boundary area descent."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve
import logging

import shapely
from scipy.spatial import Delaunay, cKDTree

MIN_ANGLE_DEG = 1.0
# Near a zero-angle (cusp) corner the boundary samples alone force angles of
# order curvature * spacing; the quality bound starts this many spacings away.
CUSP_ZONE = 3.0
log = logging.getLogger(__name__)


def _reject(reason):
    log.debug("symmetric seed rejected: %s", reason)
    return None


class MeshDegenerationError(RuntimeError):
    pass


@dataclass(eq=False)
class FaceMesh:
    vertices: np.ndarray  # (n, 3); the first n_boundary rows are the boundary loop
    triangles: np.ndarray  # (m, 3) int
    n_boundary: int
    exempt: tuple = ()  # boundary indices allowed to carry sliver triangles (cusps)
    area_history: list = field(default_factory=list)
    symmetry: tuple | None = None  # (perm, L, t): x_i = L x_perm[i] + t is kept exact

    @property
    def boundary(self):
        return self.vertices[: self.n_boundary]

    def area(self):
        return triangle_areas(self.vertices, self.triangles).sum()

    def spacing(self):
        B = self.boundary
        return float(np.median(np.linalg.norm(np.roll(B, -1, axis=0) - B, axis=1)))

    def exempt_mask(self):
        """Triangles with a vertex within CUSP_ZONE boundary spacings of a cusp corner."""
        if not self.exempt:
            return np.zeros(len(self.triangles), dtype=bool)
        r = CUSP_ZONE * self.spacing()
        near = cKDTree(self.vertices[list(self.exempt)]).query(self.vertices)[0] <= r
        return near[self.triangles].any(axis=1)

    def min_angle(self, skip_exempt=True):
        ang = triangle_angles(self.vertices, self.triangles)
        if skip_exempt:
            ang = ang[~self.exempt_mask()]
        return float(np.degrees(ang.min())) if len(ang) else 180.0

    def vector_area(self):
        v = self.vertices
        t = self.triangles
        return 0.5 * np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]]).sum(axis=0)

    def flipped(self):
        return FaceMesh(self.vertices, self.triangles[:, ::-1].copy(), self.n_boundary,
                        self.exempt, list(self.area_history), self.symmetry)

    def transformed(self, L, t):
        return FaceMesh(self.vertices @ np.asarray(L).T + t, self.triangles.copy(),
                        self.n_boundary, self.exempt, list(self.area_history))


def _signed_area2(uv, tri):
    """Twice the signed area of planar triangles."""
    p = uv[tri[:, 1]] - uv[tri[:, 0]]
    q = uv[tri[:, 2]] - uv[tri[:, 0]]
    return p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]


def triangle_areas(V, T):
    e1 = V[T[:, 1]] - V[T[:, 0]]
    e2 = V[T[:, 2]] - V[T[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


def triangle_angles(V, T):
    """(m, 3) interior angles, column k at corner T[:, k]."""
    out = np.empty(T.shape)
    for k in range(3):
        a = V[T[:, k]]
        b = V[T[:, (k + 1) % 3]] - a
        c = V[T[:, (k + 2) % 3]] - a
        cos = np.einsum("ij,ij->i", b, c) / (np.linalg.norm(b, axis=1) * np.linalg.norm(c, axis=1))
        out[:, k] = np.arccos(np.clip(cos, -1.0, 1.0))
    return out


def cotan_laplacian(V, T):
    """Symmetric cotangent weight matrix W (w_ij = (cot a + cot b) / 2) and its row sums."""
    n = len(V)
    rows, cols, vals = [], [], []
    for k in range(3):
        i, j, o = T[:, (k + 1) % 3], T[:, (k + 2) % 3], T[:, k]
        u = V[i] - V[o]
        w = V[j] - V[o]
        cross = np.linalg.norm(np.cross(u, w), axis=1)
        cot = np.einsum("ij,ij->i", u, w) / np.maximum(cross, 1e-300)
        rows += [i, j]
        cols += [j, i]
        vals += [0.5 * cot, 0.5 * cot]
    W = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    return W


def _harmonic(V, T, nb, W):
    """Replace interior rows of V by the W-harmonic extension of the boundary rows."""
    n = len(V)
    L = sp.diags(np.asarray(W.sum(axis=1)).ravel()) - W
    L = L.tocsr()
    I = np.arange(nb, n)
    B = np.arange(nb)
    A = L[I][:, I].tocsc()
    rhs = -(L[I][:, B] @ V[:nb])
    X = V.copy()
    X[nb:] = spsolve(A, rhs).reshape(-1, V.shape[1])
    return X


def disk_points(boundary_angles, growth=1.2):
    """Boundary points on the unit circle plus graded interior rings."""
    ang = np.asarray(boundary_angles)
    pts = [np.c_[np.cos(ang), np.sin(ang)]]
    gaps = np.diff(np.r_[ang, ang[0] + 2 * np.pi])
    s = float(np.median(gaps))
    r = 1.0
    k = 0
    while True:
        h = s * growth ** k
        r -= h * np.sqrt(3) / 2
        if r < h * 0.75:
            break
        m = max(6, int(round(2 * np.pi * r / (h * growth))))
        th = 2 * np.pi * (np.arange(m) + 0.5 * (k % 2)) / m
        pts.append(r * np.c_[np.cos(th), np.sin(th)])
        k += 1
    pts.append(np.zeros((1, 2)))
    return np.vstack(pts)


def seed_disk_mesh(boundary, exempt=()):
    """Disk triangulation of a closed polyline (no repeated end point)."""
    boundary = np.asarray(boundary, dtype=float)
    nb = len(boundary)
    seg = np.linalg.norm(np.roll(boundary, -1, axis=0) - boundary, axis=1)
    frac = np.r_[0.0, np.cumsum(seg)[:-1]] / seg.sum()
    uv = disk_points(2 * np.pi * frac)
    tri = Delaunay(uv).simplices.astype(np.int64)
    # counter-clockwise in the parameter disk
    d = _signed_area2(uv, tri)
    tri[d < 0] = tri[d < 0][:, ::-1]
    tri = tri[np.abs(d) > 1e-14]
    V = np.zeros((len(uv), 3))
    V[:nb] = boundary
    W = cotan_laplacian(np.c_[uv, np.zeros(len(uv))], tri)
    V = _harmonic(V, tri, nb, W)
    return FaceMesh(V, tri, nb, tuple(exempt))


def _plane_frame(P):
    c = P.mean(axis=0)
    _, _, vt = np.linalg.svd(P - c, full_matrices=False)
    return c, vt[:2]


def _ring_points(poly, spacing):
    out = []
    geoms = getattr(poly, "geoms", [poly])
    for g in geoms:
        ring = g.exterior
        n = max(3, int(np.ceil(ring.length / spacing)))
        d = np.linspace(0.0, ring.length, n, endpoint=False)
        out.append(np.array([ring.interpolate(x).coords[0] for x in d]))
    return np.vstack(out) if out else np.zeros((0, 2))


def planar_interior_points(uv, growth=1.25):
    """Graded interior points of the polygon ``uv`` on inward offset curves."""
    poly = shapely.Polygon(uv)
    seg = np.linalg.norm(np.roll(uv, -1, axis=0) - uv, axis=1)
    h = float(np.median(seg))
    pts = []
    depth, k = 0.0, 0
    while True:
        s = h * growth ** k
        depth += s * np.sqrt(3) / 2
        inner = poly.buffer(-depth, join_style="round")
        if inner.is_empty or inner.area < (0.5 * s) ** 2:
            rest = poly.buffer(-(depth - 0.5 * s * np.sqrt(3) / 2))
            if not rest.is_empty:
                pts.append(np.array(rest.representative_point().coords))
            break
        pts.append(_ring_points(inner, s * growth))
        k += 1
    if not pts:
        return np.zeros((0, 2))
    cand = np.vstack(pts)
    dist = _boundary_distance(uv, cand)
    local = h + 0.25 * dist
    order = np.flatnonzero(dist >= 0.6 * h)
    out = []
    tree = None
    for i in order:
        p = cand[i]
        # greedy thinning; rebuild the tree lazily in blocks
        if out:
            if tree is None or len(out) - tree.n > 64:
                tree = cKDTree(np.array(out))
            near = tree.query_ball_point(p, 0.5 * local[i])
            recent = np.array(out[tree.n:]) if len(out) > tree.n else np.zeros((0, 2))
            if near or (len(recent) and np.linalg.norm(recent - p, axis=1).min() < 0.5 * local[i]):
                continue
        out.append(p)
    return np.array(out) if out else np.zeros((0, 2))


def _boundary_distance(uv, pts):
    """Distance from ``pts`` to the closed polyline ``uv``."""
    ring = shapely.LinearRing(uv)
    return shapely.distance(ring, shapely.points(np.asarray(pts).reshape(-1, 2)))


def _delaunay(uv):
    """Delaunay simplices of ``uv``; far ghost points keep collinear hull points in the triangulation."""
    c = uv.mean(axis=0)
    r = 10.0 * max(np.ptp(uv, axis=0).max(), 1e-9)
    ang = np.array([0.5, 0.5 + 2 / 3, 0.5 + 4 / 3]) * np.pi
    ghosts = c + r * np.c_[np.cos(ang), np.sin(ang)]
    simp = Delaunay(np.vstack([uv, ghosts])).simplices
    return simp[(simp < len(uv)).all(axis=1)].astype(np.int64)


def _disk_check(tri, nb):
    e = np.sort(np.r_[tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]], axis=1)
    edges, counts = np.unique(e, axis=0, return_counts=True)
    if np.any(counts > 2):
        return False
    bnd = {tuple(x) for x in edges[counts == 1]}
    want = {tuple(sorted((i, (i + 1) % nb))) for i in range(nb)}
    if bnd != want:
        return False
    nv = len(np.unique(tri))
    return nv - len(edges) + len(tri) == 1


def seed_planar_mesh(boundary, exempt=()):
    """Triangulate in the best-fit plane of the boundary; None if the projection is not simple."""
    boundary = np.asarray(boundary, dtype=float)
    nb = len(boundary)
    c, frame = _plane_frame(boundary)
    uv_b = (boundary - c) @ frame.T
    poly = shapely.Polygon(uv_b)
    if not poly.is_valid:
        return None
    uv = np.vstack([uv_b, planar_interior_points(uv_b)])
    tri = _delaunay(uv)
    cen = uv[tri].mean(axis=1)
    tri = tri[shapely.contains_xy(poly, cen[:, 0], cen[:, 1])]
    d = _signed_area2(uv, tri)
    tri[d < 0] = tri[d < 0][:, ::-1]
    if not _disk_check(tri, nb) or len(np.unique(tri)) != len(uv):
        return None
    V = np.zeros((len(uv), 3))
    V[:nb] = boundary
    V[nb:] = c + uv[nb:] @ frame
    W = cotan_laplacian(np.c_[uv, np.zeros(len(uv))], tri)
    V = _harmonic(V, tri, nb, W)
    return FaceMesh(V, tri, nb, tuple(exempt))


def seed_face_mesh(boundary, exempt=()):
    """Planar-projection seed when possible, else the disk-parameter seed."""
    m = seed_planar_mesh(boundary, exempt)
    return m if m is not None else seed_disk_mesh(boundary, exempt)


def _involution(A, B, L, t, tol=1e-9):
    """perm with L A[perm[i]] + t == B[i]; None if there is none."""
    img = A @ np.asarray(L).T + t
    d, j = cKDTree(img).query(B)
    if d.max() > tol or len(np.unique(j)) != len(B):
        return None
    return j


def seed_symmetric_mesh(boundary, L, t, exempt=()):
    """Seed mesh invariant under the half-turn x -> L x + t that maps the boundary onto itself.

    One half of the projected polygon is triangulated and mirrored, so vertex
    positions and connectivity are both symmetric.  Returns None when the
    boundary is not symmetric in the expected way.
    """
    B = np.asarray(boundary, dtype=float)
    L = np.asarray(L, dtype=float)
    nb = len(B)
    pb = _involution(B, B, L, t)
    if pb is None or np.any(pb[pb] != np.arange(nb)):
        return _reject("boundary is not mapped onto itself")
    c, frame = _plane_frame(B)
    R = frame @ L @ frame.T
    if np.abs(R @ R.T - np.eye(2)).max() > 1e-9 or np.linalg.det(R) > 0:
        return _reject("projection plane not preserved")
    w, vec = np.linalg.eigh(0.5 * (R + R.T))
    axis, nrm = vec[:, 1], vec[:, 0]  # eigenvalues +1 (fixed line) and -1
    uv_b = (B - c) @ frame.T
    if not shapely.Polygon(uv_b).is_valid:
        return _reject("projected boundary not simple")
    side = uv_b @ nrm
    seg = np.linalg.norm(np.roll(uv_b, -1, axis=0) - uv_b, axis=1)
    h = float(np.median(seg))

    # boundary crossings of the fixed line: fixed samples or mirrored neighbours
    fixed = [i for i in range(nb) if pb[i] == i]
    straddle = [i for i in range(nb) if pb[i] == (i + 1) % nb]
    if len(fixed) + len(straddle) != 2:
        return _reject("fixed line does not cross the boundary twice")
    plus = [i for i in range(nb) if pb[i] != i and side[i] > 0]
    start = next(i for i in plus if (i - 1) % nb not in plus)
    run = []
    i = start
    while i in plus:
        run.append(i)
        i = (i + 1) % nb
    if len(run) != len(plus):
        return _reject("boundary half is not contiguous")
    head = [(start - 1) % nb] if (start - 1) % nb in fixed else []
    tail = [i] if i in fixed else []

    cand = planar_interior_points(uv_b)
    dist_b = _boundary_distance(uv_b, cand) if len(cand) else np.zeros(0)
    loc = h + 0.25 * dist_b
    s = cand @ nrm if len(cand) else np.zeros(0)
    near = np.abs(s) < 0.5 * loc
    on_axis = cand[near] - np.outer(s[near], nrm)
    on_axis = on_axis[np.argsort(on_axis @ axis)]
    ax = []
    d_ax = _boundary_distance(uv_b, on_axis) if len(on_axis) else np.zeros(0)
    for p, d in zip(on_axis, d_ax):
        if d < 0.6 * h:
            continue
        if ax and np.linalg.norm(p - ax[-1]) < 0.5 * (h + 0.25 * d):
            continue
        ax.append(p)
    if not ax:
        return _reject("no interior points on the fixed line")
    ax = np.array(ax)
    pos = cand[(~near) & (s > 0)]

    na, npl = len(ax), len(pos)
    uv = np.vstack([uv_b, ax, pos, pos @ R.T])
    i_ax = np.arange(nb, nb + na)
    i_pos = np.arange(nb + na, nb + na + npl)
    perm = np.r_[pb, i_ax, i_pos + npl, i_pos]

    # half polygon: boundary run, then back along the fixed line
    loop = head + run + tail
    a_end = uv_b[loop[0]]
    if np.linalg.norm(ax[0] - a_end) < np.linalg.norm(ax[-1] - a_end):
        axis_order = list(i_ax[::-1])
    else:
        axis_order = list(i_ax)
    hloop = loop + axis_order
    half = shapely.Polygon(uv[hloop])
    if not half.is_valid:
        return _reject("half polygon not simple")
    hpts = np.array(sorted(set(hloop) | set(i_pos)))
    tri = hpts[_delaunay(uv[hpts])]
    cen = uv[tri].mean(axis=1)
    tri = tri[shapely.contains_xy(half, cen[:, 0], cen[:, 1])]
    tris = [tri, perm[tri]]
    for k in straddle:
        j = (k + 1) % nb
        m = min(i_ax, key=lambda q: np.linalg.norm(uv[q] - 0.5 * (uv_b[k] + uv_b[j])))
        tris.append(np.array([[k, j, m]]))
    tri = np.vstack(tris).astype(np.int64)
    d = _signed_area2(uv, tri)
    tri[d < 0] = tri[d < 0][:, ::-1]
    if not _disk_check(tri, nb) or len(np.unique(tri)) != len(uv):
        return _reject("mirrored triangulation is not a disk")
    V = np.zeros((len(uv), 3))
    V[:nb] = B
    V[nb:] = c + uv[nb:] @ frame
    W = cotan_laplacian(np.c_[uv, np.zeros(len(uv))], tri)
    V = _harmonic(V, tri, nb, W)
    mesh = FaceMesh(V, tri, nb, tuple(exempt), symmetry=(perm, L, np.asarray(t, dtype=float)))
    mesh.vertices = symmetrize(mesh.vertices, mesh)
    return mesh


def symmetrize(V, mesh):
    if mesh.symmetry is None:
        return V
    perm, L, t = mesh.symmetry
    out = 0.5 * (V + V[perm] @ L.T + t)
    out[: mesh.n_boundary] = V[: mesh.n_boundary]
    return out


def relax_face(init_mesh, max_iter=2000, eps=1e-7, max_halvings=12):
    """Damped area descent with fixed boundary.

    Each iteration computes the fixed-boundary harmonic map for the current
    cotangent weights (the area minimiser of the linearised problem) and moves
    toward it, halving the step until the area does not increase.  Returns a
    new FaceMesh whose ``area_history`` lists the area after every accepted
    step, starting with the seed area.
    """
    V = init_mesh.vertices.copy()
    T = init_mesh.triangles
    nb = init_mesh.n_boundary
    area = triangle_areas(V, T).sum()
    history = [float(area)]
    if len(V) == nb:
        return FaceMesh(V, T, nb, init_mesh.exempt, history, init_mesh.symmetry)
    for _ in range(max_iter):
        W = cotan_laplacian(V, T)
        try:
            target = _harmonic(V, T, nb, W)
        except Exception:
            break
        if not np.all(np.isfinite(target)):
            break
        step = 1.0
        accepted = False
        for _ in range(max_halvings):
            cand = symmetrize(V + step * (target - V), init_mesh)
            a = triangle_areas(cand, T).sum()
            if a <= area:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        drop = (area - a) / area
        V, area = cand, a
        history.append(float(area))
        if drop < eps:
            break
    mesh = FaceMesh(V, T, nb, init_mesh.exempt, history, init_mesh.symmetry)
    if mesh.min_angle() < MIN_ANGLE_DEG:
        raise MeshDegenerationError(
            f"minimum triangle angle {mesh.min_angle():.3g} deg < {MIN_ANGLE_DEG} deg after relaxation"
        )
    return mesh
