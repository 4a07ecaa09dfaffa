"""Exact solution loci of constraints on the unit sphere.

A constraint on the fundamental half-tangent ``a`` is either an antipodality
``(T_i a) . (T_j a) = -1`` or a family of linear conditions ``r . a = 0``.
Both reduce to the null space of a 3x3 (or k x 3) matrix, so the solution set
is the intersection of a linear subspace with the sphere: nothing, a pair of
antipodal points, a great circle, or the whole sphere.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .symmetry import check_orthogonal
from .tiling_core import normalize

RANK_TOL = 1e-9
SAME_TOL = 1e-9


def canonical_sign(v, tol=1e-12):
    """Flip ``v`` so its first non-negligible component is positive."""
    v = np.where(np.abs(v) < 1e-15, 0.0, np.asarray(v, dtype=float))
    for x in v:
        if abs(x) > tol:
            return (v if x > 0 else -v) + 0.0
    return v + 0.0


class SolutionSet:
    dim = None

    def contains(self, a, tol=SAME_TOL):
        raise NotImplementedError

    def same_as(self, other, tol=SAME_TOL):
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Empty(SolutionSet):
    dim = -1

    def contains(self, a, tol=SAME_TOL):
        return False

    def same_as(self, other, tol=SAME_TOL):
        return isinstance(other, Empty)

    def to_json(self):
        return {"kind": "empty"}


@dataclass(frozen=True, eq=False)
class FullSphere(SolutionSet):
    dim = 2

    def contains(self, a, tol=SAME_TOL):
        return True

    def same_as(self, other, tol=SAME_TOL):
        return isinstance(other, FullSphere)

    def to_json(self):
        return {"kind": "sphere"}


class _Vectored(SolutionSet):
    def __init__(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise ValueError(f"not a finite 3-vector: {v!r}")
        v = canonical_sign(normalize(v))
        v.setflags(write=False)
        self._v = v

    def same_as(self, other, tol=SAME_TOL):
        return type(other) is type(self) and np.abs(self._v - other._v).max() < tol

    def __repr__(self):
        return f"{type(self).__name__}({np.array2string(self._v, precision=12)})"


class AntipodalPair(_Vectored):
    """The two points +-p."""

    dim = 0

    @property
    def p(self):
        return self._v

    @property
    def points(self):
        return (self._v, -self._v)

    def contains(self, a, tol=SAME_TOL):
        return abs(abs(np.asarray(a) @ self._v) - 1.0) < tol

    def distance(self, pts):
        pts = np.atleast_2d(pts)
        return np.minimum(np.linalg.norm(pts - self._v, axis=1),
                          np.linalg.norm(pts + self._v, axis=1))

    def to_json(self):
        return {"kind": "pair", "p": [float(x) for x in self._v]}


class GreatCircle(_Vectored):
    """Unit vectors orthogonal to the normal ``n``."""

    dim = 1

    @property
    def n(self):
        return self._v

    def contains(self, a, tol=SAME_TOL):
        return abs(np.asarray(a) @ self._v) < tol

    def basis(self):
        """Orthonormal (e1, e2) with e1 x e2 = n; e1 follows the first axis off the normal."""
        n = self._v
        for axis in np.eye(3):
            e1 = axis - (axis @ n) * n
            if np.linalg.norm(e1) > 1e-6:
                e1 = normalize(e1)
                return e1, np.cross(n, e1)
        raise AssertionError("unreachable")

    def point(self, t):
        e1, e2 = self.basis()
        return np.cos(t) * e1 + np.sin(t) * e2

    def parameter(self, a):
        e1, e2 = self.basis()
        return float(np.arctan2(np.asarray(a) @ e2, np.asarray(a) @ e1))

    def sample(self, count):
        t = -np.pi + 2 * np.pi * np.arange(count) / count
        e1, e2 = self.basis()
        return np.outer(np.cos(t), e1) + np.outer(np.sin(t), e2)

    def distance(self, pts):
        pts = np.atleast_2d(pts)
        s = np.abs(pts @ self._v)
        # geodesic-free chord distance to the circle
        return np.sqrt(np.maximum(2.0 - 2.0 * np.sqrt(np.maximum(1.0 - s * s, 0.0)), 0.0))

    def to_json(self):
        return {"kind": "circle", "n": [float(x) for x in self._v]}


def null_space_set(M, tol=RANK_TOL):
    """Classify {a on the sphere : M a = 0} by the dimension of the null space."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    _, s, vt = np.linalg.svd(M)
    rank = int((s > tol).sum())
    nullity = 3 - rank
    if nullity == 0:
        return Empty()
    if nullity == 1:
        return AntipodalPair(vt[2])
    if nullity == 2:
        return GreatCircle(vt[0])
    return FullSphere()


def antipodal_constraint(M):
    """Solutions of a . (M a) = -1, i.e. of (M + I) a = 0, for orthogonal M."""
    M = check_orthogonal(M, tol=1e-9)
    return null_space_set(M + np.eye(3))


def pair_matrix(Ti, Tj):
    """M with (T_i a).(T_j a) = a.(M a)."""
    return Tj.T @ Ti


def planar_face_constraint(u_face, transforms):
    """Solutions of u_face . (T_i a) = 0 for every T_i in ``transforms``."""
    u = np.asarray(u_face, dtype=float)
    if not transforms:
        raise ValueError("need at least one transform")
    rows = np.array([T.T @ u for T in transforms])
    return null_space_set(rows)


def intersect(s1, s2, tol=SAME_TOL):
    if isinstance(s1, Empty) or isinstance(s2, Empty):
        return Empty()
    if isinstance(s1, FullSphere):
        return s2
    if isinstance(s2, FullSphere):
        return s1
    if isinstance(s1, AntipodalPair) and isinstance(s2, GreatCircle):
        s1, s2 = s2, s1
    if isinstance(s1, GreatCircle) and isinstance(s2, GreatCircle):
        if abs(abs(s1.n @ s2.n) - 1.0) < tol:
            return s1
        return AntipodalPair(np.cross(s1.n, s2.n))
    if isinstance(s1, GreatCircle):  # s2 is a pair
        return s2 if abs(s1.n @ s2.p) < tol else Empty()
    return s1 if abs(abs(s1.p @ s2.p) - 1.0) < tol else Empty()


def intersect_all(sets):
    out = FullSphere()
    for s in sets:
        out = intersect(out, s)
    return out


def geodesic_through(u1, u2):
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if abs(u1 @ u2) >= 1.0 - 1e-9:
        raise ValueError("endpoints are parallel or antiparallel; geodesic is not unique")
    return GreatCircle(np.cross(u1, u2))


# --- Euler chart -----------------------------------------------------------

@dataclass(frozen=True)
class EulerAngles:
    phi: float
    theta: float


def euler_from_unit(v):
    v = np.asarray(v, dtype=float)
    phi = float(np.arctan2(np.hypot(v[0], v[1]), v[2]))  # accurate near the poles
    if v[0] == 0.0 and v[1] == 0.0:
        return EulerAngles(phi, 0.0)
    theta = float(np.arctan2(v[1], v[0]))
    if theta == -np.pi:
        theta = np.pi
    return EulerAngles(phi, theta)


def unit_from_euler(e):
    return np.array([np.sin(e.phi) * np.cos(e.theta),
                     np.sin(e.phi) * np.sin(e.theta),
                     np.cos(e.phi)])


# --- numeric tools -----------------------------------------------------------

def fibonacci_sphere(count):
    i = np.arange(count) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / count)
    theta = np.pi * (1.0 + 5.0 ** 0.5) * i
    return np.column_stack([np.cos(theta) * np.sin(phi),
                            np.sin(theta) * np.sin(phi),
                            np.cos(phi)])


@lru_cache(maxsize=4)
def _cached_grid(count):
    g = fibonacci_sphere(count)
    g.setflags(write=False)
    return g


def worker_count():
    env = os.environ.get("SOFTTILER_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def grid_spacing(count):
    return np.sqrt(4.0 * np.pi / count)


def _tangent_frames(pts):
    axis = np.eye(3)[np.argmin(np.abs(pts), axis=1)]
    e1 = np.cross(pts, axis)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    return e1, np.cross(pts, e1)


def _local_models(residual, pts, step):
    """Finite-difference value, gradient and Hessian of ``residual`` in tangent coordinates."""
    e1, e2 = _tangent_frames(pts)
    offsets = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    probes = []
    for i, j in offsets:
        q = pts + step * (i * e1 + j * e2)
        probes.append(q / np.linalg.norm(q, axis=1, keepdims=True))
    vals = np.asarray(residual(np.vstack([pts] + probes)), dtype=float).reshape(9, len(pts))
    r0, xp, xm, yp, ym, pp, pm, mp, mm = vals
    g = np.stack([(xp - xm) / (2 * step), (yp - ym) / (2 * step)], axis=1)
    hxx = (xp - 2 * r0 + xm) / step**2
    hyy = (yp - 2 * r0 + ym) / step**2
    hxy = (pp - pm - mp + mm) / (4 * step**2)
    H = np.stack([np.stack([hxx, hxy], axis=1), np.stack([hxy, hyy], axis=1)], axis=1)
    return r0, g, H


def _model_distance(r0, g, H, rel=1e-6):
    """Distance to the zero set of r0 + g.x + x.H.x/2 and the model's minimum value."""
    w, U = np.linalg.eigh(H)
    w = np.clip(w, 0.0, None)
    big = w.max(axis=1, keepdims=True)
    inv = np.where(w > rel * np.maximum(big, 1e-300), 1.0 / np.where(w > 0, w, 1.0), 0.0)
    gu = np.einsum("nji,nj->ni", U, g)
    step = gu * inv
    return np.linalg.norm(step, axis=1), r0 - 0.5 * (gu * step).sum(axis=1), w[:, 1]


def brute_force_scan(residual, grid_size, threshold=None, chunk=250_000):
    """Grid points near the zero set of ``residual``, split into clusters.

    ``residual`` maps an (n, 3) array of unit vectors to n non-negative values and
    should vanish quadratically on its zero set.  The threshold adapts to the
    residual: a finite-difference quadratic model at each low grid point
    estimates its distance to the zero set, and points within 0.75 grid
    spacings (about the grid's covering radius) are kept.  Candidates are
    pre-selected by value using the largest curvature seen on a subsample.  An
    explicit ``threshold`` replaces all of this with a plain ``residual <
    threshold`` test.  Returns a list of (m, 3) arrays ordered by smallest grid
    index.
    """
    if grid_size < 1000:
        raise ValueError("grid_size must be at least 1000")
    grid = _cached_grid(grid_size)
    h = grid_spacing(grid_size)
    band = 0.75 * h

    chunks = [grid[k:k + chunk] for k in range(0, grid_size, chunk)]
    with ThreadPoolExecutor(max_workers=worker_count()) as ex:
        values = list(ex.map(lambda g: np.asarray(residual(g), dtype=float), chunks))
    r = np.concatenate(values)

    if threshold is not None:
        idx = np.flatnonzero(r < threshold)
    else:
        sub = grid[:: max(1, grid_size // 512)]
        _, _, Hs = _local_models(residual, sub, 0.5 * h)
        curv = float(np.abs(np.linalg.eigvalsh(Hs)).max()) if len(sub) else 0.0
        # a quadratic zero at distance <= 2 * band stays below this value
        loose = 0.5 * 2.0 * curv * (2.0 * band) ** 2
        cand = np.flatnonzero(r < loose)
        if len(cand):
            r0, g, H = _local_models(residual, grid[cand], 0.5 * h)
            dist, floor, lam = _model_distance(r0, g, H)
            # the model minimum must vanish compared with the value at the band edge
            keep = (dist <= band) & (floor <= 0.05 * 0.5 * lam * band**2)
            idx = cand[keep]
        else:
            idx = cand
    if len(idx) == 0:
        return []
    pts = grid[idx]
    pairs = cKDTree(pts).query_pairs(4.0 * h, output_type="ndarray")
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                     shape=(len(pts), len(pts))) if len(pairs) else coo_matrix((len(pts), len(pts)))
    n, labels = connected_components(adj, directed=False)
    clusters = [pts[labels == k] for k in range(n)]
    first = [int(idx[labels == k].min()) for k in range(n)]
    return [clusters[k] for k in np.argsort(first)]


def antipodal_residual(M):
    M = np.asarray(M, dtype=float)

    def f(a):
        return np.einsum("ij,ij->i", a, a @ M.T) + 1.0

    return f


def linear_residual(rows):
    R = np.atleast_2d(np.asarray(rows, dtype=float))

    def f(a):
        return ((a @ R.T) ** 2).sum(axis=1)

    return f


def _newton_equal_angles(starts, T, iters=60):
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    S = [T[j].T @ T[i] for i, j in pairs]
    S = [0.5 * (m + m.T) for m in S]
    a = starts.copy()
    for _ in range(iters):
        d = np.stack([np.einsum("ni,ni->n", a, a @ m.T) for m in S], axis=1)  # (n, 6)
        g = np.stack([2.0 * a @ m.T for m in S], axis=1)  # (n, 6, 3)
        res = d[:, 1:] - d[:, :1]
        J = g[:, 1:, :] - g[:, :1, :]
        # restrict to the tangent plane
        P = np.eye(3)[None] - a[:, :, None] * a[:, None, :]
        J = J @ P
        step = -np.einsum("nij,nj->ni", np.linalg.pinv(J, rcond=1e-10), res)
        a = a + step
        a /= np.linalg.norm(a, axis=1, keepdims=True)
    d = np.stack([np.einsum("ni,ni->n", a, a @ m.T) for m in S], axis=1)
    return a, d.max(axis=1) - d.min(axis=1)


def equal_angle_solve(T_list, starts=10_000):
    """Unit a for which the four vectors (a, T_b a, T_c a, T_d a) meet at equal angles.

    Returns one representative per antipodal pair, canonically signed and sorted.
    """
    T = [np.eye(3)] + [np.asarray(t, dtype=float) for t in T_list]
    if len(T) != 4:
        raise ValueError("expected (T_b, T_c, T_d)")
    a, spread = _newton_equal_angles(fibonacci_sphere(starts), T)
    good = a[spread < 1e-10]
    roots = []
    for v in good:
        v = canonical_sign(v)
        if all(np.linalg.norm(v - w) > 1e-7 for w in roots):
            roots.append(v)
    polished = []
    for v in roots:
        w, s = _newton_equal_angles(v[None], T, iters=10)
        w = canonical_sign(w[0])
        if s[0] < 1e-12:
            polished.append(w)
    polished.sort(key=lambda v: tuple(np.round(-v, 9)))
    return polished
