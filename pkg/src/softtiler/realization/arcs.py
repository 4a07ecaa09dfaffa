"""Circular-arc and biarc edges interpolating prescribed end half-tangents.

Half-tangent convention: ``tP`` points from P into the edge, ``tQ`` points
from Q into the edge.  The travel direction at Q is therefore ``-tQ``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PARALLEL_TOL = 1e-12
MATCH_TOL = 1e-6


class ArcError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ArcPiece:
    """One circular arc (or segment when ``radius`` is inf) from ``start``."""

    start: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray  # in-plane unit normal toward the centre; zero for segments
    radius: float
    sweep: float  # angle for arcs, length for segments

    @property
    def length(self):
        return self.sweep if np.isinf(self.radius) else self.radius * self.sweep

    @property
    def center(self):
        return None if np.isinf(self.radius) else self.start + self.radius * self.normal

    def point(self, s):
        """Point at arc length ``s`` (array ok)."""
        s = np.asarray(s, dtype=float)[..., None]
        if np.isinf(self.radius):
            return self.start + s * self.tangent
        phi = s / self.radius
        return self.start + self.radius * (np.sin(phi) * self.tangent + (1 - np.cos(phi)) * self.normal)

    def travel(self, s):
        """Unit travel direction at arc length ``s``."""
        if np.isinf(self.radius):
            return self.tangent.copy()
        phi = s / self.radius
        return np.cos(phi) * self.tangent + np.sin(phi) * self.normal

    @property
    def end(self):
        return self.point(self.length)


def _piece(P, Q, tP):
    """Arc leaving P along tP and passing through Q."""
    d = Q - P
    L = np.linalg.norm(d)
    c = d / L
    cross = np.linalg.norm(np.cross(tP, c))
    if cross < PARALLEL_TOL:
        if tP @ c < 0:
            raise ArcError("start tangent points away from the chord")
        return ArcPiece(P, c, np.zeros(3), np.inf, L)
    perp = d - (d @ tP) * tP
    n = perp / np.linalg.norm(perp)
    r = (d @ d) / (2.0 * (d @ n))
    sweep = 2.0 * np.arccos(np.clip(tP @ c, -1.0, 1.0))
    return ArcPiece(P, tP, n, r, sweep)


@dataclass(frozen=True, eq=False)
class ArcEdge:
    kind: str  # straight | arc | biarc
    P: np.ndarray
    Q: np.ndarray
    pieces: tuple
    samples: np.ndarray

    @property
    def length(self):
        return sum(p.length for p in self.pieces)

    @property
    def center(self):
        return self.pieces[0].center if self.kind == "arc" else None

    @property
    def radius(self):
        return self.pieces[0].radius if self.kind == "arc" else None

    @property
    def plane_normal(self):
        if self.kind != "arc":
            return None
        p = self.pieces[0]
        return np.cross(p.tangent, p.normal)

    @property
    def sweep(self):
        return self.pieces[0].sweep if self.kind == "arc" else None

    def point(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty((len(s), 3))
        offset = 0.0
        for k, p in enumerate(self.pieces):
            last = k == len(self.pieces) - 1
            mask = (s >= offset) & ((s <= offset + p.length) if last else (s < offset + p.length))
            out[mask] = p.point(s[mask] - offset)
            offset += p.length
        return out

    def start_tangent(self):
        return self.pieces[0].travel(0.0)

    def end_tangent(self):
        """Half-tangent at Q (pointing back into the edge)."""
        last = self.pieces[-1]
        return -last.travel(last.length)

    def reversed_samples(self):
        return self.samples[::-1]


def _biarc(P, Q, tP, tQ):
    t0, t1 = tP, -tQ
    v = Q - P
    a = 2.0 * (t0 @ t1 - 1.0)
    b = -2.0 * (v @ (t0 + t1))
    c = v @ v
    if abs(a) < 1e-14:
        if b >= 0:
            raise ArcError("no positive biarc parameter")
        alpha = -c / b
    else:
        disc = np.sqrt(max(b * b - 4 * a * c, 0.0))
        roots = [(-b + disc) / (2 * a), (-b - disc) / (2 * a)]
        alpha = max(roots)
    if not alpha > 0:
        raise ArcError("no positive biarc parameter")
    c1 = P + alpha * t0
    c3 = Q - alpha * t1
    J = 0.5 * (c1 + c3)
    tJ = (c3 - c1) / np.linalg.norm(c3 - c1)
    return _piece(P, J, t0), _piece(J, Q, tJ)


def arc_edge(P, Q, tP, tQ, resolution=64):
    """Edge curve from P to Q with half-tangents tP at P and tQ at Q."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    tP = np.asarray(tP, dtype=float)
    tQ = np.asarray(tQ, dtype=float)
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    d = Q - P
    L = np.linalg.norm(d)
    if L < 1e-12:
        raise ArcError("endpoints coincide")
    for t in (tP, tQ):
        if abs(np.linalg.norm(t) - 1) > 1e-9:
            raise ArcError("tangents must be unit vectors")
    c = d / L
    if np.linalg.norm(np.cross(tP, c)) < PARALLEL_TOL and tP @ c < 0:
        raise ArcError("start tangent antiparallel to the chord")
    if np.linalg.norm(np.cross(tQ, c)) < PARALLEL_TOL and tQ @ c > 0:
        raise ArcError("end tangent antiparallel to the reversed chord")

    single = _piece(P, Q, tP)
    arrive = single.travel(single.length)
    if np.abs(arrive + tQ).max() < MATCH_TOL:
        pieces = (single,)
        kind = "straight" if np.isinf(single.radius) else "arc"
    else:
        pieces = _biarc(P, Q, tP, tQ)
        kind = "biarc"

    total = sum(p.length for p in pieces)
    s = np.linspace(0.0, total, resolution)
    edge = ArcEdge(kind, P, Q, pieces, np.empty((0, 3)))
    pts = edge.point(s)
    pts[0], pts[-1] = P, Q  # exact endpoints for welding
    object.__setattr__(edge, "samples", pts)
    return edge
