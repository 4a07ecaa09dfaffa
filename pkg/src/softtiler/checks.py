"""Reference identities re-checked by ``softtiler verify``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import eeb
from . import sphere_solver as ss
from .symmetry import T_B, T_C, T_D1, nodal_transforms
from .tiling_core import builtin_e2, reference_nodal_structure

SQ2, SQ3, SQ6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)
E1 = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tol: float
    note: str = ""

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"{status}  {self.name}: residual {self.residual:.3e} (tol {self.tol:.0e}){extra}"


def _vec(name, got, want, tol=1e-12, note=""):
    got, want = np.asarray(got, dtype=float), np.asarray(want, dtype=float)
    return Check(name, float(np.abs(got - want).max()), tol, note)


def _scalar(name, got, want, tol=1e-12, note=""):
    return Check(name, abs(float(got) - float(want)), tol, note)


def _flag(name, ok, note=""):
    return Check(name, 0.0 if ok else 1.0, 0.5, note)


def _circle(name, sol, normal, tol=1e-12):
    if not isinstance(sol, ss.GreatCircle):
        return Check(name, np.inf, tol, f"got {type(sol).__name__}")
    n = np.asarray(normal, dtype=float)
    return Check(name, float(min(np.abs(sol.n - n).max(), np.abs(sol.n + n).max())), tol, "normal up to sign")


def _pair(name, sol, p, tol=1e-12):
    if not isinstance(sol, ss.AntipodalPair):
        return Check(name, np.inf, tol, f"got {type(sol).__name__}")
    p = np.asarray(p, dtype=float)
    return Check(name, float(min(np.abs(sol.p - p).max(), np.abs(sol.p + p).max())), tol, "point up to sign")


def first_order_checks():
    cell = builtin_e2()
    ns = reference_nodal_structure(cell)
    kinds = [f.kind for f in cell.faces]
    out = [
        _vec("node 5 coordinates", cell.node(5), (-0.5, -0.5, 1 / SQ2)),
        _vec("node 21 coordinates", cell.node(21), (0, 0, 4 / SQ2)),
        _flag("6 quadrangular + 8 hexagonal faces", kinds.count("quad") == 6 and kinds.count("hex") == 8),
    ]
    for nodes in [(1, 2, 3, 4), (1, 2, 6, 10, 11, 5), (1, 4, 8, 16, 9, 5)]:
        ok = any(set(f.cycle) == set(nodes) for f in cell.faces)
        out.append(_flag(f"face on nodes {nodes} present", ok))
    out.append(_flag("vertex sets abc, abd, acd, bcd",
                     sorted(ns.vertex_set_names()) == ["abc", "abd", "acd", "bcd"]))
    out += [
        _vec("T_b e_x", T_B @ E1, (0, 1, 0)),
        _vec("T_c e_x", T_C @ E1, (-0.5, -0.5, 1 / SQ2)),
        _vec("T_d1 e_x", T_D1 @ E1, (-0.5, -0.5, -1 / SQ2)),
    ]
    return out


def sphere_checks():
    T = nodal_transforms("octahedral")
    circles = eeb.named_circles("octahedral")
    g2 = np.array([1 / SQ2, -1 / SQ2, 0.0])
    i2 = np.array([SQ3 / 2, SQ3 / 6, 1 / SQ6])
    u_pd = np.array([1 / np.sqrt(12), 1 / np.sqrt(12), -2 / SQ6])
    gpd = ss.geodesic_through(g2, i2)
    out = [
        _circle("u_ab normal", ss.antipodal_constraint(T_B), (1 / SQ2, 1 / SQ2, 0)),
        _circle("u_ac normal", ss.antipodal_constraint(T_C), (0.5, -0.5, 1 / SQ2)),
        _circle("u_bc normal", circles["adbc"], (-0.5, 0.5, 1 / SQ2)),
        _pair("isolated octahedral a_cd", ss.antipodal_constraint(ss.pair_matrix(T[2], T[3])), (1 / SQ2, -1 / SQ2, 0)),
        _pair("isolated octahedral a_bd", ss.antipodal_constraint(ss.pair_matrix(T[1], T[3])), (1 / SQ2, 1 / SQ2, 0)),
        _circle("u_quad normal", circles["quad"], (0, 0, 1)),
        _circle("u_hex1 normal", circles["hex1"], (0, 2 / SQ6, SQ2 / SQ6)),
        _pair("g_ab meets g_hex1 at the h2 point", ss.intersect(circles["abcd"], circles["hex1"]), (0.5, -0.5, 1 / SQ2)),
        _circle("u_PD as quoted (unit normal through g2, i2)", gpd, u_pd),
        Check("u_PD as quoted, direction of the g2 x i2 normal",
              float(np.linalg.norm(np.cross(gpd.n, u_pd)) / np.linalg.norm(u_pd)), 1e-12,
              f"|u_PD| = {np.linalg.norm(u_pd):.12f}; the quoted vector is -(g2 x i2), not normalised"),
    ]
    e = [
        ("e2", E1, np.pi / 2, 0.0),
        ("h2", np.array([0.5, -0.5, 1 / SQ2]), np.pi / 4, -np.pi / 4),
        ("i2", i2, np.arccos(1 / SQ6), np.arctan(1 / 3)),
    ]
    for name, a, phi, theta in e:
        ang = ss.euler_from_unit(a)
        out.append(_vec(f"Euler angles of {name}", (ang.phi, ang.theta), (phi, theta)))
    return out


def eeb_checks():
    out = []
    names = sorted(s.name for s in eeb.enumerate_complete_systems())
    out.append(_flag("complete systems are abcd, acbd, adbc", names == ["abcd", "acbd", "adbc"]))
    To = nodal_transforms("octahedral")
    Tt = nodal_transforms("tetrahedral")
    sysm = {s.name: s for s in eeb.enumerate_complete_systems()}
    out.append(_pair("system abcd, octahedral", eeb.solve_system(sysm["abcd"], To), (1 / SQ2, -1 / SQ2, 0)))
    out.append(_pair("system acbd, octahedral", eeb.solve_system(sysm["acbd"], To), (1 / SQ2, 1 / SQ2, 0)))
    out.append(_circle("system abcd, tetrahedral", eeb.solve_system(sysm["abcd"], Tt), (1 / SQ2, 1 / SQ2, 0)))

    oc = eeb.run_catalogue("octahedral", require_planar_face=False, require_soft=True)
    out.append(_flag("octahedral soft catalogue has 2 classes", len(oc.solutions) == 2,
                     ", ".join(s.name for s in oc.solutions)))
    tc = eeb.run_catalogue("tetrahedral", require_planar_face=True, require_soft=True)
    out.append(_flag("tetrahedral soft planar catalogue has 4 classes", len(tc.solutions) == 4,
                     ", ".join(s.name for s in tc.solutions)))
    ref = {
        "f2": ((1 / SQ2, 1 / SQ2, 0), (np.pi / 2, np.pi / 4)),
        "g2": ((1 / SQ2, -1 / SQ2, 0), (np.pi / 2, -np.pi / 4)),
        "h2": ((0.5, -0.5, 1 / SQ2), (np.pi / 4, -np.pi / 4)),
        "i2": ((SQ3 / 2, SQ3 / 6, 1 / SQ6), (np.arccos(1 / SQ6), np.arctan(1 / 3))),
    }
    for name, (a, ang) in ref.items():
        for cat in (oc, tc) if name in ("f2", "g2") else (tc,):
            try:
                s = cat.by_name(name)
            except KeyError:
                out.append(Check(f"{name} in {cat.mode} catalogue", np.inf, 1e-9))
                continue
            out.append(_vec(f"{name} a-vector ({cat.mode})", s.a, a, 1e-9))
            out.append(_vec(f"{name} Euler angles ({cat.mode})", (s.euler.phi, s.euler.theta), ang, 1e-9))
    e2cat = eeb.run_catalogue("tetrahedral", require_planar_face=True, require_soft=False)
    has_e2 = any(np.abs(s.a - E1).max() < 1e-9 for s in e2cat.solutions)
    out.append(_flag("e2 found with planar faces and softness not required", has_e2))

    sol = {n: eeb.named_solution(n) for n in ("e2", "f2", "g2", "h2", "i2")}
    for n in ("f2", "g2", "h2", "i2"):
        out.append(_flag(f"{n} is soft", sol[n].soft))
    out.append(_flag("e2 is not soft", not sol["e2"].soft))
    out.append(_flag("f2 is standard", sol["f2"].standard))
    out.append(_flag("h2 is standard", sol["h2"].standard))
    out.append(_flag("g2 is non-standard", not sol["g2"].standard))
    out.append(_flag("i2 is non-standard", not sol["i2"].standard))
    out.append(_flag("f2 quad face planar", "quad" in sol["f2"].planar_faces))
    out.append(_flag("i2 hex2 face planar", "hex2" in sol["i2"].planar_faces))
    out.append(_flag("e2 quad, hex1, hex2 planar", set(sol["e2"].planar_faces) == {"quad", "hex1", "hex2"}))
    schwarz = sorted(s.name for s in tc.solutions if s.planar_faces and not s.standard)
    out.append(_flag("non-standard classes with a planar face are g2, i2", schwarz == ["g2", "i2"], ", ".join(schwarz)))
    return out


def kelvin_checks():
    k = eeb.kelvin_solution()
    r = 2 * SQ2 - 3
    a = np.array([1.0, r, 0.0]) / np.sqrt(1 + r * r)
    dots = list(k.pair_dots.values())
    return [
        _vec("Kelvin a-vector", k.a, a, 1e-10),
        _scalar("Kelvin a_z", k.a[2], 0.0, 1e-10),
        _scalar("Kelvin theta", k.euler.theta, np.arctan(r), 1e-10),
        Check("Kelvin common product -1/3", float(np.abs(np.array(dots) + 1 / 3).max()), 1e-10),
        _flag("Kelvin a lies on g_quad", "quad" in k.member_circles),
        _flag("Kelvin is not soft", not k.soft),
    ]


def pd_checks():
    p = eeb.pd_solution()
    d = p.pair_dots
    return [
        _vec("PD a-vector", p.a, np.array([5.0, -1.0, SQ2]) / np.sqrt(28), 1e-12),
        _scalar("PD a.b", d["ab"], -3 / 7),
        _scalar("PD a.c", d["ac"], 1 / 7),
        _scalar("PD b.c", d["bc"], -5 / 7),
        _vec("PD Euler angles", (p.euler.phi, p.euler.theta), (np.arccos(1 / np.sqrt(14)), np.arctan(-1 / 5))),
        _flag("PD is not soft", not p.soft),
    ]


def family_checks():
    out = []
    quad = eeb.named_circles("octahedral")["quad"]
    for name in ("e2", "f2", "g2", "kelvin"):
        a = eeb.named_solution(name).a
        t = quad.parameter(a)
        pt = eeb.family(quad, 360, "octahedral", extra=(t,))
        hit = [p for p in pt if p.parameter == t]
        res = np.abs(hit[0].solution.a - a).max() if hit else np.inf
        out.append(Check(f"g_quad family passes through {name}", float(res), 1e-12))
    circle, start, end = eeb.family_circle("pd", "tetrahedral")
    fam = eeb.family(circle, 32, "tetrahedral", start=start, end=end)
    g2, i2 = eeb.named_solution("g2").a, eeb.named_solution("i2").a
    out.append(_vec("g_PD family starts at g2", fam[0].solution.a, g2))
    out.append(_vec("g_PD family ends at i2", fam[-1].solution.a, i2))
    return out


def realization_checks(resolution=32):
    from .realization import build_cell_mesh, propagate_halftangents, tile_box

    h2 = eeb.named_solution("h2")
    A = propagate_halftangents(builtin_e2(), h2)
    out = [_vec("h2 half-tangent at node 1 toward node 2", A[(1, 2)], (0.5, -0.5, 1 / SQ2))]
    mesh = build_cell_mesh(eeb.kelvin_solution(), resolution=resolution)
    tiling = tile_box(mesh, (2, 2, 2), fractional=True)
    quads = [k for k, f in enumerate(builtin_e2().faces) if f.kind == "quad"]
    worst = 0.0
    for c in range(len(tiling)):
        L, t = tiling.placements[c]
        for k in quads:
            P = mesh.face_points(k) @ L.T + t
            P = P - P.mean(axis=0)
            n = np.linalg.svd(P, full_matrices=False)[2][2]
            worst = max(worst, float(np.abs(P @ n).max()))
    out.append(Check("Kelvin tiling quad faces planar", worst, 1e-3))
    return out


def all_checks(include_meshes=True, resolution=32):
    out = first_order_checks() + sphere_checks() + eeb_checks() + kelvin_checks() + pd_checks() + family_checks()
    if include_meshes:
        out += realization_checks(resolution)
    return out
