"""Command-line front end: catalogue, family, chart, mesh, tile, verify."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import eeb, io
from . import sphere_solver as ss
from .symmetry import MODES

EXIT_OK, EXIT_FAIL, EXIT_SOLVER, EXIT_MESH = 0, 1, 2, 3
NAMED_POINTS = ("e2", "f2", "g2", "h2", "i2", "kelvin", "pd")
FAMILY_CIRCLES = ("quad", "abcd", "acbd", "adbc", "hex1", "hex2", "pd")


@dataclass
class RunConfig:
    mode: str | None = None
    require_soft: bool = False
    require_planar: bool = False
    tol: float = eeb.SOFT_TOL
    resolution: int = 64
    samples: int = 360
    circle: str = "quad"
    solution: str = "g2"
    box: tuple = (1, 1, 1)
    out: str | None = None
    max_iter: int = 2000
    eps: float = 1e-7
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode is not None and self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.tol > 0 or not self.eps > 0:
            raise ValueError("tolerances must be positive")
        if self.resolution < 8:
            raise ValueError("resolution must be >= 8")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")


def _emit(text, out):
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text)


# --- catalogue ---------------------------------------------------------------

def catalogue_table(cat):
    head = f"{'name':<6} {'a_x':>12} {'a_y':>12} {'a_z':>12} {'phi':>10} {'theta':>10}  {'planar':<16} soft  standard"
    rows = [head, "-" * len(head)]
    for s in cat.solutions:
        a = s.a
        rows.append(
            f"{s.name:<6} {a[0]:>12.8f} {a[1]:>12.8f} {a[2]:>12.8f} {s.euler.phi:>10.6f} {s.euler.theta:>10.6f}  "
            f"{','.join(s.planar_faces) or '-':<16} {'yes' if s.soft else 'no':<5} {'yes' if s.standard else 'no'}"
        )
    return "\n".join(rows) + "\n"


def cmd_catalogue(cfg, as_json=False):
    mode = cfg.mode or "octahedral"
    try:
        cat = eeb.run_catalogue(mode, require_planar_face=cfg.require_planar,
                                require_soft=cfg.require_soft, tol=cfg.tol)
    except (eeb.InconsistentSystem, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = io.dumps(cat.to_json())
    if cfg.out:
        io.write_text(cfg.out, text)
    sys.stdout.write(text if as_json else catalogue_table(cat))
    return EXIT_OK


# --- family ------------------------------------------------------------------

FAMILY_HEADER = ["theta_param", "a_x", "a_y", "a_z", "phi", "theta", "soft", "standard", "min_pair_dot", "label"]


def _parse_circle(spec, mode):
    if spec in FAMILY_CIRCLES:
        return eeb.family_circle(spec, mode)
    try:
        n = np.array([float(x) for x in spec.split(",")])
    except ValueError:
        raise KeyError(f"unknown circle {spec!r}; use one of {FAMILY_CIRCLES} or a normal 'x,y,z'")
    if n.shape != (3,):
        raise KeyError(f"explicit circle normal needs 3 components, got {spec!r}")
    return ss.GreatCircle(n), None, None


def family_rows(cfg):
    mode = cfg.mode or ("tetrahedral" if cfg.circle == "pd" else "octahedral")
    circle, start, end = _parse_circle(cfg.circle, mode)
    labels = {}
    for name in NAMED_POINTS:
        a = eeb.named_solution(name).a
        for v in (a, -a):
            if not circle.contains(v, 1e-9):
                continue
            if start is None:
                t = circle.parameter(v)
            else:
                e2 = end - (end @ start) * start
                e2 = e2 / np.linalg.norm(e2)
                t = float(np.arctan2(v @ e2, v @ start))
                span = float(np.arccos(np.clip(start @ end, -1, 1)))
                if t < -1e-12 or t > span + 1e-12:
                    continue
                # snap onto the exact arc ends so endpoints are labelled, not duplicated
                t = 0.0 if t < 1e-12 else (span if t > span - 1e-12 else t)
            labels.setdefault(t, name if v is a else f"-{name}")
    pts = eeb.family(circle, cfg.samples, mode, start=start, end=end, extra=tuple(labels))
    rows = []
    for p in pts:
        s = p.solution
        rows.append([p.parameter, *s.a, s.euler.phi, s.euler.theta,
                     "true" if s.soft else "false", "true" if s.standard else "false",
                     p.min_pair_dot, labels.get(p.parameter, "")])
    return rows


def cmd_family(cfg):
    try:
        rows = family_rows(cfg)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_FAIL
    _emit(io.csv_text(FAMILY_HEADER, rows), cfg.out)
    return EXIT_OK


# --- chart -------------------------------------------------------------------

def chart_rows(samples=360):
    rows = []
    circles = dict(eeb.named_circles("tetrahedral"))
    circles["pd"] = eeb.pd_circle()
    for name, c in circles.items():
        for a in c.sample(samples):
            e = ss.euler_from_unit(a)
            rows.append(["circle", name, e.phi, e.theta])
    for name in NAMED_POINTS:
        e = eeb.named_solution(name).euler
        rows.append(["point", name, e.phi, e.theta])
    return rows


def cmd_chart(cfg):
    _emit(io.csv_text(["kind", "label", "phi", "theta"], chart_rows(cfg.samples)), cfg.out)
    return EXIT_OK


# --- meshes ------------------------------------------------------------------

def _solution(name):
    try:
        return eeb.named_solution(name)
    except KeyError:
        raise SystemExit(f"error: unknown solution {name!r}; choose from {', '.join(NAMED_POINTS)}")


def _obj_header(sol):
    return [
        f"solution {sol.name} ({sol.mode})",
        "a " + " ".join(io.fmt(x) for x in sol.a),
        f"phi {io.fmt(sol.euler.phi)}",
        f"theta {io.fmt(sol.euler.theta)}",
    ]


def _build(cfg):
    from .realization import MeshDegenerationError, PropagationError, WeldError, build_cell_mesh

    sol = _solution(cfg.solution)
    try:
        return sol, build_cell_mesh(sol, resolution=cfg.resolution, max_iter=cfg.max_iter, eps=cfg.eps), EXIT_OK
    except PropagationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return sol, None, EXIT_SOLVER
    except (WeldError, MeshDegenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return sol, None, EXIT_MESH


def cmd_mesh(cfg):
    sol, mesh, code = _build(cfg)
    if mesh is None:
        return code
    out = cfg.out or f"{sol.name}.obj"
    io.write_text(out, io.obj_text([(f"cell_{sol.name}", mesh.vertices, mesh.triangles)], _obj_header(sol)))
    stats = mesh.stats()
    io.write_json(out.rsplit(".", 1)[0] + ".stats.json", stats)
    print(f"wrote {out}: {stats['vertices']} vertices, {stats['triangles']} triangles, "
          f"area {stats['total_area']:.6f}, open edges {stats['open_edges']}")
    return EXIT_OK


def cmd_tile(cfg):
    from .realization import tile_box

    sol, mesh, code = _build(cfg)
    if mesh is None:
        return code
    tiling = tile_box(mesh, cfg.box, fractional=True)
    out = cfg.out or f"{sol.name}_tiling.obj"
    objs = [(f"cell_{k}", tiling.cell_vertices(k), mesh.triangles) for k in range(len(tiling))]
    io.write_text(out, io.obj_text(objs, _obj_header(sol)))
    stats = {
        "solution": sol.name,
        "cells": len(tiling),
        "box": list(cfg.box),
        "centers": tiling.centers().tolist(),
        "adjacent_pairs": len(tiling.adjacency),
        "max_face_residual": tiling.max_face_residual,
        "face_matched": tiling.face_matched,
        "cell": mesh.stats(),
    }
    io.write_json(out.rsplit(".", 1)[0] + ".stats.json", stats)
    print(f"wrote {out}: {len(tiling)} cells, {len(tiling.adjacency)} shared faces, "
          f"max face residual {tiling.max_face_residual:.3e}")
    return EXIT_OK if tiling.face_matched else EXIT_MESH


# --- verify ------------------------------------------------------------------

def cmd_verify(cfg, include_meshes=True):
    from .checks import all_checks

    checks = all_checks(include_meshes=include_meshes, resolution=min(cfg.resolution, 32))
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} identities hold")
    return EXIT_FAIL if failed else EXIT_OK


# --- entry point -------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="softtiler", description="Soft second-order tilings of the bcc Voronoi cell.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mode=True):
        if mode:
            sp.add_argument("--mode", choices=MODES)
        sp.add_argument("--tol", type=float, default=eeb.SOFT_TOL)
        sp.add_argument("--out")

    c = sub.add_parser("catalogue", help="deduplicated second-order solutions")
    common(c)
    c.add_argument("--soft", action="store_true", help="keep only soft cells")
    c.add_argument("--planar", action="store_true", help="require at least one planar face")
    c.add_argument("--json", action="store_true", help="print JSON instead of the table")

    f = sub.add_parser("family", help="classified samples along a great circle")
    common(f)
    f.add_argument("--circle", default="quad", help=f"one of {', '.join(FAMILY_CIRCLES)} or a normal x,y,z")
    f.add_argument("--samples", type=int, default=360)

    ch = sub.add_parser("chart", help="(phi, theta) chart data")
    common(ch, mode=False)
    ch.add_argument("--samples", type=int, default=360)

    for name, hlp in [("mesh", "OBJ mesh of one cell"), ("tile", "OBJ mesh of a block of cells")]:
        m = sub.add_parser(name, help=hlp)
        common(m, mode=False)
        m.add_argument("--solution", default="g2", choices=NAMED_POINTS)
        m.add_argument("--resolution", type=int, default=64)
        m.add_argument("--max-iter", type=int, default=2000)
        m.add_argument("--eps", type=float, default=1e-7)
        if name == "tile":
            m.add_argument("--box", type=int, nargs=3, default=(2, 2, 2), metavar=("NX", "NY", "NZ"))

    v = sub.add_parser("verify", help="re-check the reference identities")
    v.add_argument("--resolution", type=int, default=32)
    v.add_argument("--no-mesh", action="store_true", help="skip the meshing checks")
    return p


def config_from_args(args):
    kw = {k: getattr(args, k) for k in ("mode", "tol", "out", "samples", "circle", "solution", "resolution", "eps")
          if hasattr(args, k)}
    if hasattr(args, "soft"):
        kw["require_soft"] = args.soft
        kw["require_planar"] = args.planar
    if hasattr(args, "box"):
        kw["box"] = tuple(args.box)
    if hasattr(args, "max_iter"):
        kw["max_iter"] = args.max_iter
    return RunConfig(**kw)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    if args.command == "catalogue":
        return cmd_catalogue(cfg, as_json=args.json)
    if args.command == "family":
        return cmd_family(cfg)
    if args.command == "chart":
        return cmd_chart(cfg)
    if args.command == "mesh":
        return cmd_mesh(cfg)
    if args.command == "tile":
        return cmd_tile(cfg)
    if args.command == "verify":
        return cmd_verify(cfg, include_meshes=not args.no_mesh)
    parser.error(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
