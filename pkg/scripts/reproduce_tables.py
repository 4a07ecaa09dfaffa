"""Print both catalogues, the Kelvin and PD points, and per-cell mesh statistics.

    python3 scripts/reproduce_tables.py [--resolution 32] [--no-mesh]
"""
import argparse
import time

import numpy as np

from softtiler import eeb
from softtiler.realization import build_cell_mesh, tile_box


def show_catalogue(mode, **kw):
    cat = eeb.run_catalogue(mode, **kw)
    print(f"\n{mode} ({', '.join(k for k, v in kw.items() if v) or 'unfiltered'})")
    for s in cat.solutions:
        a = np.round(s.a, 6)
        print(f"  {s.name:<4} a={a}  planar={','.join(s.planar_faces) or '-'}  soft={s.soft}  standard={s.standard}")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--resolution", type=int, default=32)
    p.add_argument("--no-mesh", action="store_true")
    args = p.parse_args()

    show_catalogue("octahedral", require_soft=True)
    show_catalogue("tetrahedral", require_planar_face=True, require_soft=True)
    show_catalogue("tetrahedral", require_planar_face=True, require_soft=False)

    k, pd = eeb.kelvin_solution(), eeb.pd_solution()
    print(f"\nkelvin a={np.round(k.a, 9)}  pair dots={sorted({round(float(v), 12) for v in k.pair_dots.values()})}")
    print(f"pd     a={np.round(pd.a, 9)}  phi={pd.euler.phi:.9f} theta={pd.euler.theta:.9f}")
    print("       " + "  ".join(f"{key}={v:+.6f}" for key, v in sorted(pd.pair_dots.items())))

    if args.no_mesh:
        return
    print(f"\nmeshes at resolution {args.resolution}")
    print(f"  {'cell':<7}{'area':>10}{'min ang':>9}{'open':>6}{'tile res':>11}{'secs':>7}")
    for name in ("e2", "f2", "g2", "h2", "i2", "kelvin", "pd"):
        t0 = time.perf_counter()
        m = build_cell_mesh(eeb.named_solution(name), resolution=args.resolution)
        til = tile_box(m, (2, 2, 2), fractional=True)
        dt = time.perf_counter() - t0
        print(f"  {name:<7}{m.area():>10.5f}{m.min_angle():>9.2f}{m.open_edges():>6}"
              f"{til.max_face_residual:>11.1e}{dt:>7.1f}")


if __name__ == "__main__":
    main()
