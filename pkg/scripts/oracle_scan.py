"""Compare the analytic solution set of every complete softening system with a
brute-force grid scan, in both symmetry modes.

    python3 scripts/oracle_scan.py [--grid 1000000]
"""
import argparse
import time

import numpy as np

from softtiler import eeb
from softtiler import sphere_solver as ss
from softtiler.symmetry import nodal_transforms


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--grid", type=int, default=10**6)
    args = p.parse_args()
    h = ss.grid_spacing(args.grid)
    print(f"grid {args.grid} points, spacing {h:.2e} rad")
    for mode in ("octahedral", "tetrahedral"):
        T = nodal_transforms(mode)
        for system in eeb.enumerate_complete_systems():
            analytic = eeb.solve_system(system, T)
            M = sum(ss.pair_matrix(T[i], T[j]) for i, j in system.pairs)
            res = lambda a, M=M, k=len(system.pairs): np.einsum("ij,ij->i", a, a @ M.T) + k
            t0 = time.perf_counter()
            clusters = ss.brute_force_scan(res, args.grid)
            dt = time.perf_counter() - t0
            pts = np.vstack(clusters) if clusters else np.zeros((0, 3))
            off = float(analytic.distance(pts).max()) if len(pts) and hasattr(analytic, "distance") else 0.0
            print(f"  {mode:<11} {system.name}: {type(analytic).__name__:<13} "
                  f"{len(clusters)} cluster(s), {len(pts):>5} pts, max off-set {off:.1e}  ({dt:.2f}s)")


if __name__ == "__main__":
    main()
