"""Mesh one cell, tile a box with it and write OBJ files.

    python3 scripts/tile_demo.py --solution h2 --box 2 2 2 --resolution 32 --out out/
"""
import argparse
from pathlib import Path

from softtiler import cli


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--solution", default="g2")
    p.add_argument("--box", nargs=3, default=["2", "2", "2"])
    p.add_argument("--resolution", default="32")
    p.add_argument("--out", default="out")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    common = ["--solution", args.solution, "--resolution", args.resolution]
    code = cli.main(["mesh", *common, "--out", str(out / f"{args.solution}.obj")])
    if code == 0:
        code = cli.main(["tile", *common, "--box", *args.box, "--out", str(out / f"{args.solution}_tile.obj")])
    raise SystemExit(code)


if __name__ == "__main__":
    main()
