"""Draw the (phi, theta) chart of named points and constraint circles.

Needs matplotlib (`pip install artifact[plot]`).

    python3 scripts/plot_chart.py --out chart.png
"""
import argparse
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from softtiler.cli import chart_rows  # noqa: E402


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--samples", type=int, default=720)
    p.add_argument("--out", default="chart.png")
    args = p.parse_args()

    curves, points = defaultdict(list), []
    for r in chart_rows(args.samples):
        kind, label, phi, theta = r[0], r[1], float(r[2]), float(r[3])
        (points.append((label, phi, theta)) if kind == "point" else curves[label].append((phi, theta)))

    fig, ax = plt.subplots(figsize=(8, 5))
    for label, pts in sorted(curves.items()):
        phi, theta = zip(*pts)
        ax.scatter(theta, phi, s=2, label=label)
    for label, phi, theta in points:
        ax.plot(theta, phi, "k.")
        ax.annotate(label, (theta, phi), textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_xlabel("theta")
    ax.set_ylabel("phi")
    ax.invert_yaxis()
    ax.legend(markerscale=4, fontsize=7, loc="lower right")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
