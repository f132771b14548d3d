"""Write 2-D PCA plot data for an evaluation CSV, optionally as a PNG.

The PNG needs matplotlib, which is not a package dependency.
"""

import argparse
import io

from kineseq.classifier import load_dataset, pca_project, projection_to_csv
from kineseq.synth import build_dataset, load_poses


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dataset", help="evaluation CSV (default: synthetic from bundled poses)")
    ap.add_argument("--jitter", type=float, default=8.0)
    ap.add_argument("--csv", default="pca.csv")
    ap.add_argument("--png")
    args = ap.parse_args()

    if args.dataset:
        ds = load_dataset(args.dataset, k=1)
    else:
        ds = load_dataset(io.StringIO(build_dataset(load_poses(), 30, args.jitter, seed=0)), k=1)
    points = pca_project(ds)
    with open(args.csv, "w") as fh:
        fh.write(projection_to_csv(points))
    print(f"wrote {len(points)} points to {args.csv}")

    if args.png:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 4))
        for label in sorted({lb for _, lb in points}):
            xy = [p for p, lb in points if lb == label]
            ax.scatter([p[0] for p in xy], [p[1] for p in xy], s=12, label=label)
        ax.set_xlabel("PC1")
        ax.set_ylabel("PC2")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.png, dpi=120)
        print(f"wrote {args.png}")


if __name__ == "__main__":
    main()
