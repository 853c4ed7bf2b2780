#!/usr/bin/env python3
"""Boundary-accuracy comparison (k-means vs flat graph vs multilayer)
on converted public scenes.

Expects cubes converted to the package's container format, by default
under data/: indian_pines.hsic + indian_pines_gt.hsil, salinas.hsic +
salinas_gt.hsil, paviau.hsic + paviau_gt.hsil. See scripts/mat_to_hsic.py
for the conversion step. Cluster count defaults to the number of
ground-truth classes per scene.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mgsp.cli import main as mgsp_main
from mgsp.hsi_io import load_labels

SCENES = ("indian_pines", "salinas", "paviau")


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default="data", help="directory with converted scenes")
    ap.add_argument("-o", "--output", default="boundary-benchmark")
    ap.add_argument("--superpixels", type=int, default=100)
    ap.add_argument("--layers", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scenes", nargs="+", default=list(SCENES), choices=SCENES)
    args = ap.parse_args(argv)

    data = Path(args.data)
    worst = 0
    for scene in args.scenes:
        cube_path = data / f"{scene}.hsic"
        gt_path = data / f"{scene}_gt.hsil"
        if not cube_path.exists() or not gt_path.exists():
            print(f"{scene}: missing {cube_path} / {gt_path}, skipping", file=sys.stderr)
            worst = max(worst, 1)
            continue
        gt = load_labels(gt_path)
        clusters = int(np.unique(gt[gt > 0]).size)
        print(f"== {scene} (clusters={clusters}) ==")
        code = mgsp_main([
            "boundary", str(cube_path), str(gt_path),
            "-o", str(Path(args.output) / scene),
            "--superpixels", str(args.superpixels),
            "--clusters", str(clusters),
            "--layers", str(args.layers),
            "--seed", str(args.seed),
        ])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run())
