#!/usr/bin/env python3
"""Accuracy-under-noise table on the bundled synthetic benchmark.

Writes the scene to a scratch directory, then runs the noise-sweep CLI
for both noise setups (setup 1 scales each sample's deviation by its own
magnitude, setup 2 by the scene mean) and both distributions. Intended
as the cheap, dataset-free counterpart of the public-scene benchmarks.
"""

import argparse
import sys
import tempfile
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mgsp.cli import main as mgsp_main
from mgsp.hsi_io import save_cube, save_labels
from mgsp.synthetic import make_benchmark


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output", default="noise-benchmark")
    ap.add_argument("--superpixels", type=int, default=120)
    ap.add_argument("--train-per-class", type=int, default=20)
    ap.add_argument("--levels", type=float, nargs="+", default=[0.05, 0.10, 0.15])
    ap.add_argument("--seed", type=int, default=123)
    args = ap.parse_args(argv)

    cube, labels = make_benchmark()
    with tempfile.TemporaryDirectory() as tmp:
        cube_path = Path(tmp) / "benchmark.hsic"
        labels_path = Path(tmp) / "benchmark.hsil"
        save_cube(cube.astype(np.float32), cube_path)
        save_labels(labels, labels_path)
        return mgsp_main([
            "noise-sweep", str(cube_path), str(labels_path),
            "-o", args.output,
            "--superpixels", str(args.superpixels),
            "--regroup-ratio", "1.0",
            "--train-per-class", str(args.train_per_class),
            "--levels", *[str(v) for v in args.levels],
            "--seed", str(args.seed),
        ])


if __name__ == "__main__":
    sys.exit(run())
