#!/usr/bin/env python3
"""Semi-supervised overall-accuracy table on converted public scenes.

For each scene: single-resolution runs at several training sizes, plus a
multiresolution fusion run over the standard resolution ladder. Scene
files are expected as in run_boundary_benchmark.py.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mgsp.cli import main as mgsp_main

SCENES = ("indian_pines", "salinas", "paviau")
RESOLUTIONS = (25, 35, 50, 70, 100, 140, 200, 280, 400)


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default="data")
    ap.add_argument("-o", "--output", default="classification-benchmark")
    ap.add_argument("--train-sizes", type=int, nargs="+", default=[5, 10, 20])
    ap.add_argument("--superpixels", type=int, default=100, help="single-resolution N")
    ap.add_argument("--strategy", default="dv")
    ap.add_argument("--jobs", type=int, default=4)
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
        for tspc in args.train_sizes:
            print(f"== {scene} single-resolution ts/c={tspc} ==")
            worst = max(worst, mgsp_main([
                "classify", str(cube_path), str(gt_path),
                "-o", str(Path(args.output) / scene / f"src-{tspc}"),
                "--superpixels", str(args.superpixels),
                "--train-per-class", str(tspc),
                "--seed", str(args.seed),
            ]))
            print(f"== {scene} multiresolution ts/c={tspc} ({args.strategy}) ==")
            worst = max(worst, mgsp_main([
                "classify-mr", str(cube_path), str(gt_path),
                "-o", str(Path(args.output) / scene / f"mrc-{tspc}"),
                "--resolutions", *[str(r) for r in RESOLUTIONS],
                "--strategy", args.strategy,
                "--train-per-class", str(tspc),
                "--jobs", str(args.jobs),
                "--seed", str(args.seed),
            ]))
    return worst


if __name__ == "__main__":
    sys.exit(run())
