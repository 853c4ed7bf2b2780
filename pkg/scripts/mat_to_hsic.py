#!/usr/bin/env python3
"""Convert a MATLAB .mat scene (cube or ground truth) to HSIC/HSIL.

The public hyperspectral scenes ship as .mat files holding one array:
the cube as height x width x bands, the ground truth as height x width.
This picks the largest numeric array in the file (or the one named with
--key), flips the cube to band-major order, and saves it. Requires
scipy (install the package's "datasets" extra).

    python scripts/mat_to_hsic.py Indian_pines_corrected.mat data/indian_pines.hsic
    python scripts/mat_to_hsic.py Indian_pines_gt.mat data/indian_pines_gt.hsil --labels
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mgsp.hsi_io import save_cube, save_labels


def pick_array(mat: dict, key):
    if key is not None:
        if key not in mat:
            raise SystemExit(f"key {key!r} not in file; have {sorted(k for k in mat if not k.startswith('__'))}")
        return np.asarray(mat[key])
    best = None
    for name, value in mat.items():
        if name.startswith("__"):
            continue
        arr = np.asarray(value)
        if arr.ndim in (2, 3) and (best is None or arr.size > best.size):
            best = arr
    if best is None:
        raise SystemExit("no 2-d or 3-d array found in the .mat file")
    return best


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("mat", help="input .mat file")
    ap.add_argument("out", help="output .hsic or .hsil path")
    ap.add_argument("--key", default=None, help="variable name inside the .mat")
    ap.add_argument("--labels", action="store_true", help="treat as a label map")
    args = ap.parse_args(argv)

    try:
        from scipy.io import loadmat
    except ImportError:
        raise SystemExit("scipy is required: pip install 'mgsp[datasets]'")

    arr = pick_array(loadmat(args.mat), args.key)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    if args.labels:
        if arr.ndim != 2:
            raise SystemExit(f"label map must be 2-d, got shape {arr.shape}")
        save_labels(arr.astype(np.int32), args.out)
        print(f"{args.out}: labels {arr.shape}, classes {np.unique(arr[arr > 0]).size}")
    else:
        if arr.ndim != 3:
            raise SystemExit(f"cube must be 3-d, got shape {arr.shape}")
        cube = np.ascontiguousarray(np.transpose(arr, (2, 0, 1)), dtype=np.float32)
        save_cube(cube, args.out)
        print(f"{args.out}: cube bands={cube.shape[0]} size={cube.shape[1]}x{cube.shape[2]}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
