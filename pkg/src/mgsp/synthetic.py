"""Bundled synthetic benchmark scenes.

Real reference cubes are large downloads, so the test suite and the
noise-robustness experiments ship with a generated stand-in: a tiled
scene whose classes carry smooth, distinct spectral signatures plus a
slow spatial modulation. Everything is deterministic under the seed.
"""

from __future__ import annotations

import numpy as np


def class_signature(
    label: int, bands: int, classes: int = 4, separation: float = 0.10
) -> np.ndarray:
    """Smooth signature for a class: a Gaussian bump whose center and
    width walk across the band axis plus a class-proportional offset."""
    b = np.arange(bands, dtype=np.float64)
    k = label - 1
    center = bands * (k + 0.7) / (classes + 0.4)
    width = bands / 5.0 + 0.6 * k
    return 0.5 + separation * k + np.exp(-0.5 * ((b - center) / width) ** 2)


def _modulation_fields(height: int, width: int) -> list[np.ndarray]:
    # slow unit-range fields; each class gets one so that features inside
    # a class drift smoothly instead of collapsing onto a single point
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    return [
        (xx + yy) / (height + width),
        (xx - yy) / (height + width) + 0.5,
        np.sin(2.0 * np.pi * xx / width) * 0.5 + 0.5,
        np.cos(2.0 * np.pi * yy / height) * 0.5 + 0.5,
    ]


def make_benchmark(
    height: int = 48,
    width: int = 48,
    bands: int = 16,
    classes: int = 4,
    tiles: int = 6,
    spread: float = 0.015,
    wobble: float = 0.10,
    separation: float = 0.10,
    seed: int = 7,
) -> tuple[np.ndarray, np.ndarray]:
    """(cube, labels): a tiled scene of ``tiles`` x ``tiles`` rectangles,
    classes assigned in a fixed shuffled cycle so each class appears in
    several disjoint regions. Labels run 1..classes on every pixel.

    ``wobble`` scales a per-class smooth spatial modulation (band-tilted,
    so the drift is not a plain global gain), ``separation`` spaces the
    class offsets, and ``spread`` is the relative std of per-sample
    jitter. The defaults keep classes separable from superpixel means on
    the clean scene while leaving injected noise room to bite.
    """
    if classes < 2:
        raise ValueError("need at least 2 classes")
    if tiles < 1 or height < tiles or width < tiles:
        raise ValueError("tile grid does not fit the image")
    rng = np.random.default_rng(seed)
    order = rng.permutation(tiles * tiles)
    labels = np.zeros((height, width), dtype=np.int32)
    row_edges = np.linspace(0, height, tiles + 1).astype(int)
    col_edges = np.linspace(0, width, tiles + 1).astype(int)
    for t in range(tiles * tiles):
        r, c = divmod(t, tiles)
        labels[row_edges[r]:row_edges[r + 1], col_edges[c]:col_edges[c + 1]] = (
            int(order[t]) % classes + 1
        )
    fields = _modulation_fields(height, width)
    ramp = np.arange(bands, dtype=np.float64) / max(bands - 1, 1) - 0.5
    cube = np.empty((bands, height, width), dtype=np.float64)
    for k in range(classes):
        mask = labels == (k + 1)
        sig = class_signature(k + 1, bands, classes, separation)
        field = fields[k % len(fields)][mask][None, :]
        mod = 1.0 + wobble * (field - 0.5) * (1.0 + ramp[:, None])
        cube[:, mask] = sig[:, None] * mod
    cube *= 1.0 + spread * rng.standard_normal(cube.shape)
    return np.ascontiguousarray(cube.astype(np.float32)), labels
