"""Hyperspectral cube and label-map containers, file formats, noise
injection, and image exports.

In-memory conventions (frozen)
------------------------------
A cube is a numpy array of shape ``(K, H, W)``: band-major, then
row-major within a band. A label map is an integer array of shape
``(H, W)``; 0 means unlabeled background, classes start at 1.

Cube file format ("HSIC"): magic ``HSIC``, u32 LE version (=1), u32 LE
K, H, W, then K*H*W float32 LE samples in the in-memory order. Label
file format ("HSIL"): magic ``HSIL``, u32 LE version (=1), u32 LE H, W,
then H*W u16 LE labels row-major. Both round-trip losslessly.
"""

from __future__ import annotations

import struct

import numpy as np

CUBE_MAGIC = b"HSIC"
LABEL_MAGIC = b"HSIL"
FORMAT_VERSION = 1

NOISE_MODELS = ("pixel", "global-mean")
NOISE_DISTRIBUTIONS = ("gaussian", "uniform")


class HsiFormatError(ValueError):
    """Base error for cube/label file problems."""


class BadMagicError(HsiFormatError):
    pass


class TruncatedError(HsiFormatError):
    pass


class NonFiniteError(HsiFormatError):
    pass


def _check_cube(cube: np.ndarray) -> np.ndarray:
    cube = np.asarray(cube)
    if cube.ndim != 3:
        raise ValueError(f"cube must have shape (bands, height, width), got ndim={cube.ndim}")
    if min(cube.shape) < 1:
        raise ValueError(f"cube dimensions must be positive, got {cube.shape}")
    if not np.all(np.isfinite(cube)):
        raise NonFiniteError("cube has non-finite values")
    return cube


def _check_labels(labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError(f"label map must be 2-d, got ndim={labels.ndim}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValueError("label map must be integer valued")
    if labels.min(initial=0) < 0 or labels.max(initial=0) > 0xFFFF:
        raise ValueError("labels must fit in u16 (0..65535)")
    return labels


def save_cube(cube: np.ndarray, path) -> None:
    """Write a cube in the HSIC format (float32 payload)."""
    cube = _check_cube(cube)
    k, h, w = cube.shape
    payload = np.ascontiguousarray(cube, dtype="<f4")
    with open(path, "wb") as f:
        f.write(struct.pack("<4sIIII", CUBE_MAGIC, FORMAT_VERSION, k, h, w))
        f.write(payload.tobytes())


def load_cube(path) -> np.ndarray:
    """Read an HSIC file into a float32 (K, H, W) array."""
    with open(path, "rb") as f:
        data = f.read()
    header = struct.calcsize("<4sIIII")
    if len(data) < header:
        raise TruncatedError(f"file too short for a cube header ({len(data)} bytes)")
    magic, version, k, h, w = struct.unpack_from("<4sIIII", data)
    if magic != CUBE_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {CUBE_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise HsiFormatError(f"unsupported cube format version {version}")
    if min(k, h, w) < 1:
        raise HsiFormatError(f"cube dimensions must be positive, got ({k}, {h}, {w})")
    expected = header + k * h * w * 4
    if len(data) < expected:
        raise TruncatedError(f"cube payload truncated: {len(data)} bytes, need {expected}")
    if len(data) > expected:
        raise HsiFormatError(f"cube file has {len(data) - expected} trailing bytes")
    values = np.frombuffer(data, dtype="<f4", offset=header).reshape(k, h, w)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("cube payload has non-finite values")
    return np.ascontiguousarray(values, dtype=np.float32)


def save_labels(labels: np.ndarray, path) -> None:
    """Write a label map in the HSIL format (u16 payload)."""
    labels = _check_labels(labels)
    h, w = labels.shape
    with open(path, "wb") as f:
        f.write(struct.pack("<4sIII", LABEL_MAGIC, FORMAT_VERSION, h, w))
        f.write(np.ascontiguousarray(labels, dtype="<u2").tobytes())


def load_labels(path) -> np.ndarray:
    """Read an HSIL file into an int32 (H, W) array."""
    with open(path, "rb") as f:
        data = f.read()
    header = struct.calcsize("<4sIII")
    if len(data) < header:
        raise TruncatedError(f"file too short for a label header ({len(data)} bytes)")
    magic, version, h, w = struct.unpack_from("<4sIII", data)
    if magic != LABEL_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {LABEL_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise HsiFormatError(f"unsupported label format version {version}")
    if min(h, w) < 1:
        raise HsiFormatError(f"label dimensions must be positive, got ({h}, {w})")
    expected = header + h * w * 2
    if len(data) < expected:
        raise TruncatedError(f"label payload truncated: {len(data)} bytes, need {expected}")
    if len(data) > expected:
        raise HsiFormatError(f"label file has {len(data) - expected} trailing bytes")
    values = np.frombuffer(data, dtype="<u2", offset=header).reshape(h, w)
    return values.astype(np.int32)


def inject_noise(cube: np.ndarray, model: str, dist: str, level: float, seed: int) -> np.ndarray:
    """Return a noisy copy of the cube.

    ``model`` picks how the per-sample noise std is set:
      * ``pixel``: std = level * |sample value|, so strong reflectances
        get proportionally strong noise;
      * ``global-mean``: one shared std = level * |mean of all values|.

    ``dist`` is ``gaussian`` (zero-mean normal) or ``uniform`` (zero-mean
    uniform on [-sqrt(3)*std, +sqrt(3)*std], which has variance std^2).
    Deterministic for a given seed.
    """
    cube = _check_cube(cube)
    if model not in NOISE_MODELS:
        raise ValueError(f"unknown noise model {model!r}, expected one of {NOISE_MODELS}")
    if dist not in NOISE_DISTRIBUTIONS:
        raise ValueError(f"unknown noise distribution {dist!r}, expected one of {NOISE_DISTRIBUTIONS}")
    if not (0.0 < level < 1.0):
        raise ValueError(f"noise level must lie in (0, 1), got {level}")
    if model == "pixel":
        std = level * np.abs(cube.astype(np.float64))
    else:
        std = level * abs(float(cube.mean()))
    rng = np.random.default_rng(seed)
    if dist == "gaussian":
        noise = rng.standard_normal(cube.shape) * std
    else:
        noise = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), cube.shape) * std
    return (cube.astype(np.float64) + noise).astype(cube.dtype, copy=False)


def valid_pixel_mask(cube: np.ndarray) -> np.ndarray:
    """(H, W) bool mask of pixels whose spectrum is not identically zero.

    Some public scenes carry all-zero padding pixels; those are treated
    as unlabeled everywhere downstream.
    """
    cube = _check_cube(cube)
    return np.any(cube != 0, axis=0)


def label_palette(label: int) -> tuple[int, int, int]:
    """Deterministic color for a label: 0 is black, label k gets the hue
    (k * 137 degrees) mod 360 at full saturation and value."""
    if label == 0:
        return (0, 0, 0)
    hue = (label * 137) % 360
    sector, frac = divmod(hue / 60.0, 1.0)
    sector = int(sector) % 6
    x = 1.0 - abs((hue / 60.0) % 2.0 - 1.0)
    rgb = [
        (1.0, x, 0.0),
        (x, 1.0, 0.0),
        (0.0, 1.0, x),
        (0.0, x, 1.0),
        (x, 0.0, 1.0),
        (1.0, 0.0, x),
    ][sector]
    return tuple(int(round(255 * c)) for c in rgb)


def export_labelmap_ppm(labels: np.ndarray, path) -> None:
    """Write a label map as a binary PPM (P6) using :func:`label_palette`."""
    labels = _check_labels(labels)
    h, w = labels.shape
    lut = {int(v): label_palette(int(v)) for v in np.unique(labels)}
    image = np.zeros((h, w, 3), dtype=np.uint8)
    for value, rgb in lut.items():
        image[labels == value] = rgb
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(image.tobytes())


def export_mask_pgm(mask: np.ndarray, path) -> None:
    """Write a boolean (H, W) mask as a binary PGM (P5), 255 for True."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-d")
    h, w = mask.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write((mask.astype(np.uint8) * 255).tobytes())
