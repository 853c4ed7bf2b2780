"""Dense order-4 tensor algebra: unfoldings, n-mode products, HOSVD, and
the two-sided spectral transform used by the multilayer pipeline.

Index conventions (frozen, tests depend on them)
------------------------------------------------
A tensor is a numpy array of shape ``(I1, I2, I3, I4)``; the flat value
order is row-major over ``(i1, i2, i3, i4)``. Modes are numbered 1..4.

``unfold(t, n)`` returns the ``I_n x (prod of the rest)`` matrix whose
row ``i`` collects the entries with the n-th index frozen at ``i`` and
the remaining axes arranged in ascending cyclic order
``n+1, n+2, n+3 (mod 4)``, flattened row-major (the last cyclic axis
varies fastest along columns). ``fold`` is its exact inverse for given
target dimensions.

Factor sign convention: each factor column is flipped so that its
largest-magnitude entry is positive (first such entry on ties). An
all-zero unfolding gets the identity factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _check_tensor4(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t)
    if t.ndim != 4:
        raise ValueError(f"expected an order-4 tensor, got ndim={t.ndim}")
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor has non-finite values")
    return t


def _check_mode(mode: int) -> int:
    if mode not in (1, 2, 3, 4):
        raise ValueError(f"mode must be in 1..4, got {mode}")
    return mode


def _cyclic_axes(mode: int) -> tuple[int, int, int, int]:
    m = mode - 1
    return (m, (m + 1) % 4, (m + 2) % 4, (m + 3) % 4)


def unfold(t: np.ndarray, mode: int) -> np.ndarray:
    t = _check_tensor4(t)
    _check_mode(mode)
    axes = _cyclic_axes(mode)
    return np.ascontiguousarray(t.transpose(axes).reshape(t.shape[mode - 1], -1))


def fold(mat: np.ndarray, dims, mode: int) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of shape ``dims``."""
    mat = np.asarray(mat)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 4:
        raise ValueError("dims must have length 4")
    _check_mode(mode)
    axes = _cyclic_axes(mode)
    expected = (dims[mode - 1], int(np.prod([dims[a] for a in axes[1:]])))
    if mat.shape != expected:
        raise ValueError(f"matrix shape {mat.shape} does not match dims {dims} for mode {mode}")
    shaped = mat.reshape([dims[a] for a in axes])
    inverse = np.argsort(axes)
    return np.ascontiguousarray(shaped.transpose(inverse))


def n_mode_product(t: np.ndarray, m: np.ndarray, mode: int) -> np.ndarray:
    """Contract matrix ``m`` against tensor mode ``mode``.

    ``m`` has shape (J, I_mode); the result replaces that dimension by J.
    """
    t = _check_tensor4(t)
    _check_mode(mode)
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[1] != t.shape[mode - 1]:
        raise ValueError(
            f"mode-{mode} product needs a matrix with {t.shape[mode - 1]} columns, "
            f"got shape {m.shape}"
        )
    dims = list(t.shape)
    dims[mode - 1] = m.shape[0]
    return fold(m @ unfold(t, mode), dims, mode)


def _fix_signs(u: np.ndarray) -> np.ndarray:
    u = u.copy()
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
    return u


def _core_mode_norms(core: np.ndarray, mode: int) -> np.ndarray:
    axes = tuple(a for a in range(4) if a != mode - 1)
    return np.sqrt(np.sum(core * core, axis=axes))


@dataclass(frozen=True)
class HosvdResult:
    """Core tensor, one orthonormal square factor per mode, and the four
    non-increasing mode singular-value sequences (Frobenius norms of the
    frozen-index core slices, equal to the singular values of the
    corresponding unfoldings)."""

    core: np.ndarray
    factors: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    mode_singular_values: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    def reconstruct(self) -> np.ndarray:
        t = self.core
        for mode, u in enumerate(self.factors, start=1):
            t = n_mode_product(t, u, mode)
        return t


def hosvd(t: np.ndarray) -> HosvdResult:
    """Higher-order SVD of an order-4 tensor.

    Factors come from the SVD of each mode unfolding (full U basis; the
    small side of the SVD is always the mode dimension here, so the wide
    V factor is never materialized). No truncation is applied.
    """
    t = _check_tensor4(t).astype(np.float64, copy=False)
    factors = []
    for mode in range(1, 5):
        a = unfold(t, mode)
        rows, cols = a.shape
        if not a.any():
            u = np.eye(rows)
        else:
            u, _, _ = np.linalg.svd(a, full_matrices=rows > cols)
        factors.append(_fix_signs(u))
    core = t
    for mode, u in enumerate(factors, start=1):
        core = n_mode_product(core, u.T, mode)
    sv = tuple(_core_mode_norms(core, mode) for mode in range(1, 5))
    return HosvdResult(core=core, factors=tuple(factors), mode_singular_values=sv)


def mode_singular_values(result: HosvdResult, mode: int) -> np.ndarray:
    """Mode singular values recomputed from the core slice norms."""
    _check_mode(mode)
    return _core_mode_norms(result.core, mode)


def mgst(signal: np.ndarray, fs: np.ndarray, es: np.ndarray) -> np.ndarray:
    """Two-sided spectral transform of a layer-by-entity signal matrix:
    ``fs.T @ signal @ es``. Orthonormal ``fs``/``es`` make it an isometry."""
    signal = np.asarray(signal)
    fs = np.asarray(fs)
    es = np.asarray(es)
    if signal.ndim != 2:
        raise ValueError("signal must be a 2-d array")
    if fs.shape != (signal.shape[0], signal.shape[0]):
        raise ValueError(f"layer basis shape {fs.shape} does not match signal rows {signal.shape[0]}")
    if es.shape != (signal.shape[1], signal.shape[1]):
        raise ValueError(f"entity basis shape {es.shape} does not match signal cols {signal.shape[1]}")
    return fs.T @ signal @ es


def inverse_mgst(spectrum: np.ndarray, fs: np.ndarray, es: np.ndarray) -> np.ndarray:
    """Inverse of :func:`mgst` for orthonormal bases."""
    return np.asarray(fs) @ np.asarray(spectrum) @ np.asarray(es).T
