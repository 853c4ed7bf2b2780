"""Segmentation quality metrics: overall accuracy and boundary
agreement."""

from __future__ import annotations

import numpy as np


def overall_accuracy(pred: np.ndarray, truth: np.ndarray, mask: np.ndarray) -> float:
    """Fraction of masked pixels where pred equals truth.

    The mask selects the evaluation set (labeled pixels, typically minus
    the training set); an empty mask is an error, not a NaN.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    mask = np.asarray(mask, dtype=bool)
    if not (pred.shape == truth.shape == mask.shape):
        raise ValueError("pred, truth and mask must share a shape")
    total = int(mask.sum())
    if total == 0:
        raise ValueError("evaluation mask is empty")
    return float(np.count_nonzero(pred[mask] == truth[mask]) / total)


def boundary_map(labels: np.ndarray, neighborhood: int = 4) -> np.ndarray:
    """Boolean (H, W) map: True where any in-image neighbor has a
    different label. Border pixels only compare against neighbors that
    exist. Unlabeled background counts as its own class, so transitions
    into it are boundaries."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError("label map must be 2-d")
    if neighborhood not in (4, 8):
        raise ValueError(f"neighborhood must be 4 or 8, got {neighborhood}")
    out = np.zeros(labels.shape, dtype=bool)
    out[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    out[:, 1:] |= labels[:, 1:] != labels[:, :-1]
    out[:-1, :] |= labels[:-1, :] != labels[1:, :]
    out[1:, :] |= labels[1:, :] != labels[:-1, :]
    if neighborhood == 8:
        out[:-1, :-1] |= labels[:-1, :-1] != labels[1:, 1:]
        out[1:, 1:] |= labels[1:, 1:] != labels[:-1, :-1]
        out[:-1, 1:] |= labels[:-1, 1:] != labels[1:, :-1]
        out[1:, :-1] |= labels[1:, :-1] != labels[:-1, 1:]
    return out


def boundary_accuracy(pred: np.ndarray, truth: np.ndarray, neighborhood: int = 4) -> float:
    """Fraction of all pixels whose boundary indicator matches between
    the predicted and ground-truth maps."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth must share a shape")
    bp = boundary_map(pred, neighborhood)
    bt = boundary_map(truth, neighborhood)
    return float(np.count_nonzero(bp == bt) / bp.size)
