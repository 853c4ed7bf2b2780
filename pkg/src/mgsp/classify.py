"""One-vs-rest linear hinge classifier and the single-resolution
semi-supervised segmentation pipeline built on it.

The pipeline: segment the scene into N superpixels, group their bands
into layers, build the multilayer network, spectrally regroup the
superpixels into D = ceil(ratio * N) clusters, average features per
group (pixel-count weighted), train the classifier on the groups that
contain training pixels, predict every group, and let pixels inherit
their group's label. Decision values are softmax-normalized margins.
"""

from __future__ import annotations

import math
import struct
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .clustering import mln_spectral_clustering, regroup, ClusterAssignment
from .mln import MlnConfig, build_mln_adjacency, cluster_bands
from .rng import SplitMix64, derive_seed
from .superpixel import (
    ErsConfig,
    SuperpixelMap,
    build_pixel_graph,
    ers_segment,
    segment_sizes,
    superpixel_centroids,
    superpixel_features,
)

MODEL_MAGIC = b"HSIM"
MODEL_VERSION = 1


class PipelineError(RuntimeError):
    """A stage of the segmentation pipeline failed; carries the stage tag."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


@dataclass(frozen=True)
class TrainTestSplit:
    """Flat pixel indices of the training set, grouped per class."""

    train_ids: dict[int, np.ndarray]
    seed: int

    def all_train_ids(self) -> np.ndarray:
        if not self.train_ids:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([self.train_ids[c] for c in sorted(self.train_ids)])


def make_split(labels_map: np.ndarray, per_class: int, seed: int) -> TrainTestSplit:
    """Draw up to ``per_class`` training pixels per labeled class,
    uniformly without replacement, deterministically under ``seed``."""
    labels_map = np.asarray(labels_map)
    if per_class < 1:
        raise ValueError(f"per_class must be >= 1, got {per_class}")
    flat = labels_map.ravel()
    classes = np.unique(flat)
    classes = classes[classes > 0]
    if classes.size == 0:
        raise ValueError("label map has no labeled pixels")
    train: dict[int, np.ndarray] = {}
    for c in classes:
        ids = np.flatnonzero(flat == c)
        rng = SplitMix64(derive_seed(seed, "split", int(c)))
        order = rng.shuffled(ids.size)
        take = min(per_class, ids.size)
        picked = ids[order[:take]]
        train[int(c)] = np.sort(picked).astype(np.int64)
    return TrainTestSplit(train_ids=train, seed=seed)


@dataclass(frozen=True)
class LinearModel:
    """One-vs-rest linear scorer over standardized features."""

    weights: np.ndarray       # (C, d)
    biases: np.ndarray        # (C,)
    classes: np.ndarray       # (C,) original class ids, ascending
    lam: float
    scaler_mean: np.ndarray   # (d,)
    scaler_std: np.ndarray    # (d,)


def train_ovr(
    features: np.ndarray,
    labels: np.ndarray,
    lam: float = 1e-3,
    epochs: int = 200,
    seed: int = 0,
) -> LinearModel:
    """Train one L2-regularized hinge classifier per class.

    Rows with label 0 are unlabeled and ignored; the standardizer is
    fitted on the labeled rows only. Optimization is subgradient descent
    with the 1/(lam*t) step schedule over seed-shuffled epochs, which is
    deterministic under ``seed``. At least two classes are required.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels).ravel()
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise ValueError("features and labels disagree on row count")
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    labeled = labels > 0
    x = features[labeled]
    y = labels[labeled]
    classes = np.unique(y)
    if classes.size < 2:
        raise ValueError(f"need at least 2 classes to train, got {classes.size}")

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    x = (x - mean) / std

    n, d = x.shape
    c = classes.size
    targets = np.where(y[None, :] == classes[:, None], 1.0, -1.0)  # (C, n)
    w = np.zeros((c, d))
    b = np.zeros(c)
    rng = SplitMix64(derive_seed(seed, "ovr"))
    t = 0
    for _ in range(epochs):
        order = rng.shuffled(n)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            w *= 1.0 - eta * lam
            margins = targets[:, i] * (w @ x[i] + b)
            hit = margins < 1.0
            if np.any(hit):
                step = eta * targets[hit, i]
                w[hit] += step[:, None] * x[i][None, :]
                b[hit] += step
    return LinearModel(
        weights=w, biases=b, classes=classes.astype(np.int64),
        lam=lam, scaler_mean=mean, scaler_std=std,
    )


def predict(model: LinearModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Labels and softmax-normalized decision values, one row per input.

    The label is the class with the largest margin (ties break to the
    lowest class id); decision rows are positive and sum to 1, and their
    argmax is always the predicted label.
    """
    features = np.asarray(features, dtype=np.float64)
    x = (features - model.scaler_mean) / model.scaler_std
    margins = x @ model.weights.T + model.biases
    shifted = margins - margins.max(axis=1, keepdims=True)
    expm = np.exp(shifted)
    decision = expm / expm.sum(axis=1, keepdims=True)
    labels = model.classes[np.argmax(margins, axis=1)]
    return labels, decision


def save_model(model: LinearModel, path) -> None:
    """Serialize a model (magic ``HSIM``, little-endian payload)."""
    c, d = model.weights.shape
    with open(path, "wb") as f:
        f.write(struct.pack("<4sIII", MODEL_MAGIC, MODEL_VERSION, c, d))
        f.write(struct.pack("<d", model.lam))
        f.write(np.ascontiguousarray(model.classes, dtype="<i8").tobytes())
        for arr in (model.scaler_mean, model.scaler_std, model.biases, model.weights):
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> LinearModel:
    with open(path, "rb") as f:
        data = f.read()
    head = struct.calcsize("<4sIII")
    if len(data) < head:
        raise ValueError("model file too short")
    magic, version, c, d = struct.unpack_from("<4sIII", data)
    if magic != MODEL_MAGIC:
        raise ValueError(f"bad model magic {magic!r}")
    if version != MODEL_VERSION:
        raise ValueError(f"unsupported model version {version}")
    offset = head
    (lam,) = struct.unpack_from("<d", data, offset)
    offset += 8
    expected = offset + c * 8 + (d + d + c + c * d) * 8
    if len(data) != expected:
        raise ValueError("model payload size mismatch")
    classes = np.frombuffer(data, dtype="<i8", count=c, offset=offset).copy()
    offset += c * 8
    def take(count):
        nonlocal offset
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset).copy()
        offset += count * 8
        return arr
    mean = take(d)
    std = take(d)
    biases = take(c)
    weights = take(c * d).reshape(c, d)
    return LinearModel(weights=weights, biases=biases, classes=classes,
                       lam=lam, scaler_mean=mean, scaler_std=std)


@dataclass
class SrcResult:
    """Output of the single-resolution pipeline plus the intermediate
    products the fusion strategies need for auditing and weighting."""

    labels: np.ndarray            # (H, W) predicted class per pixel
    decision: np.ndarray          # (H, W, C) softmax decision values
    classes: np.ndarray           # (C,) class ids for the decision axis
    superpixels: SuperpixelMap
    sp_features: np.ndarray       # (N, K)
    group_of_superpixel: np.ndarray  # (N,)
    group_features: np.ndarray    # (D, K)
    train_group_ids: np.ndarray   # groups holding training pixels
    train_group_labels: np.ndarray
    resolution: int
    model: LinearModel = field(repr=False, default=None)

    @property
    def group_of_pixel(self) -> np.ndarray:
        return self.group_of_superpixel[self.superpixels.seg_id]


def majority_group_labels(
    group_of_pixel_flat: np.ndarray,
    split: TrainTestSplit,
    labels_map: np.ndarray,
    group_count: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Training label per group: majority vote of the training pixels it
    contains, ties to the lowest class id. Returns (group ids, labels)
    for the groups that contain at least one training pixel."""
    flat_labels = np.asarray(labels_map).ravel()
    votes: dict[int, dict[int, int]] = {}
    for c, ids in split.train_ids.items():
        for pix in ids:
            g = int(group_of_pixel_flat[pix])
            votes.setdefault(g, {}).setdefault(int(flat_labels[pix]), 0)
            votes[g][int(flat_labels[pix])] += 1
    if not votes:
        raise ValueError("no training pixels fall inside any group")
    gids = np.array(sorted(votes), dtype=np.int64)
    glabels = np.empty(gids.size, dtype=np.int64)
    for i, g in enumerate(gids):
        counts = votes[int(g)]
        best = max(counts.values())
        glabels[i] = min(c for c, v in counts.items() if v == best)
    if gids.max() >= group_count:
        raise ValueError("group id out of range")
    return gids, glabels


def src_from_superpixels(
    cube: np.ndarray,
    sp: SuperpixelMap,
    labels_map: np.ndarray,
    split: TrainTestSplit,
    *,
    regroup_ratio: float = 0.7,
    mln_cfg: MlnConfig | None = None,
    lam: float = 1e-3,
    epochs: int = 200,
    seed: int = 0,
) -> SrcResult:
    """Pipeline stages downstream of the superpixel map (shared between
    the single- and multi-resolution drivers)."""
    if not (0.0 < regroup_ratio <= 1.0):
        raise ValueError(f"regroup_ratio must lie in (0, 1], got {regroup_ratio}")
    mln_cfg = mln_cfg or MlnConfig()
    n = sp.count
    d_groups = math.ceil(regroup_ratio * n)
    n_classes = len(split.train_ids)
    if d_groups < n_classes:
        raise ValueError(f"{d_groups} groups cannot carry {n_classes} classes")

    with _stage("features"):
        feats = superpixel_features(cube, sp)
        cents = superpixel_centroids(sp)
        sizes = segment_sizes(sp)
    with _stage("bands"):
        partition = cluster_bands(feats, mln_cfg.layers, seed=derive_seed(seed, "bands"))
    with _stage("mln"):
        adj = build_mln_adjacency(feats, partition, cents, mln_cfg)
    with _stage("regroup"):
        if d_groups == n:
            assignment = ClusterAssignment(
                group_of_item=np.arange(n, dtype=np.int32), count=n
            )
        else:
            assignment = mln_spectral_clustering(adj, d_groups, seed=derive_seed(seed, "regroup"))
        group_feats, g_of_sp = regroup(feats, assignment, weights=sizes)
    with _stage("train"):
        g_of_pixel = g_of_sp[sp.seg_id].ravel()
        gids, glabels = majority_group_labels(g_of_pixel, split, labels_map, d_groups)
        row_labels = np.zeros(d_groups, dtype=np.int64)
        row_labels[gids] = glabels
        model = train_ovr(group_feats, row_labels, lam=lam, epochs=epochs,
                          seed=derive_seed(seed, "train"))
    with _stage("predict"):
        pred_g, dec_g = predict(model, group_feats)
        h, w = sp.seg_id.shape
        g_map = g_of_sp[sp.seg_id]
        labels = pred_g[g_map].astype(np.int32)
        decision = dec_g[g_map].astype(np.float64)
    return SrcResult(
        labels=labels, decision=decision, classes=model.classes,
        superpixels=sp, sp_features=feats, group_of_superpixel=g_of_sp,
        group_features=group_feats, train_group_ids=gids,
        train_group_labels=glabels, resolution=n, model=model,
    )


def mln_src(
    cube: np.ndarray,
    labels_map: np.ndarray,
    n_superpixels: int,
    split: TrainTestSplit,
    *,
    regroup_ratio: float = 0.7,
    mln_cfg: MlnConfig | None = None,
    ers_cfg: ErsConfig | None = None,
    lam: float = 1e-3,
    epochs: int = 200,
    seed: int = 0,
) -> SrcResult:
    """Full single-resolution semi-supervised segmentation."""
    cube = np.asarray(cube)
    labels_map = np.asarray(labels_map)
    if cube.ndim != 3 or cube.shape[1:] != labels_map.shape:
        raise ValueError("cube and label map shapes disagree")
    ers = ers_cfg or ErsConfig(target_count=n_superpixels)
    if ers.target_count != n_superpixels:
        raise ValueError("ers_cfg target_count disagrees with n_superpixels")
    with _stage("superpixel"):
        graph = build_pixel_graph(cube, ers)
        sp = ers_segment(graph, ers)
    return src_from_superpixels(
        cube, sp, labels_map, split,
        regroup_ratio=regroup_ratio, mln_cfg=mln_cfg,
        lam=lam, epochs=epochs, seed=seed,
    )
