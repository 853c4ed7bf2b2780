"""Decision fusion across superpixel resolutions.

Each resolution contributes a label map and a weight; the fused label of
a pixel is the weighted majority over resolutions (ties to the lowest
class id). Weights come from one of five strategies:

    mv  equal weights 1/C
    va  mean validation accuracy over 5 stratified 50/50 re-splits of
        the training groups
    dv  per-pixel: the winning softmax decision value
    tv  exp(-mean graph total variation of the z-scored band signals)
        on a flat superpixel graph
    vn  exp(-von Neumann entropy) of that graph's scaled Laplacian

The graph-based strategies (tv, vn) measure how regular a resolution's
superpixel structure is; the accuracy/decision ones measure classifier
confidence.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classify import SrcResult, TrainTestSplit, predict, src_from_superpixels, train_ovr
from .mln import MlnConfig, build_single_layer_graph
from .rng import SplitMix64, derive_seed
from .superpixel import ErsConfig, build_pixel_graph, ers_segment_multi

log = logging.getLogger(__name__)

STRATEGIES = ("mv", "va", "dv", "tv", "vn")


@dataclass(frozen=True)
class FusionWeights:
    """Either one scalar per resolution or one (H, W) array per
    resolution, depending on the strategy."""

    strategy: str
    per_resolution: np.ndarray | None = None
    per_pixel: tuple[np.ndarray, ...] | None = None

    def weight_for(self, j: int):
        if self.per_pixel is not None:
            return self.per_pixel[j]
        return float(self.per_resolution[j])


def fuse_majority(label_maps, weights: FusionWeights) -> np.ndarray:
    """Weighted per-pixel majority vote.

    score(pixel, class) = sum over resolutions of the resolution's
    weight at that pixel when it voted for the class; the fused label is
    the argmax, ties resolving to the lowest class id. Scaling all
    weights by one positive constant cannot change the result.
    """
    label_maps = [np.asarray(lm) for lm in label_maps]
    if not label_maps:
        raise ValueError("no label maps to fuse")
    shape = label_maps[0].shape
    for lm in label_maps:
        if lm.shape != shape:
            raise ValueError("label maps disagree on shape")
    classes = np.unique(np.concatenate([lm.ravel() for lm in label_maps]))
    scores = np.zeros(shape + (classes.size,), dtype=np.float64)
    for j, lm in enumerate(label_maps):
        wj = weights.weight_for(j)
        for ci, c in enumerate(classes):
            mask = lm == c
            if np.isscalar(wj):
                scores[..., ci][mask] += wj
            else:
                scores[..., ci][mask] += wj[mask]
    return classes[np.argmax(scores, axis=-1)].astype(np.int32)


def weight_mv(count: int) -> FusionWeights:
    """Equal votes."""
    if count < 1:
        raise ValueError("need at least one resolution")
    return FusionWeights(strategy="mv", per_resolution=np.full(count, 1.0 / count))


def weight_dv(results) -> FusionWeights:
    """Per-pixel confidence: the winning decision value of each map."""
    per_pixel = tuple(np.max(r.decision, axis=-1) for r in results)
    return FusionWeights(strategy="dv", per_pixel=per_pixel)


def _laplacian(a: np.ndarray) -> np.ndarray:
    return np.diag(a.sum(axis=1)) - a


def power_iteration_lmax(matrix: np.ndarray, tol: float = 1e-9, max_iter: int = 10000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    The start vector comes from a fixed splitmix stream so it is
    deterministic yet almost surely not orthogonal to the top
    eigenvector (an all-ones start would be, on small path graphs).
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    rng = SplitMix64(0x51AB1E)
    v = np.array([rng.next_float() - 0.5 for _ in range(n)])
    norm = np.linalg.norm(v)
    if norm == 0:
        v = np.ones(n)
        norm = math.sqrt(n)
    v /= norm
    lam = 0.0
    for _ in range(max_iter):
        nv = matrix @ v
        nn = np.linalg.norm(nv)
        if nn == 0:
            return 0.0
        nv /= nn
        new_lam = float(nv @ matrix @ nv)
        if abs(new_lam - lam) <= tol * max(1.0, abs(new_lam)):
            return new_lam
        lam = new_lam
        v = nv
    return lam


def graph_total_variation(adjacency: np.ndarray, signals: np.ndarray) -> np.ndarray:
    """TV of each signal column: ||s - L s / lmax||^2 with L = D - A.

    A constant signal has zero Laplacian image, so its TV is exactly
    ||s||^2. An edgeless graph (L = 0) degenerates the same way; lmax is
    guarded to 1 there.
    """
    a = np.asarray(adjacency, dtype=np.float64)
    s = np.asarray(signals, dtype=np.float64)
    if s.ndim == 1:
        s = s[:, None]
    lap = _laplacian(a)
    lmax = power_iteration_lmax(lap)
    if lmax <= 0:
        lmax = 1.0
    smooth = s - (lap @ s) / abs(lmax)
    return np.einsum("ij,ij->j", smooth, smooth)


def von_neumann_entropy(adjacency: np.ndarray) -> float:
    """Entropy -sum(lam * log2(lam)) of the trace-normalized Laplacian
    L_G = (D - A) / sum(A). Its eigenvalues sum to 1, so a single-edge
    graph is a pure state with zero entropy. Edgeless graphs have no
    normalization and are rejected."""
    a = np.asarray(adjacency, dtype=np.float64)
    total = float(a.sum())
    if total <= 0:
        raise ValueError("von Neumann entropy needs at least one edge")
    lap = _laplacian(a) / total
    vals = np.linalg.eigvalsh(lap)
    vals = np.clip(vals, 0.0, None)
    pos = vals[vals > 0]
    return float(-(pos * np.log2(pos)).sum())


def _zscore_columns(x: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (x - mean) / std


def weight_tv(feature_mats, sigma: float | None = None, tau: float | None = None) -> FusionWeights:
    """Smoothness weight per resolution.

    Builds the flat superpixel graph per resolution, z-scores each band
    signal, averages the total variation over bands, and maps it through
    exp(-mean). All-zero graphs are tolerated with a warning (the TV
    degenerates to the plain signal energy)."""
    values = []
    for feats in feature_mats:
        feats = np.asarray(feats, dtype=np.float64)
        a = build_single_layer_graph(feats, sigma=sigma, tau=tau)
        if not a.any():
            log.warning("superpixel graph has no edges; smoothness weight degenerates")
        signals = _zscore_columns(feats)
        tv = graph_total_variation(a, signals)
        values.append(math.exp(-float(tv.mean())))
    return FusionWeights(strategy="tv", per_resolution=np.array(values))


def weight_vn(feature_mats, sigma: float | None = None, tau: float | None = None) -> FusionWeights:
    """Entropy weight per resolution: exp(-h) of the superpixel graph."""
    values = []
    for feats in feature_mats:
        a = build_single_layer_graph(np.asarray(feats, dtype=np.float64), sigma=sigma, tau=tau)
        values.append(math.exp(-von_neumann_entropy(a)))
    return FusionWeights(strategy="vn", per_resolution=np.array(values))


def validation_accuracy(
    result: SrcResult,
    split: TrainTestSplit,
    labels_map: np.ndarray,
    reps: int = 5,
    seed: int = 0,
) -> float:
    """Held-out accuracy of one resolution's group classifier.

    For each repetition the training groups are split 50/50 within each
    class (a lone group stays on the fit side); a fresh model is fitted
    on one half and scored on the training pixels that live in held-out
    groups, each pixel against its own label. The mean over repetitions
    is the weight. Falls back to 0.5 when a repetition cannot be scored
    (no held-out pixels or a single-class fit half).
    """
    flat_labels = np.asarray(labels_map).ravel()
    g_of_pixel = result.group_of_pixel.ravel()
    gids = result.train_group_ids
    glabels = result.train_group_labels
    by_class: dict[int, list[int]] = {}
    for g, lab in zip(gids, glabels):
        by_class.setdefault(int(lab), []).append(int(g))
    train_pixels = split.all_train_ids()
    accs = []
    for rep in range(reps):
        rng = SplitMix64(derive_seed(seed, "va", rep))
        fit_groups: set[int] = set()
        for lab in sorted(by_class):
            members = by_class[lab]
            order = rng.shuffled(len(members))
            n_fit = max(1, (len(members) + 1) // 2)
            fit_groups.update(members[i] for i in order[:n_fit])
        held = [g for g in gids if int(g) not in fit_groups]
        fit_labels = np.zeros(result.group_features.shape[0], dtype=np.int64)
        for g, lab in zip(gids, glabels):
            if int(g) in fit_groups:
                fit_labels[int(g)] = lab
        if len(set(int(fit_labels[g]) for g in fit_groups)) < 2 or not held:
            accs.append(0.5)
            continue
        model = train_ovr(result.group_features, fit_labels,
                          seed=derive_seed(seed, "va-train", rep))
        pred_g, _ = predict(model, result.group_features)
        held_set = set(held)
        hits = 0
        total = 0
        for pix in train_pixels:
            g = int(g_of_pixel[pix])
            if g in held_set:
                total += 1
                hits += int(pred_g[g] == flat_labels[pix])
        accs.append(hits / total if total else 0.5)
    return float(np.mean(accs))


def weight_va(results, split: TrainTestSplit, labels_map: np.ndarray, seed: int = 0) -> FusionWeights:
    vals = [
        validation_accuracy(r, split, labels_map, seed=derive_seed(seed, "va-res", r.resolution))
        for r in results
    ]
    return FusionWeights(strategy="va", per_resolution=np.array(vals))


@dataclass
class MrcResult:
    """Fused segmentation plus the per-resolution audit trail."""

    labels: np.ndarray
    weights: FusionWeights
    per_resolution: list[SrcResult]
    resolutions: tuple[int, ...]


def mln_mrc(
    cube: np.ndarray,
    labels_map: np.ndarray,
    resolutions,
    split: TrainTestSplit,
    *,
    strategy: str = "dv",
    regroup_ratio: float = 0.7,
    mln_cfg: MlnConfig | None = None,
    ers_balance: float = 0.5,
    ers_neighborhood: int = 8,
    lam: float = 1e-3,
    epochs: int = 200,
    seed: int = 0,
    jobs: int = 1,
) -> MrcResult:
    """Multiresolution pipeline: one segmentation pass snapshots every
    resolution, each resolution runs the single-resolution pipeline with
    its own derived seed (optionally in parallel; results do not depend
    on ``jobs``), then the configured strategy fuses the label maps."""
    resolutions = tuple(int(r) for r in resolutions)
    if len(resolutions) < 2:
        raise ValueError("multiresolution fusion needs at least 2 resolutions")
    if len(set(resolutions)) != len(resolutions):
        raise ValueError("resolutions must be distinct")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")

    base_cfg = ErsConfig(target_count=max(resolutions), balance=ers_balance,
                         neighborhood=ers_neighborhood)
    graph = build_pixel_graph(cube, base_cfg)
    maps = ers_segment_multi(graph, base_cfg, resolutions)

    def run_one(n_res: int) -> SrcResult:
        return src_from_superpixels(
            cube, maps[n_res], labels_map, split,
            regroup_ratio=regroup_ratio, mln_cfg=mln_cfg,
            lam=lam, epochs=epochs,
            seed=derive_seed(seed, "resolution", n_res),
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, resolutions))
    else:
        results = [run_one(r) for r in resolutions]

    if strategy == "mv":
        weights = weight_mv(len(results))
    elif strategy == "dv":
        weights = weight_dv(results)
    elif strategy == "va":
        weights = weight_va(results, split, labels_map, seed=derive_seed(seed, "va"))
    elif strategy == "tv":
        weights = weight_tv([r.sp_features for r in results])
    else:
        weights = weight_vn([r.sp_features for r in results])

    fused = fuse_majority([r.labels for r in results], weights)
    return MrcResult(labels=fused, weights=weights, per_resolution=results,
                     resolutions=resolutions)
