"""Command-line front end.

Subcommands: convert, superpixels, segment, classify, classify-mr,
boundary, noise-sweep. Each builds an ExperimentConfig, validates it
(violations exit with code 2 and a field-named message), and hands it to
:func:`run`; compute failures exit with code 1 and the failing stage
tag. The MGSP_JOBS environment variable overrides --jobs.

Every run writes a metrics report (JSON, schema ``mgsp-report/1``) and a
provenance file recording the config, derived stage seeds, and library
versions. With --canonical, volatile fields (timing, timestamps) are
omitted so identical configs and seeds produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .classify import PipelineError, make_split, mln_src
from .clustering import graph_spectral_clustering, kmeans, mln_spectral_clustering
from .fusion import STRATEGIES, mln_mrc
from .hsi_io import (
    HsiFormatError,
    NOISE_DISTRIBUTIONS,
    NOISE_MODELS,
    export_labelmap_ppm,
    export_mask_pgm,
    inject_noise,
    load_cube,
    load_labels,
    save_cube,
    save_labels,
    valid_pixel_mask,
)
from .metrics import boundary_accuracy, boundary_map, overall_accuracy
from .mln import MlnConfig, build_mln_adjacency, build_single_layer_graph, cluster_bands, entity_spectrum
from .rng import derive_seed
from .superpixel import (
    ErsConfig,
    build_pixel_graph,
    ers_segment,
    segment_sizes,
    superpixel_centroids,
    superpixel_features,
)

REPORT_SCHEMA = "mgsp-report/1"

MODES = ("convert", "superpixels", "segment", "classify", "classify-mr", "boundary", "noise-sweep")


class ConfigError(ValueError):
    """Invalid experiment configuration; maps to exit code 2."""


@dataclass
class ExperimentConfig:
    """Everything a run needs; built by the subcommand parsers."""

    mode: str
    cube_path: str | None = None
    labels_path: str | None = None
    output_dir: str = "."
    seed: int = 0
    jobs: int = 1
    canonical: bool = False

    # superpixel stage
    superpixels: int = 100
    resolutions: tuple[int, ...] = ()
    ers_balance: float = 0.5
    ers_kernel_sigma: float | None = None
    ers_neighborhood: int = 8

    # multilayer stage
    layers: int = 10
    mln_sigma: float | None = None
    feature_threshold: float | None = None
    spatial_threshold: float = 100.0
    interlayer_weight: float = 1.0

    # clustering / classification
    clusters: int | None = None
    regroup_ratio: float = 0.7
    train_per_class: int = 10
    lam: float = 1e-3
    epochs: int = 200
    strategy: str = "dv"

    # evaluation
    boundary_neighborhood: int = 4

    # noise sweep
    noise_levels: tuple[float, ...] = (0.05, 0.10, 0.15)
    noise_models: tuple[str, ...] = NOISE_MODELS
    noise_dists: tuple[str, ...] = NOISE_DISTRIBUTIONS

    # convert
    raw_path: str | None = None
    sidecar_path: str | None = None
    out_path: str | None = None

    def validate(self) -> None:
        def bad(fieldname, message):
            raise ConfigError(f"{fieldname}: {message}")

        if self.mode not in MODES:
            bad("mode", f"unknown mode {self.mode!r}")
        if self.mode == "convert":
            for name in ("raw_path", "sidecar_path", "out_path"):
                if not getattr(self, name):
                    bad(name, "required for convert")
            return
        if not self.cube_path:
            bad("cube_path", "required")
        if self.seed < 0:
            bad("seed", "must be >= 0")
        if self.jobs < 1:
            bad("jobs", "must be >= 1")
        if self.superpixels < 1:
            bad("superpixels", "must be >= 1")
        if self.ers_neighborhood not in (4, 8):
            bad("ers_neighborhood", "must be 4 or 8")
        if self.ers_balance < 0:
            bad("ers_balance", "must be >= 0")
        if self.ers_kernel_sigma is not None and self.ers_kernel_sigma <= 0:
            bad("ers_kernel_sigma", "must be positive")
        if self.layers < 1:
            bad("layers", "must be >= 1")
        if self.spatial_threshold <= 0:
            bad("spatial_threshold", "must be positive")
        if self.interlayer_weight <= 0:
            bad("interlayer_weight", "must be positive")
        if self.mln_sigma is not None and self.mln_sigma <= 0:
            bad("mln_sigma", "must be positive")
        if self.feature_threshold is not None and self.feature_threshold <= 0:
            bad("feature_threshold", "must be positive")
        if not (0.0 < self.regroup_ratio <= 1.0):
            bad("regroup_ratio", "must lie in (0, 1]")
        if self.boundary_neighborhood not in (4, 8):
            bad("boundary_neighborhood", "must be 4 or 8")
        if self.mode in ("segment", "boundary"):
            if self.clusters is None or self.clusters < 2:
                bad("clusters", "must be >= 2")
        if self.mode in ("classify", "classify-mr", "noise-sweep", "boundary"):
            if not self.labels_path:
                bad("labels_path", "required for this mode")
        if self.mode in ("classify", "classify-mr", "noise-sweep"):
            if self.train_per_class < 1:
                bad("train_per_class", "must be >= 1")
            if self.lam <= 0:
                bad("lam", "must be positive")
            if self.epochs < 1:
                bad("epochs", "must be >= 1")
        if self.mode == "classify-mr":
            if len(self.resolutions) < 2:
                bad("resolutions", "need at least 2")
            if len(set(self.resolutions)) != len(self.resolutions):
                bad("resolutions", "must be distinct")
            if any(r < 1 for r in self.resolutions):
                bad("resolutions", "must be positive")
            if self.strategy not in STRATEGIES:
                bad("strategy", f"must be one of {STRATEGIES}")
        if self.mode == "noise-sweep":
            if not self.noise_levels:
                bad("noise_levels", "need at least one level")
            for level in self.noise_levels:
                if not (0.0 < level < 1.0):
                    bad("noise_levels", f"level {level} outside (0, 1)")
            for m in self.noise_models:
                if m not in NOISE_MODELS:
                    bad("noise_models", f"unknown model {m!r}")
            for d in self.noise_dists:
                if d not in NOISE_DISTRIBUTIONS:
                    bad("noise_dists", f"unknown distribution {d!r}")
            if self.resolutions and len(self.resolutions) < 2:
                bad("resolutions", "give none (single-resolution) or at least 2")


def _mln_cfg(cfg: ExperimentConfig) -> MlnConfig:
    return MlnConfig(
        layers=cfg.layers, sigma=cfg.mln_sigma,
        feature_threshold=cfg.feature_threshold,
        spatial_threshold=cfg.spatial_threshold,
        interlayer_weight=cfg.interlayer_weight,
    )


def _ers_cfg(cfg: ExperimentConfig, target: int) -> ErsConfig:
    return ErsConfig(
        target_count=target, balance=cfg.ers_balance,
        kernel_sigma=cfg.ers_kernel_sigma, neighborhood=cfg.ers_neighborhood,
    )


def _load_inputs(cfg: ExperimentConfig):
    cube = load_cube(cfg.cube_path)
    labels = None
    if cfg.labels_path:
        labels = load_labels(cfg.labels_path)
        if labels.shape != cube.shape[1:]:
            raise ConfigError(
                f"labels_path: label map {labels.shape} does not match cube {cube.shape[1:]}"
            )
        # all-zero spectra are padding on some scenes; never label them
        labels = np.where(valid_pixel_mask(cube), labels, 0).astype(labels.dtype)
    return cube, labels


def _dump_report(cfg: ExperimentConfig, report: dict, timing: dict) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not cfg.canonical:
        report = dict(report)
        report["timing_seconds"] = timing
    path = out / "metrics.json"
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return path


def _dump_provenance(cfg: ExperimentConfig, seeds: dict) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "schema": "mgsp-provenance/1",
        "package_version": __version__,
        "numpy_version": np.__version__,
        "config": asdict(cfg),
        "derived_seeds": seeds,
    }
    if not cfg.canonical:
        doc["written_at_unix"] = time.time()
    (out / "provenance.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _split_and_mask(cfg, cube, labels):
    split = make_split(labels, cfg.train_per_class, seed=derive_seed(cfg.seed, "split"))
    mask = labels > 0
    flat = mask.ravel()
    flat[split.all_train_ids()] = False
    return split, mask


def run(cfg: ExperimentConfig) -> dict:
    """Execute one experiment; returns the report dict (also written to
    ``output_dir``/metrics.json along with the mode's artifacts)."""
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    timing: dict[str, float] = {}
    seeds: dict[str, int] = {}
    t0 = time.monotonic()

    if cfg.mode == "convert":
        report = _run_convert(cfg)
    elif cfg.mode == "superpixels":
        report = _run_superpixels(cfg)
    elif cfg.mode == "segment":
        report = _run_segment(cfg, seeds)
    elif cfg.mode == "boundary":
        report = _run_boundary(cfg, seeds)
    elif cfg.mode == "classify":
        report = _run_classify(cfg, seeds)
    elif cfg.mode == "classify-mr":
        report = _run_classify_mr(cfg, seeds)
    else:
        report = _run_noise_sweep(cfg, seeds)

    timing["total"] = time.monotonic() - t0
    report = {"schema": REPORT_SCHEMA, "mode": cfg.mode, "seed": cfg.seed, **report}
    _dump_report(cfg, report, timing)
    _dump_provenance(cfg, seeds)
    return report


def _segmap_path(out: Path) -> Path:
    return out / "segments.hsil"


def _run_superpixels(cfg: ExperimentConfig) -> dict:
    cube, _ = _load_inputs(cfg)
    ers = _ers_cfg(cfg, cfg.superpixels)
    graph = build_pixel_graph(cube, ers)
    sp = ers_segment(graph, ers)
    out = Path(cfg.output_dir)
    # segment-map dump: ids shifted by one so 0 stays "no segment"
    save_labels(sp.seg_id.astype(np.int32) + 1, _segmap_path(out))
    export_labelmap_ppm(sp.seg_id + 1, out / "segments.ppm")
    return {"superpixels": sp.count}


def _run_segment(cfg: ExperimentConfig, seeds: dict) -> dict:
    cube, labels = _load_inputs(cfg)
    ers = _ers_cfg(cfg, cfg.superpixels)
    graph = build_pixel_graph(cube, ers)
    sp = ers_segment(graph, ers)
    feats = superpixel_features(cube, sp)
    cents = superpixel_centroids(sp)
    partition = cluster_bands(feats, cfg.layers, seed=derive_seed(cfg.seed, "bands"))
    seeds["bands"] = derive_seed(cfg.seed, "bands")
    adj = build_mln_adjacency(feats, partition, cents, _mln_cfg(cfg))
    seeds["cluster"] = derive_seed(cfg.seed, "cluster")
    assign = mln_spectral_clustering(adj, cfg.clusters, seed=seeds["cluster"])
    pixel_labels = assign.group_of_item[sp.seg_id].astype(np.int32) + 1

    out = Path(cfg.output_dir)
    export_labelmap_ppm(pixel_labels, out / "clusters.ppm")
    save_labels(sp.seg_id.astype(np.int32) + 1, _segmap_path(out))
    sigma_mln, _ = entity_spectrum(adj)
    flat = build_single_layer_graph(feats)
    sigma_flat = np.linalg.svd(flat, compute_uv=False)
    with open(out / "singular_values.csv", "w") as f:
        f.write("index,multilayer,flat_graph\n")
        for i, (a, b) in enumerate(zip(sigma_mln, sigma_flat), start=1):
            f.write(f"{i},{a!r},{b!r}\n")

    report = {"superpixels": sp.count, "layers": cfg.layers, "clusters": cfg.clusters}
    if labels is not None:
        report["boundary_accuracy"] = boundary_accuracy(
            pixel_labels, labels, cfg.boundary_neighborhood
        )
    return report


def _run_boundary(cfg: ExperimentConfig, seeds: dict) -> dict:
    cube, labels = _load_inputs(cfg)
    ers = _ers_cfg(cfg, cfg.superpixels)
    graph = build_pixel_graph(cube, ers)
    sp = ers_segment(graph, ers)
    feats = superpixel_features(cube, sp)
    cents = superpixel_centroids(sp)

    seeds["kmeans"] = derive_seed(cfg.seed, "kmeans")
    seeds["gsp"] = derive_seed(cfg.seed, "gsp")
    seeds["mgsp"] = derive_seed(cfg.seed, "mgsp")
    seeds["bands"] = derive_seed(cfg.seed, "bands")

    km = kmeans(feats, cfg.clusters, seed=seeds["kmeans"])
    flat = build_single_layer_graph(feats)
    gsp = graph_spectral_clustering(flat, cfg.clusters, seed=seeds["gsp"])
    partition = cluster_bands(feats, cfg.layers, seed=seeds["bands"])
    adj = build_mln_adjacency(feats, partition, cents, _mln_cfg(cfg))
    mg = mln_spectral_clustering(adj, cfg.clusters, seed=seeds["mgsp"])

    out = Path(cfg.output_dir)
    accs = {}
    for name, assign in (("kmeans", km), ("gsp", gsp), ("mgsp", mg)):
        pix = assign.group_of_item[sp.seg_id].astype(np.int32) + 1
        accs[name] = boundary_accuracy(pix, labels, cfg.boundary_neighborhood)
        export_labelmap_ppm(pix, out / f"clusters_{name}.ppm")
        export_mask_pgm(boundary_map(pix, cfg.boundary_neighborhood), out / f"boundary_{name}.pgm")
    return {"superpixels": sp.count, "clusters": cfg.clusters, "boundary_accuracy": accs}


def _run_classify(cfg: ExperimentConfig, seeds: dict) -> dict:
    cube, labels = _load_inputs(cfg)
    split, test_mask = _split_and_mask(cfg, cube, labels)
    seeds["split"] = derive_seed(cfg.seed, "split")
    seeds["pipeline"] = derive_seed(cfg.seed, "src", cfg.superpixels)
    result = mln_src(
        cube, labels, cfg.superpixels, split,
        regroup_ratio=cfg.regroup_ratio, mln_cfg=_mln_cfg(cfg),
        ers_cfg=_ers_cfg(cfg, cfg.superpixels),
        lam=cfg.lam, epochs=cfg.epochs, seed=seeds["pipeline"],
    )
    oa = overall_accuracy(result.labels, labels, test_mask)
    out = Path(cfg.output_dir)
    export_labelmap_ppm(result.labels, out / "predicted.ppm")
    save_labels(result.superpixels.seg_id.astype(np.int32) + 1, _segmap_path(out))
    return {
        "superpixels": cfg.superpixels,
        "train_per_class": cfg.train_per_class,
        "groups": int(result.group_features.shape[0]),
        "overall_accuracy": oa,
    }


def _run_classify_mr(cfg: ExperimentConfig, seeds: dict) -> dict:
    cube, labels = _load_inputs(cfg)
    split, test_mask = _split_and_mask(cfg, cube, labels)
    seeds["split"] = derive_seed(cfg.seed, "split")
    for r in cfg.resolutions:
        seeds[f"resolution-{r}"] = derive_seed(cfg.seed, "resolution", r)
    result = mln_mrc(
        cube, labels, cfg.resolutions, split,
        strategy=cfg.strategy, regroup_ratio=cfg.regroup_ratio,
        mln_cfg=_mln_cfg(cfg), ers_balance=cfg.ers_balance,
        ers_neighborhood=cfg.ers_neighborhood,
        lam=cfg.lam, epochs=cfg.epochs, seed=cfg.seed, jobs=cfg.jobs,
    )
    oa = overall_accuracy(result.labels, labels, test_mask)
    per_res = {
        str(r.resolution): overall_accuracy(r.labels, labels, test_mask)
        for r in result.per_resolution
    }
    out = Path(cfg.output_dir)
    export_labelmap_ppm(result.labels, out / "predicted.ppm")
    if result.weights.per_resolution is not None:
        weights = {
            str(r): float(wv)
            for r, wv in zip(cfg.resolutions, result.weights.per_resolution)
        }
    else:
        weights = "per-pixel"
    return {
        "strategy": cfg.strategy,
        "resolutions": list(cfg.resolutions),
        "train_per_class": cfg.train_per_class,
        "overall_accuracy": oa,
        "per_resolution_accuracy": per_res,
        "weights": weights,
    }


def _run_noise_sweep(cfg: ExperimentConfig, seeds: dict) -> dict:
    cube, labels = _load_inputs(cfg)
    split, test_mask = _split_and_mask(cfg, cube, labels)
    seeds["split"] = derive_seed(cfg.seed, "split")
    rows = []
    for model in cfg.noise_models:
        for dist in cfg.noise_dists:
            for level in cfg.noise_levels:
                tag = f"{model}/{dist}/{level!r}"
                noise_seed = derive_seed(cfg.seed, "noise", model, dist, repr(level))
                seeds[f"noise {tag}"] = noise_seed
                noisy = inject_noise(cube, model, dist, level, seed=noise_seed)
                if cfg.resolutions:
                    res = mln_mrc(
                        noisy, labels, cfg.resolutions, split,
                        strategy=cfg.strategy, regroup_ratio=cfg.regroup_ratio,
                        mln_cfg=_mln_cfg(cfg), ers_balance=cfg.ers_balance,
                        ers_neighborhood=cfg.ers_neighborhood,
                        lam=cfg.lam, epochs=cfg.epochs, seed=cfg.seed, jobs=cfg.jobs,
                    )
                    pred = res.labels
                else:
                    res = mln_src(
                        noisy, labels, cfg.superpixels, split,
                        regroup_ratio=cfg.regroup_ratio, mln_cfg=_mln_cfg(cfg),
                        ers_cfg=_ers_cfg(cfg, cfg.superpixels),
                        lam=cfg.lam, epochs=cfg.epochs,
                        seed=derive_seed(cfg.seed, "src", cfg.superpixels),
                    )
                    pred = res.labels
                rows.append({
                    "model": model, "dist": dist, "level": level,
                    "overall_accuracy": overall_accuracy(pred, labels, test_mask),
                })
    return {
        "train_per_class": cfg.train_per_class,
        "pipeline": "multiresolution" if cfg.resolutions else "single-resolution",
        "rows": rows,
    }


_SIDECAR_DTYPES = {
    "f4": "f4", "float32": "f4",
    "f8": "f8", "float64": "f8",
    "u2": "u2", "uint16": "u2",
    "i2": "i2", "int16": "i2",
    "u1": "u1", "uint8": "u1",
    "i4": "i4", "int32": "i4",
}


def _run_convert(cfg: ExperimentConfig) -> dict:
    with open(cfg.sidecar_path) as f:
        meta = json.load(f)
    kind = meta.get("kind", "cube")
    try:
        dtype_key = _SIDECAR_DTYPES[str(meta["dtype"]).lower()]
        order = str(meta.get("byte_order", "little")).lower()
        if order not in ("little", "big"):
            raise ConfigError(f"sidecar byte_order: unknown value {order!r}")
        prefix = "<" if order == "little" else ">"
        np_dtype = np.dtype(prefix + dtype_key)
        height = int(meta["height"])
        width = int(meta["width"])
    except KeyError as exc:
        raise ConfigError(f"sidecar: missing field {exc}") from exc
    raw = np.fromfile(cfg.raw_path, dtype=np_dtype)

    if kind == "labels":
        if raw.size != height * width:
            raise ConfigError(
                f"raw_path: {raw.size} samples, sidecar promises {height * width}"
            )
        labels = raw.reshape(height, width).astype(np.int64)
        if labels.min() < 0 or labels.max() > 0xFFFF:
            raise ConfigError("raw_path: label values outside u16 range")
        save_labels(labels.astype(np.int32), cfg.out_path)
        return {"kind": "labels", "height": height, "width": width, "out": cfg.out_path}

    try:
        bands = int(meta["bands"])
        interleave = str(meta["interleave"]).upper()
    except KeyError as exc:
        raise ConfigError(f"sidecar: missing field {exc}") from exc
    if interleave not in ("BSQ", "BIL", "BIP"):
        raise ConfigError(f"sidecar interleave: unknown value {interleave!r}")
    if raw.size != bands * height * width:
        raise ConfigError(
            f"raw_path: {raw.size} samples, sidecar promises {bands * height * width}"
        )
    if interleave == "BSQ":        # band, row, col
        cube = raw.reshape(bands, height, width)
    elif interleave == "BIL":      # row, band, col
        cube = raw.reshape(height, bands, width).transpose(1, 0, 2)
    else:                          # BIP: row, col, band
        cube = raw.reshape(height, width, bands).transpose(2, 0, 1)
    save_cube(np.ascontiguousarray(cube, dtype=np.float32), cfg.out_path)
    return {
        "kind": "cube", "bands": bands, "height": height, "width": width,
        "interleave": interleave, "out": cfg.out_path,
    }


def _add_common(p: argparse.ArgumentParser, *, needs_labels: bool = False):
    p.add_argument("cube", help="input cube (HSIC)")
    if needs_labels:
        p.add_argument("labels", help="ground-truth label map (HSIL)")
    p.add_argument("-o", "--output", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel resolutions (MGSP_JOBS overrides)")
    p.add_argument("--canonical", action="store_true",
                   help="omit timing so reports are byte-reproducible")


def _add_ers(p: argparse.ArgumentParser):
    p.add_argument("--balance", type=float, default=0.5, help="balancing weight")
    p.add_argument("--kernel-sigma", type=float, default=None,
                   help="pixel affinity kernel width (default self-tuned)")
    p.add_argument("--pixel-neighborhood", type=int, default=8, choices=(4, 8))


def _add_mln(p: argparse.ArgumentParser):
    p.add_argument("--layers", type=int, default=10, help="band layers M")
    p.add_argument("--mln-sigma", type=float, default=None)
    p.add_argument("--feature-threshold", type=float, default=None)
    p.add_argument("--spatial-threshold", type=float, default=100.0)
    p.add_argument("--interlayer-weight", type=float, default=1.0)


def _add_classify(p: argparse.ArgumentParser):
    p.add_argument("--train-per-class", type=int, default=10)
    p.add_argument("--regroup-ratio", type=float, default=0.7)
    p.add_argument("--lam", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=200)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgsp",
        description="Multilayer-network spectral segmentation of hyperspectral cubes",
    )
    parser.add_argument("--version", action="version", version=f"mgsp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="raw interleaved samples + JSON sidecar -> HSIC/HSIL")
    p.add_argument("raw", help="raw sample file")
    p.add_argument("sidecar", help="JSON header: bands/height/width/dtype/byte_order/interleave, optional kind=labels")
    p.add_argument("out", help="output file")

    p = sub.add_parser("superpixels", help="segment a cube into superpixels")
    _add_common(p)
    p.add_argument("-n", "--superpixels", type=int, default=100)
    _add_ers(p)

    p = sub.add_parser("segment", help="unsupervised multilayer spectral segmentation")
    _add_common(p)
    p.add_argument("--superpixels", type=int, default=500)
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--ground-truth", default=None, help="optional HSIL for boundary accuracy")
    p.add_argument("--boundary-neighborhood", type=int, default=4, choices=(4, 8))
    _add_ers(p)
    _add_mln(p)

    p = sub.add_parser("boundary", help="boundary accuracy of kmeans/flat-graph/multilayer clusterings")
    _add_common(p, needs_labels=True)
    p.add_argument("--superpixels", type=int, default=100)
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--boundary-neighborhood", type=int, default=4, choices=(4, 8))
    _add_ers(p)
    _add_mln(p)

    p = sub.add_parser("classify", help="semi-supervised segmentation, single resolution")
    _add_common(p, needs_labels=True)
    p.add_argument("--superpixels", type=int, default=100)
    _add_ers(p)
    _add_mln(p)
    _add_classify(p)

    p = sub.add_parser("classify-mr", help="multiresolution fusion segmentation")
    _add_common(p, needs_labels=True)
    p.add_argument("--resolutions", type=int, nargs="+", required=True)
    p.add_argument("--strategy", choices=STRATEGIES, default="dv")
    _add_ers(p)
    _add_mln(p)
    _add_classify(p)

    p = sub.add_parser("noise-sweep", help="accuracy under injected noise")
    _add_common(p, needs_labels=True)
    p.add_argument("--superpixels", type=int, default=100)
    p.add_argument("--resolutions", type=int, nargs="*", default=[],
                   help="if given (>=2), sweep the multiresolution pipeline")
    p.add_argument("--strategy", choices=STRATEGIES, default="dv")
    p.add_argument("--levels", type=float, nargs="+", default=[0.05, 0.10, 0.15])
    p.add_argument("--noise-models", nargs="+", default=list(NOISE_MODELS), choices=NOISE_MODELS)
    p.add_argument("--noise-dists", nargs="+", default=list(NOISE_DISTRIBUTIONS), choices=NOISE_DISTRIBUTIONS)
    _add_ers(p)
    _add_mln(p)
    _add_classify(p)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    mode = args.command
    if mode == "convert":
        return ExperimentConfig(mode=mode, raw_path=args.raw,
                                sidecar_path=args.sidecar, out_path=args.out)
    jobs = args.jobs
    env_jobs = os.environ.get("MGSP_JOBS")
    if env_jobs is not None:
        try:
            jobs = int(env_jobs)
        except ValueError:
            raise ConfigError(f"MGSP_JOBS: not an integer: {env_jobs!r}")
    cfg = ExperimentConfig(
        mode=mode,
        cube_path=args.cube,
        labels_path=getattr(args, "labels", None) or getattr(args, "ground_truth", None),
        output_dir=args.output,
        seed=args.seed,
        jobs=jobs,
        canonical=args.canonical,
        superpixels=getattr(args, "superpixels", 100),
        resolutions=tuple(getattr(args, "resolutions", ()) or ()),
        ers_balance=args.balance,
        ers_kernel_sigma=args.kernel_sigma,
        ers_neighborhood=args.pixel_neighborhood,
        layers=getattr(args, "layers", 10),
        mln_sigma=getattr(args, "mln_sigma", None),
        feature_threshold=getattr(args, "feature_threshold", None),
        spatial_threshold=getattr(args, "spatial_threshold", 100.0),
        interlayer_weight=getattr(args, "interlayer_weight", 1.0),
        clusters=getattr(args, "clusters", None),
        regroup_ratio=getattr(args, "regroup_ratio", 0.7),
        train_per_class=getattr(args, "train_per_class", 10),
        lam=getattr(args, "lam", 1e-3),
        epochs=getattr(args, "epochs", 200),
        strategy=getattr(args, "strategy", "dv"),
        boundary_neighborhood=getattr(args, "boundary_neighborhood", 4),
        noise_levels=tuple(getattr(args, "levels", ()) or (0.05, 0.10, 0.15)),
        noise_models=tuple(getattr(args, "noise_models", NOISE_MODELS)),
        noise_dists=tuple(getattr(args, "noise_dists", NOISE_DISTRIBUTIONS)),
    )
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"pipeline failure {exc}", file=sys.stderr)
        return 1
    except (HsiFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for key, value in report.items():
        if key in ("schema",):
            continue
        print(f"{key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
