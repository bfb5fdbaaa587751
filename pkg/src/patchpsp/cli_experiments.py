"""Command-line surface and the PSNR-versus-noise experiment harness."""

from __future__ import annotations

import argparse
import csv
import hashlib
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .affinity_clustering import build_affinity, elbow_estimate_k, spectral_cluster
from .baselines_metrics import (
    NlmConfig,
    NoiseSpec,
    corrupt,
    estimate_noise_sigma,
    nlm_denoise,
    psnr,
)
from .patch_grid import Image, extract_patches
from .pgm import read_pgm, write_pgm
from .psp_denoiser import DimPolicy, PipelineConfig, denoise_pipeline
from .solvers import DEFAULT_ALPHA_GRID, SolverConfig, self_representation

CLI_METHODS = ("psp-bpdn", "psp-nnc", "psp-nn", "nlm")
SOLVER_OF = {"psp-bpdn": "bpdn", "psp-nnc": "nnc", "psp-nn": "nn"}
RESULT_COLUMNS = ("image", "method", "sigma", "sigma_hat",
                  "psnr_noisy", "psnr_denoised", "error")
TIMING_COLUMNS = ("image", "method", "sigma", "stage", "seconds")
OUTDIR_ENV = "PATCHPSP_OUT"


def derive_seed(master: int, *parts) -> int:
    """Independent 63-bit sub-seed from the master seed and labeling parts.

    SHA-256 over 'master|part|part|...'; first 8 digest bytes little-endian
    with the sign bit cleared. Depends only on the labels, never on
    execution order.
    """
    text = "|".join([str(int(master)), *[str(p) for p in parts]])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") & (2 ** 63 - 1)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full grid specification for the compare command."""

    images: tuple[str, ...]
    sigmas: tuple[float, ...]
    methods: tuple[str, ...] = CLI_METHODS
    k: int = 20
    patch_side: int = 8
    stride: int = 8
    seed: int = 0
    out_dir: str = "."
    workers: int = 1
    tau: float = 1.0
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    max_iter: int = 2000
    tol: float = 1e-6
    sigma_fit_multiplier: float = 1.0
    dim_kind: str = "energy"
    dim_r: int = 4
    dim_theta: float = 0.9
    dim_cap: int = 16
    nlm_k: float = 0.01
    nlm_patch: int = 7
    nlm_window: int = 21

    def __post_init__(self):
        if not self.images:
            raise ValueError("at least one image is required")
        if not self.sigmas:
            raise ValueError("at least one sigma is required")
        if not self.methods or any(m not in CLI_METHODS for m in self.methods):
            raise ValueError(f"methods must be a non-empty subset of {CLI_METHODS}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class ResultRow:
    image: str
    method: str
    sigma: float
    sigma_hat: float | None = None
    psnr_noisy: float | None = None
    psnr_denoised: float | None = None
    error: str = ""
    timings: dict[str, float] = field(default_factory=dict)


def _dim_policy(cfg: ExperimentConfig) -> DimPolicy:
    return DimPolicy(kind=cfg.dim_kind, r=cfg.dim_r,
                     theta=cfg.dim_theta, cap=cfg.dim_cap)


def _pipeline_config(cfg: ExperimentConfig, cell_seed: int) -> PipelineConfig:
    solver = SolverConfig(tau=cfg.tau, alpha_grid=cfg.alpha_grid,
                          max_iter=cfg.max_iter, tol=cfg.tol)
    return PipelineConfig(patch_side=cfg.patch_side, stride=cfg.stride,
                          n_clusters=cfg.k, seed=cell_seed, solver=solver,
                          dim_policy=_dim_policy(cfg),
                          sigma_fit_multiplier=cfg.sigma_fit_multiplier)


def noise_seed_for(cfg: ExperimentConfig, image_id: str, sigma: float) -> int:
    """Corruption seed: shared by every method so all see one realization."""
    return derive_seed(cfg.seed, "noise", image_id, float(sigma))


def _run_cell(args: tuple[ExperimentConfig, str, float, str]) -> ResultRow:
    cfg, path, sigma, method = args
    image_id = Path(path).stem
    row = ResultRow(image_id, method, sigma)
    try:
        clean = read_pgm(path)
        noisy = corrupt(clean, NoiseSpec(sigma, noise_seed_for(cfg, image_id, sigma)))
        row.sigma_hat = estimate_noise_sigma(noisy)
        row.psnr_noisy = psnr(clean, noisy)
        if method == "nlm":
            t0 = time.perf_counter()
            out = nlm_denoise(noisy, NlmConfig(cfg.nlm_k, cfg.nlm_patch,
                                               cfg.nlm_window), row.sigma_hat)
            row.timings = {"denoise": time.perf_counter() - t0}
        else:
            cell_seed = derive_seed(cfg.seed, "cell", image_id, float(sigma), method)
            res = denoise_pipeline(noisy, SOLVER_OF[method],
                                   _pipeline_config(cfg, cell_seed))
            out = res.image
            row.timings = res.timings
        row.psnr_denoised = psnr(clean, out)
    except Exception as exc:  # per-cell failure: record and keep the run going
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.6f}"
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_results_csv(rows: list[ResultRow], path: Path) -> None:
    _write_csv(path, RESULT_COLUMNS,
               [(r.image, r.method, f"{r.sigma:g}", _fmt(r.sigma_hat),
                 _fmt(r.psnr_noisy), _fmt(r.psnr_denoised), r.error)
                for r in rows])


def write_summary_csv(rows: list[ResultRow], cfg: ExperimentConfig, path: Path) -> None:
    """Per-sigma mean PSNR, one column per method (blank if any cell failed)."""
    methods = [m for m in CLI_METHODS if m in cfg.methods]
    out = []
    for sigma in cfg.sigmas:
        record = [f"{sigma:g}"]
        for method in methods:
            cells = [r for r in rows if r.sigma == sigma and r.method == method]
            if cells and all(not r.error and r.psnr_denoised is not None
                             for r in cells):
                record.append(_fmt(sum(r.psnr_denoised for r in cells) / len(cells)))
            else:
                record.append("")
        out.append(record)
    _write_csv(path, ["sigma", *methods], out)


def write_timings_csv(rows: list[ResultRow], path: Path) -> None:
    """Wall-clock stage times; the one output excluded from determinism."""
    out = []
    for r in rows:
        for stage, seconds in r.timings.items():
            out.append((r.image, r.method, f"{r.sigma:g}", stage, _fmt(seconds)))
    _write_csv(path, TIMING_COLUMNS, out)


def run_compare(cfg: ExperimentConfig) -> tuple[list[ResultRow], bool]:
    """Run the image x sigma x method grid and write the three CSVs.

    Returns (rows, any_failed). Cell failures are recorded in their row and
    never abort the rest of the grid.
    """
    cells = [(cfg, path, sigma, method)
             for path in cfg.images
             for sigma in cfg.sigmas
             for method in cfg.methods]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(cell) for cell in cells]
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_results_csv(rows, out_dir / "results.csv")
    write_summary_csv(rows, cfg, out_dir / "summary.csv")
    write_timings_csv(rows, out_dir / "timings.csv")
    return rows, any(r.error for r in rows)


# ---------------------------------------------------------------------------
# cluster montages
# ---------------------------------------------------------------------------

_FONT = {  # 3x5 glyphs, rows top-down, bit 2 = left pixel
    "0": (0b111, 0b101, 0b101, 0b101, 0b111),
    "1": (0b010, 0b110, 0b010, 0b010, 0b111),
    "2": (0b111, 0b001, 0b111, 0b100, 0b111),
    "3": (0b111, 0b001, 0b111, 0b001, 0b111),
    "4": (0b101, 0b101, 0b111, 0b001, 0b001),
    "5": (0b111, 0b100, 0b111, 0b001, 0b111),
    "6": (0b111, 0b100, 0b111, 0b101, 0b111),
    "7": (0b111, 0b001, 0b010, 0b010, 0b010),
    "8": (0b111, 0b101, 0b111, 0b101, 0b111),
    "9": (0b111, 0b101, 0b111, 0b001, 0b111),
    "n": (0b000, 0b000, 0b110, 0b101, 0b101),
    "=": (0b000, 0b111, 0b000, 0b111, 0b000),
}


def _render_text(text: str, scale: int = 2) -> np.ndarray:
    canvas = np.zeros((5 * scale, 4 * scale * len(text)))
    for i, ch in enumerate(text):
        glyph = _FONT.get(ch)
        if glyph is None:
            continue
        for row, bits in enumerate(glyph):
            for col in range(3):
                if (bits >> (2 - col)) & 1:
                    canvas[row * scale:(row + 1) * scale,
                           (i * 4 + col) * scale:(i * 4 + col + 1) * scale] = 255.0
    return canvas


def render_montage(patch_columns: np.ndarray, patch_side: int, cluster_size: int,
                   upscale: int = 4, sep: int = 2) -> Image:
    """Patches side by side (4x nearest-neighbor upscale) under an 'n=' label."""
    count = patch_columns.shape[1]
    tile = patch_side * upscale
    label = _render_text(f"n={cluster_size}")
    bar_h = label.shape[0] + 2 * sep
    width = max(count * tile + (count + 1) * sep, label.shape[1] + 2 * sep)
    canvas = np.zeros((bar_h + tile + sep, width))
    canvas[sep: sep + label.shape[0], sep: sep + label.shape[1]] = label
    for i in range(count):
        block = patch_columns[:, i].reshape(patch_side, patch_side)
        big = np.kron(block, np.ones((upscale, upscale)))
        x0 = sep + i * (tile + sep)
        canvas[bar_h: bar_h + tile, x0: x0 + tile] = big
    return Image(canvas)


MONTAGE_SAMPLES = 4


def export_cluster_artifacts(img: Image, method: str, k: int, seed: int,
                             out_dir: Path, patch_side: int = 8, stride: int = 8,
                             solver: SolverConfig | None = None,
                             elbow_kmax: int | None = None) -> Path:
    """Cluster an image's patches; write the labels CSV and a montage per cluster.

    Returns the labels CSV path. Montages show up to 4 randomly sampled
    patches (seeded) annotated with the cluster size.
    """
    solver = solver or SolverConfig()
    patches = extract_patches(img, patch_side, stride)
    coef = self_representation(patches.data, method, solver)
    clustering = spectral_cluster(build_affinity(coef), k, seed)
    out_dir.mkdir(parents=True, exist_ok=True)

    origins = patches.grid.origins()
    labels_path = out_dir / "labels.csv"
    _write_csv(labels_path, ("patch_index", "row", "col", "label"),
               [(j, origins[j][0], origins[j][1], int(clustering.labels[j]))
                for j in range(patches.n)])

    for cid in range(k):
        members = clustering.members(cid)
        if members.size == 0:
            continue
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "montage", cid)))
        take = rng.choice(members, size=min(MONTAGE_SAMPLES, members.size),
                          replace=False)
        montage = render_montage(patches.data[:, np.sort(take)], patch_side,
                                 int(members.size))
        write_pgm(montage, out_dir / f"cluster_{cid:02d}_n{members.size}.pgm")

    if elbow_kmax is not None:
        khat, curve = elbow_estimate_k(patches.data.T, range(1, elbow_kmax + 1), seed)
        _write_csv(out_dir / "elbow.csv", ("k", "inertia"),
                   [(kk, _fmt(float(v))) for kk, v in curve])
        print(f"elbow estimate: k={khat}")
    return labels_path


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def cmd_corrupt(args) -> int:
    img = read_pgm(args.input)
    noisy = corrupt(img, NoiseSpec(args.sigma, args.seed))
    write_pgm(noisy, args.output)
    print(f"sigma_hat={estimate_noise_sigma(noisy):.4f}")
    return 0


def cmd_estimate_sigma(args) -> int:
    print(f"sigma_hat={estimate_noise_sigma(read_pgm(args.input)):.4f}")
    return 0


def cmd_cluster(args) -> int:
    img = read_pgm(args.input)
    solver = SolverConfig(tau=args.tau, max_iter=args.max_iter, tol=args.tol,
                          sigma_fit=args.sigma_fit)
    labels_path = export_cluster_artifacts(
        img, SOLVER_OF[args.method] if args.method in SOLVER_OF else args.method,
        args.k, args.seed, Path(args.out_dir), args.patch_side, args.stride,
        solver, args.elbow_kmax)
    print(f"labels written to {labels_path}")
    return 0


def cmd_denoise(args) -> int:
    noisy = read_pgm(args.input)
    if args.method == "nlm":
        sigma_hat = estimate_noise_sigma(noisy)
        out = nlm_denoise(noisy, NlmConfig(args.nlm_k, args.nlm_patch,
                                           args.nlm_window), sigma_hat)
    else:
        cfg = PipelineConfig(
            patch_side=args.patch_side, stride=args.stride, n_clusters=args.k,
            seed=args.seed,
            solver=SolverConfig(tau=args.tau, max_iter=args.max_iter, tol=args.tol),
            dim_policy=DimPolicy(kind=args.dim_kind, r=args.dim_r,
                                 theta=args.dim_theta, cap=args.dim_cap),
            sigma_fit_multiplier=args.sigma_fit_multiplier)
        res = denoise_pipeline(noisy, SOLVER_OF[args.method], cfg)
        out = res.image
        sigma_hat = res.sigma_hat
    write_pgm(out, args.output)
    print(f"sigma_hat={sigma_hat:.4f}")
    if args.reference:
        ref = read_pgm(args.reference)
        print(f"psnr_noisy={psnr(ref, noisy):.4f} psnr_denoised={psnr(ref, out):.4f}")
    return 0


def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse a 'key = value' configuration file ('#' starts a comment line)."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = stripped.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _split_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def experiment_config_from_args(args) -> ExperimentConfig:
    """Merge built-in defaults, the config file, and explicit flags."""
    merged: dict[str, object] = {}
    if args.config:
        raw = load_config_file(args.config)
        casts = {
            "images": _split_list, "sigmas": lambda t: [float(v) for v in _split_list(t)],
            "methods": _split_list,
            "alpha_grid": lambda t: tuple(float(v) for v in _split_list(t)),
            "k": int, "patch_side": int, "stride": int, "seed": int,
            "workers": int, "max_iter": int, "dim_r": int, "dim_cap": int,
            "nlm_patch": int, "nlm_window": int,
            "tau": float, "tol": float, "sigma_fit_multiplier": float,
            "dim_theta": float, "nlm_k": float,
            "out_dir": str, "dim_kind": str,
        }
        for key, value in raw.items():
            if key not in casts:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = casts[key](value)
    for key in ("images", "sigmas", "methods", "alpha_grid", "k", "patch_side",
                "stride", "seed", "workers", "max_iter", "dim_r", "dim_cap",
                "nlm_patch", "nlm_window", "tau", "tol", "sigma_fit_multiplier",
                "dim_theta", "nlm_k", "out_dir", "dim_kind"):
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    merged.setdefault("out_dir", os.environ.get(OUTDIR_ENV, "."))
    for name in ("images", "sigmas", "methods", "alpha_grid"):
        if name in merged:
            merged[name] = tuple(merged[name])
    return ExperimentConfig(**merged)


def cmd_compare(args) -> int:
    cfg = experiment_config_from_args(args)
    rows, failed = run_compare(cfg)
    methods = [m for m in CLI_METHODS if m in cfg.methods]
    print("sigma  " + "  ".join(f"{m:>10}" for m in methods))
    for sigma in cfg.sigmas:
        vals = []
        for method in methods:
            cells = [r for r in rows if r.sigma == sigma and r.method == method
                     and not r.error and r.psnr_denoised is not None]
            vals.append(f"{sum(r.psnr_denoised for r in cells) / len(cells):10.3f}"
                        if cells else " " * 10)
        print(f"{sigma:<7g}" + "  ".join(vals))
    for r in rows:
        if r.error:
            print(f"FAILED {r.image} {r.method} sigma={r.sigma:g}: {r.error}",
                  file=sys.stderr)
    print(f"results written to {Path(cfg.out_dir) / 'results.csv'}")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------

def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=20, help="number of clusters")
    p.add_argument("--patch-side", dest="patch_side", type=int, default=8)
    p.add_argument("--stride", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--sigma-fit-multiplier", dest="sigma_fit_multiplier",
                   type=float, default=1.0)
    p.add_argument("--dim-kind", dest="dim_kind", choices=("energy", "fixed"),
                   default="energy")
    p.add_argument("--dim-r", dest="dim_r", type=int, default=4)
    p.add_argument("--dim-theta", dest="dim_theta", type=float, default=0.9)
    p.add_argument("--dim-cap", dest="dim_cap", type=int, default=16)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchpsp",
        description="Patch subspace clustering, projection denoising, and "
                    "PSNR-versus-noise experiments over PGM images.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corrupt", help="add seeded Gaussian noise to an image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("estimate-sigma", help="print the wavelet noise estimate")
    p.add_argument("input")
    p.set_defaults(func=cmd_estimate_sigma)

    p = sub.add_parser("cluster", help="cluster patches; write labels and montages")
    p.add_argument("input")
    p.add_argument("--method", choices=("psp-bpdn", "psp-nnc", "psp-nn",
                                        "bpdn", "nnc", "nn"), default="psp-nnc")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--patch-side", dest="patch_side", type=int, default=8)
    p.add_argument("--stride", type=int, default=8)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--sigma-fit", dest="sigma_fit", type=float, default=0.0)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--elbow-kmax", dest="elbow_kmax", type=int, default=None,
                   help="also write the k-means inertia curve up to this k")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("denoise", help="denoise one image with one method")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--method", choices=CLI_METHODS, required=True)
    p.add_argument("--reference", default=None,
                   help="clean image for PSNR reporting")
    _add_pipeline_flags(p)
    p.add_argument("--nlm-k", dest="nlm_k", type=float, default=0.01)
    p.add_argument("--nlm-patch", dest="nlm_patch", type=int, default=7)
    p.add_argument("--nlm-window", dest="nlm_window", type=int, default=21)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("compare", help="run the image x sigma x method grid")
    p.add_argument("--config", default=None, help="key = value settings file")
    p.add_argument("--images", type=_split_list, default=None,
                   help="comma-separated PGM paths")
    p.add_argument("--sigmas", type=lambda t: [float(v) for v in _split_list(t)],
                   default=None)
    p.add_argument("--methods", type=_split_list, default=None)
    p.add_argument("--alpha-grid", dest="alpha_grid",
                   type=lambda t: tuple(float(v) for v in _split_list(t)),
                   default=None)
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--workers", type=int, default=None)
    for name, typ in (("k", int), ("patch_side", int), ("stride", int),
                      ("seed", int), ("max_iter", int), ("dim_r", int),
                      ("dim_cap", int), ("nlm_patch", int), ("nlm_window", int),
                      ("tau", float), ("tol", float),
                      ("sigma_fit_multiplier", float), ("dim_theta", float),
                      ("nlm_k", float)):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ,
                       default=None)
    p.add_argument("--dim-kind", dest="dim_kind", choices=("energy", "fixed"),
                   default=None)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "out_dir", None) is None and args.command == "cluster":
        args.out_dir = os.environ.get(OUTDIR_ENV, ".")
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
