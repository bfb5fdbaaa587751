"""Deterministic 256x256 synthetic test images for the experiment harness.

Stand-ins for a conventional grayscale test set: each image mixes flat
regions at several intensity levels, linear ramps, and periodic textures, so
its 8x8 tiles fall into a moderate number of structured families that repeat
far beyond any local search window.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .patch_grid import Image
from .pgm import write_pgm


def _quantize(values: np.ndarray) -> Image:
    return Image(np.clip(np.rint(values), 0, 255))


def facets(size: int = 256) -> Image:
    """Overlapping flat rectangles, a diagonal split, and a disk."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.full((size, size), 96.0)
    img[:, int(size * 0.56):] = 176.0
    img[(x + y) > 1.30 * size] = 64.0
    img[int(size * 0.06): int(size * 0.41), int(size * 0.09): int(size * 0.47)] = 48.0
    img[int(size * 0.55): int(size * 0.86), int(size * 0.16): int(size * 0.41)] = 224.0
    img[int(size * 0.19): int(size * 0.94), int(size * 0.59): int(size * 0.91)] = 136.0
    disk = (y - 0.28 * size) ** 2 + (x - 0.78 * size) ** 2 <= (0.14 * size) ** 2
    img[disk] = 208.0
    return _quantize(img)


def ramps(size: int = 256) -> Image:
    """Horizontal bands of linear gradients at several orientations."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    bands = [
        lambda yy, xx: 50.0 + 0.60 * xx,
        lambda yy, xx: 215.0 - 0.55 * xx,
        lambda yy, xx: 40.0 + 5.0 * yy,
        lambda yy, xx: 110.0 + 0.30 * (xx + 2.0 * yy),
        lambda yy, xx: np.full_like(xx, 84.0),
        lambda yy, xx: 180.0 - 0.35 * xx + 1.5 * yy,
        lambda yy, xx: 28.0 + 0.42 * xx,
        lambda yy, xx: np.full_like(xx, 196.0),
    ]
    height = size // len(bands)
    img = np.empty((size, size))
    for i, fn in enumerate(bands):
        sl = slice(i * height, size if i == len(bands) - 1 else (i + 1) * height)
        img[sl] = fn(y[sl] - i * height, x[sl])
    return _quantize(img)


def waves(size: int = 256) -> Image:
    """Quadrants of periodic gratings, a checkerboard, and a flat field."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.empty((size, size))
    half = size // 2
    q = (slice(0, half), slice(0, half))
    img[q] = 128.0 + 88.0 * np.sin(2.0 * np.pi * x[q] / 14.0)
    q = (slice(0, half), slice(half, size))
    img[q] = 120.0 + 80.0 * np.sin(2.0 * np.pi * y[q] / 11.0)
    q = (slice(half, size), slice(0, half))
    img[q] = 132.0 + 76.0 * np.sin(2.0 * np.pi * (x[q] + y[q]) / 18.0)
    quarter = half // 2
    img[half: half + quarter, half:] = np.where(
        ((x[half: half + quarter, half:] // 8).astype(int)
         + (y[half: half + quarter, half:] // 8).astype(int)) % 2 == 0, 70.0, 190.0)
    img[half + quarter:, half:] = 128.0
    return _quantize(img)


CORPUS_BUILDERS = {"facets": facets, "ramps": ramps, "waves": waves}


def corpus_images(size: int = 256) -> dict[str, Image]:
    """All shipped synthetic images, keyed by name."""
    return {name: build(size) for name, build in CORPUS_BUILDERS.items()}


def write_corpus(out_dir: str | Path, size: int = 256) -> list[Path]:
    """Write every corpus image as <name>.pgm under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, img in corpus_images(size).items():
        path = out / f"{name}.pgm"
        write_pgm(img, path)
        paths.append(path)
    return paths
