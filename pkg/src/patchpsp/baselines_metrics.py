"""Noise synthesis and estimation, the non-local means baseline, and PSNR."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .patch_grid import Image


@dataclass(frozen=True)
class NlmConfig:
    """Non-local means settings: filter strength h = filter_k * sigma_hat."""

    filter_k: float = 0.01
    patch_size: int = 7
    search_window: int = 21

    def __post_init__(self):
        if self.filter_k <= 0:
            raise ValueError("filter_k must be > 0")
        for name in ("patch_size", "search_window"):
            v = getattr(self, name)
            if v < 1 or v % 2 == 0:
                raise ValueError(f"{name} must be odd and positive")


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian noise level on the 0-255 scale plus the generator seed."""

    sigma: float
    seed: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def standard_normals(count: int, seed: int) -> np.ndarray:
    """Deterministic standard normal draws.

    Uniform variates come from CPython's Mersenne Twister (random.Random,
    whose stream for a fixed seed is documented as stable across versions);
    consecutive pairs (u1, u2) are converted by the Box-Muller transform,
    z0 = sqrt(-2 ln(1-u1)) cos(2 pi u2), z1 = ... sin(2 pi u2).
    """
    rng = random.Random(seed)
    pairs = (count + 1) // 2
    u = np.array([rng.random() for _ in range(2 * pairs)])
    radius = np.sqrt(-2.0 * np.log(1.0 - u[0::2]))  # 1-u in (0, 1]
    angle = 2.0 * np.pi * u[1::2]
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count]


def corrupt(img: Image, spec: NoiseSpec) -> Image:
    """Add white Gaussian noise and clip to [0, 255].

    Identical (img, spec) pairs produce bit-identical output; the noise field
    is standard_normals(height * width, spec.seed) reshaped row-major.
    """
    noise = standard_normals(img.height * img.width, spec.seed)
    noisy = img.pixels + spec.sigma * noise.reshape(img.height, img.width)
    return Image(np.clip(noisy, 0.0, 255.0))


def estimate_noise_sigma(img: Image) -> float:
    """Robust noise level from the finest diagonal wavelet detail.

    One separable Haar step over the even-cropped image; the estimate is
    median(|HH|) / 0.6745, the Gaussian-consistent median absolute deviation.
    """
    if img.height < 2 or img.width < 2:
        raise ValueError("image must be at least 2x2")
    px = img.pixels
    he = img.height - img.height % 2
    we = img.width - img.width % 2
    a = px[0:he:2, 0:we:2]
    b = px[0:he:2, 1:we:2]
    c = px[1:he:2, 0:we:2]
    d = px[1:he:2, 1:we:2]
    hh = 0.5 * (a - b - c + d)
    return float(np.median(np.abs(hh)) / 0.6745)


def _box_mean_valid(a: np.ndarray, size: int) -> np.ndarray:
    """Mean over every size x size window fully inside ``a``."""
    s = np.zeros((a.shape[0] + 1, a.shape[1] + 1))
    np.cumsum(np.cumsum(a, axis=0), axis=1, out=s[1:, 1:])
    return (s[size:, size:] - s[:-size, size:] - s[size:, :-size]
            + s[:-size, :-size]) / (size * size)


def nlm_denoise(img: Image, cfg: NlmConfig, sigma_hat: float) -> Image:
    """Pixelwise non-local means with noise-compensated patch distances.

    Every pixel becomes the weighted mean of the pixels in its search window,
    with weights exp(-max(D2 - 2 sigma_hat^2, 0) / h^2), where D2 is the mean
    squared difference between the two surrounding patches and h = filter_k *
    sigma_hat. A zero noise estimate returns the input unchanged.
    """
    if sigma_hat < 0:
        raise ValueError("sigma_hat must be >= 0")
    if sigma_hat == 0.0:
        return Image(img.pixels.copy())
    h2 = (cfg.filter_k * sigma_hat) ** 2
    comp = 2.0 * sigma_hat * sigma_hat
    half_w = cfg.search_window // 2
    half_p = cfg.patch_size // 2
    px = img.pixels
    height, width = px.shape
    padded = np.pad(px, half_w + half_p, mode="reflect")
    # window carrying the patch margin around the (height x width) core
    base = padded[half_w: half_w + height + 2 * half_p,
                  half_w: half_w + width + 2 * half_p]
    num = np.zeros_like(px)
    den = np.zeros_like(px)
    for dy in range(-half_w, half_w + 1):
        for dx in range(-half_w, half_w + 1):
            shifted = padded[half_w + dy: half_w + dy + height + 2 * half_p,
                             half_w + dx: half_w + dx + width + 2 * half_p]
            d2 = _box_mean_valid((base - shifted) ** 2, cfg.patch_size)
            w = np.exp(-np.maximum(d2 - comp, 0.0) / h2)
            num += w * shifted[half_p: half_p + height, half_p: half_p + width]
            den += w
    return Image(num / den)


def psnr(ref: Image, test: Image) -> float:
    """Peak signal-to-noise ratio in dB against a 255 peak; inf when equal."""
    if ref.pixels.shape != test.pixels.shape:
        raise ValueError("images must have identical dimensions")
    mse = float(np.mean((ref.pixels - test.pixels) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)
