"""Grayscale image container, patch extraction, and overlap-aware reassembly."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class TilingError(ValueError):
    """Requested patch grid does not fit the image dimensions."""


@dataclass(frozen=True, eq=False)
class Image:
    """A grayscale raster on the 0-255 intensity scale.

    Pixels are stored row-major in a (height, width) float64 array. Values are
    real, not quantized: denoisers produce fractional intensities, and clipping
    to [0, 255] is applied only by operations that promise it.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixels must be finite")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def clipped(self) -> "Image":
        """Copy with every intensity clipped to [0, 255]."""
        return Image(np.clip(self.pixels, 0.0, 255.0))


@dataclass(frozen=True)
class PatchGrid:
    """Geometry of a patch tiling: square side, stride, and top-left origins.

    Origins are ordered row-major: all column origins for the first row origin,
    then the next row origin, and so on. When the stride does not land exactly
    on the far edge, a final origin is appended so every pixel is covered.
    """

    patch_side: int
    stride: int
    row_origins: tuple[int, ...]
    col_origins: tuple[int, ...]
    image_height: int
    image_width: int

    @property
    def n_patches(self) -> int:
        return len(self.row_origins) * len(self.col_origins)

    def origins(self) -> list[tuple[int, int]]:
        """All (row, col) top-left origins in column-fastest order."""
        return [(r, c) for r in self.row_origins for c in self.col_origins]


@dataclass(frozen=True, eq=False)
class PatchMatrix:
    """Vectorized patches: a d x N matrix whose columns are patches.

    d = patch_side**2 and column j holds patch j flattened row-major. N equals
    the number of grid origins, ordered as in PatchGrid.origins().
    """

    data: np.ndarray
    grid: PatchGrid

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        d = self.grid.patch_side ** 2
        if data.ndim != 2 or data.shape[0] != d:
            raise ValueError(f"patch matrix must have {d} rows")
        if data.shape[1] != self.grid.n_patches:
            raise ValueError("column count does not match the grid")
        object.__setattr__(self, "data", data)

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


def _axis_origins(extent: int, patch_side: int, stride: int) -> tuple[int, ...]:
    origins = list(range(0, extent - patch_side + 1, stride))
    # Cover the far edge with one extra (overlapping) origin if needed.
    last = extent - patch_side
    if origins[-1] != last:
        origins.append(last)
    return tuple(origins)


def make_grid(image_height: int, image_width: int, patch_side: int, stride: int) -> PatchGrid:
    """Build the patch grid for an image, validating the tiling preconditions."""
    if patch_side < 1 or stride < 1:
        raise ValueError("patch_side and stride must be >= 1")
    if patch_side > min(image_height, image_width):
        raise TilingError(
            f"patch side {patch_side} exceeds image extent "
            f"{image_height}x{image_width}"
        )
    if stride == patch_side and (image_height % patch_side or image_width % patch_side):
        raise TilingError(
            f"non-overlapping tiling requires the patch side ({patch_side}) to divide "
            f"both image dimensions ({image_height}x{image_width})"
        )
    return PatchGrid(
        patch_side=patch_side,
        stride=stride,
        row_origins=_axis_origins(image_height, patch_side, stride),
        col_origins=_axis_origins(image_width, patch_side, stride),
        image_height=image_height,
        image_width=image_width,
    )


def extract_patches(img: Image, patch_side: int, stride: int) -> PatchMatrix:
    """Slice an image into (possibly overlapping) square patches.

    Returns a d x N matrix with d = patch_side**2; each column is one patch
    flattened row-major. Patch order follows PatchGrid.origins().
    """
    grid = make_grid(img.height, img.width, patch_side, stride)
    windows = sliding_window_view(img.pixels, (patch_side, patch_side))
    rows = np.asarray(grid.row_origins)
    cols = np.asarray(grid.col_origins)
    blocks = windows[np.ix_(rows, cols)]  # (nrows, ncols, L, L)
    data = blocks.reshape(grid.n_patches, patch_side * patch_side).T
    return PatchMatrix(data=np.ascontiguousarray(data), grid=grid)


def reassemble(patches: PatchMatrix, weights: np.ndarray | None = None) -> Image:
    """Rebuild the image from its patches, averaging where patches overlap.

    By default every covering patch contributes with equal weight. `weights`
    (length d, positive) biases the average toward chosen in-patch positions;
    non-overlapping grids reproduce exact placement either way.
    """
    grid = patches.grid
    side = grid.patch_side
    if weights is None:
        w_patch = np.ones((side, side))
    else:
        w_patch = np.asarray(weights, dtype=np.float64).reshape(side, side)
        if np.any(w_patch <= 0):
            raise ValueError("weights must be positive")
    accum = np.zeros((grid.image_height, grid.image_width))
    cover = np.zeros((grid.image_height, grid.image_width))
    for j, (r, c) in enumerate(grid.origins()):
        block = patches.data[:, j].reshape(side, side)
        accum[r : r + side, c : c + side] += w_patch * block
        cover[r : r + side, c : c + side] += w_patch
    return Image(accum / cover)
