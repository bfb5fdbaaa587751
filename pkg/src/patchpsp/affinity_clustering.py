"""Affinity construction and spectral partitioning of patch representations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .solvers import CoefVector


class EigensolverError(RuntimeError):
    """Eigendecomposition failed or returned pairs above the residual budget."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class CoefMatrix:
    """N x N self-representation matrix; column j describes patch j."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("coefficient matrix must be square")
        if np.any(np.diagonal(c) != 0.0):
            raise ValueError("coefficient matrix must have an exact zero diagonal")
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @classmethod
    def from_vectors(cls, vectors: Iterable[CoefVector]) -> "CoefMatrix":
        """Assemble columns from per-patch coefficient vectors.

        Every vector must carry its target index; vector j is re-embedded to
        full length with a zero at its own position.
        """
        cols = [v.embedded() for v in vectors]
        if not cols:
            raise ValueError("no coefficient vectors")
        c = np.column_stack(cols)
        if c.shape[0] != c.shape[1]:
            raise ValueError("vector count does not match embedded length")
        return cls(c)


@dataclass(frozen=True, eq=False)
class AffinityMatrix:
    """Symmetric non-negative patch similarity graph with a zero diagonal."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("affinity matrix must be square")
        if np.any(w != w.T):
            raise ValueError("affinity matrix must be exactly symmetric")
        if np.any(w < 0):
            raise ValueError("affinity weights must be non-negative")
        if np.any(np.diagonal(w) != 0.0):
            raise ValueError("affinity diagonal must be zero")
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True, eq=False)
class Clustering:
    """Integer labels in {0..k-1} with per-cluster sizes.

    ``inertia`` carries the final k-means objective when the labels came from
    a k-means pass (possibly in a spectral embedding), else None.
    """

    labels: np.ndarray
    k: int
    sizes: np.ndarray
    inertia: float | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be a vector")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError("labels out of range")
        sizes = np.asarray(self.sizes, dtype=np.int64)
        if sizes.shape != (self.k,) or sizes.sum() != labels.size:
            raise ValueError("sizes inconsistent with labels")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def from_labels(cls, labels: np.ndarray, k: int,
                    inertia: float | None = None) -> "Clustering":
        labels = np.asarray(labels, dtype=np.int64)
        return cls(labels, k, np.bincount(labels, minlength=k), inertia)

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster_id)


def build_affinity(c: CoefMatrix | np.ndarray) -> AffinityMatrix:
    """Symmetrize representation magnitudes: W = |C| + |C^T|."""
    mat = c.c if isinstance(c, CoefMatrix) else np.asarray(c, dtype=np.float64)
    a = np.abs(mat)
    return AffinityMatrix(a + a.T)


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

def _pairwise_sq(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (np.einsum("ij,ij->i", points, points)[:, None]
          + np.einsum("ij,ij->i", centers, centers)[None, :]
          - 2.0 * points @ centers.T)
    return np.maximum(d2, 0.0)


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    d2 = np.einsum("ij,ij->i", points - centers[0], points - centers[0])
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))  # remaining points coincide with centers
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[i] = points[idx]
        diff = points - centers[i]
        d2 = np.minimum(d2, np.einsum("ij,ij->i", diff, diff))
    return centers


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int = 300):
    centers = _kmeanspp_init(points, k, rng)
    labels = np.full(points.shape[0], -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = _pairwise_sq(points, centers)
        new_labels = d2.argmin(axis=1)
        # empty cluster: re-seed its centroid at the farthest point
        for j in range(k):
            if not np.any(new_labels == j):
                far = int(d2[np.arange(points.shape[0]), new_labels].argmax())
                centers[j] = points[far]
                new_labels[far] = j
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = labels == j
            if np.any(members):
                centers[j] = points[members].mean(axis=0)
    inertia = float(((points - centers[labels]) ** 2).sum())
    return labels, centers, inertia


def kmeans(points: np.ndarray, k: int, seed: int, n_restarts: int = 10,
           max_iter: int = 300) -> Clustering:
    """Lloyd's algorithm with k-means++ seeding, best of n_restarts runs.

    Deterministic for fixed (points, k, seed): restart r draws from the
    generator seeded by SeedSequence(seed).spawn()[r].
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("points must be a non-empty N x m array")
    if not 1 <= k <= points.shape[0]:
        raise ValueError(f"k={k} outside [1, {points.shape[0]}]")
    best = None
    for child in np.random.SeedSequence(seed).spawn(n_restarts):
        rng = np.random.Generator(np.random.PCG64(child))
        labels, _, inertia = _lloyd(points, k, rng, max_iter)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    return Clustering.from_labels(best[0], k, inertia=best[1])


# ---------------------------------------------------------------------------
# spectral clustering
# ---------------------------------------------------------------------------

EIGENPAIR_RESIDUAL_BUDGET = 1e-8


def normalized_laplacian(w: np.ndarray) -> np.ndarray:
    """Symmetric normalized Laplacian I - D^{-1/2} W D^{-1/2}.

    Zero-degree rows get a zero scaling entry, which leaves them as isolated
    unit rows of the Laplacian.
    """
    deg = w.sum(axis=1)
    with np.errstate(divide="ignore"):
        dinv = np.where(deg > 0.0, 1.0 / np.sqrt(deg), 0.0)
    lap = -(dinv[:, None] * w * dinv[None, :])
    lap[np.diag_indices_from(lap)] = 1.0
    return lap


def spectral_cluster(w: AffinityMatrix | np.ndarray, k: int, seed: int,
                     n_restarts: int = 10) -> Clustering:
    """Normalized spectral clustering with seeded k-means on the embedding.

    Takes the k eigenvectors of smallest eigenvalue of the normalized
    Laplacian, row-normalizes the embedding (zero rows stay zero), k-means
    clusters the rows of connected nodes, and assigns zero-degree nodes to
    the nearest centroid.
    """
    mat = w.w if isinstance(w, AffinityMatrix) else np.asarray(w, dtype=np.float64)
    n = mat.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of nodes {n}")
    lap = normalized_laplacian(mat)
    try:
        evals, evecs = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigendecomposition failed: {exc}") from exc
    emb = np.ascontiguousarray(evecs[:, :k])
    resid = np.abs(lap @ emb - emb * evals[None, :k]).max(initial=0.0)
    if resid > EIGENPAIR_RESIDUAL_BUDGET:
        raise EigensolverError(
            f"eigenpair residual {resid:.3e} above budget", residual=float(resid))
    row_norm = np.linalg.norm(emb, axis=1)
    nz = row_norm > 0.0
    emb[nz] /= row_norm[nz, None]
    emb[~nz] = 0.0

    connected = mat.sum(axis=1) > 0.0
    if connected.sum() < k:
        sub = kmeans(emb, k, seed, n_restarts)
        return Clustering.from_labels(sub.labels, k, inertia=sub.inertia)
    sub = kmeans(emb[connected], k, seed, n_restarts)
    labels = np.empty(n, dtype=np.int64)
    labels[connected] = sub.labels
    rest = ~connected
    if np.any(rest):
        centers = np.vstack([emb[connected][sub.labels == j].mean(axis=0)
                             for j in range(k)])
        labels[rest] = _pairwise_sq(emb[rest], centers).argmin(axis=1)
    return Clustering.from_labels(labels, k, inertia=sub.inertia)


# ---------------------------------------------------------------------------
# elbow heuristic
# ---------------------------------------------------------------------------

def _unit_scale(values: np.ndarray) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi <= lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def elbow_estimate_k(points: np.ndarray, k_range: Sequence[int], seed: int,
                     n_restarts: int = 10) -> tuple[int, list[tuple[int, float]]]:
    """Inertia curve over k_range plus the elbow estimate.

    The elbow is the point of maximum perpendicular distance to the chord
    joining the curve's endpoints, with both axes min-max scaled first; a flat
    curve falls back to the smallest k. The full curve is returned so a human
    can override the estimate.
    """
    ks = [int(k) for k in k_range]
    if not ks or ks != sorted(ks):
        raise ValueError("k_range must be ascending and non-empty")
    curve = [(k, kmeans(points, k, seed, n_restarts).inertia) for k in ks]
    xs = _unit_scale(np.array([float(k) for k, _ in curve]))
    ys = _unit_scale(np.array([v for _, v in curve]))
    dx, dy = xs[-1] - xs[0], ys[-1] - ys[0]
    chord = float(np.hypot(dx, dy))
    if chord == 0.0:
        return ks[0], curve
    dist = np.abs(dx * (ys - ys[0]) - dy * (xs - xs[0])) / chord
    return ks[int(np.argmax(dist))], curve
