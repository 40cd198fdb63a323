"""Point-cloud containers and pairwise Euclidean distances.

Everything downstream (MSTs, persistence, the losses) consumes the two types
defined here. Clouds are dense, row-major, float64; no spatial indexing is
done anywhere because the batch sizes this package targets are a few hundred
points, where the full O(n^2) matrix is cheap and exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import InvalidInputError

__all__ = [
    "PointCloud",
    "DistanceMatrix",
    "pairwise_distances",
    "subsample",
    "load_cloud_csv",
    "save_cloud_csv",
]


@dataclass(frozen=True)
class PointCloud:
    """n points in d-dimensional Euclidean space.

    The backing array is copied on construction, coerced to float64 and made
    read-only, so instances can be shared freely across threads.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise InvalidInputError(f"point cloud must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError(f"point cloud needs n >= 1 and d >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("point cloud contains NaN or Inf coordinates")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    """Full symmetric n x n Euclidean distance matrix with a zero diagonal."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidInputError(f"distance matrix must be square, got shape {arr.shape}")
        arr = np.array(arr, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pairwise_distances(cloud: PointCloud) -> DistanceMatrix:
    """Compute the full Euclidean distance matrix of a cloud.

    Uses the coordinate-difference form (via scipy's pdist), which is exactly
    symmetric and carries none of the cancellation error of the dot-product
    trick; slope fits downstream want that headroom.
    """
    if cloud.n == 1:
        return DistanceMatrix(np.zeros((1, 1)))
    return DistanceMatrix(squareform(pdist(cloud.data)))


def subsample(
    cloud: PointCloud, size: int, rng: np.random.Generator
) -> tuple[PointCloud, np.ndarray]:
    """Draw `size` points uniformly without replacement.

    Returns the sampled cloud and the chosen row indices so a paired cloud
    (e.g. the labels of the same batch) can be subsampled identically.
    """
    if not 1 <= size <= cloud.n:
        raise InvalidInputError(f"subsample size must be in [1, {cloud.n}], got {size}")
    indices = rng.choice(cloud.n, size=size, replace=False)
    return PointCloud(cloud.data[indices]), indices


def load_cloud_csv(path: str | Path) -> PointCloud:
    """Read a point cloud from CSV: one point per row, comma-separated fields,
    lines starting with '#' ignored."""
    try:
        arr = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"cannot read point-cloud CSV {path}: {exc}") from exc
    if arr.size == 0:
        raise InvalidInputError(f"point-cloud CSV {path} is empty")
    return PointCloud(arr)


def save_cloud_csv(cloud: PointCloud, path: str | Path, header: str = "") -> None:
    """Write a cloud as CSV with full float64 round-trip precision."""
    np.savetxt(path, cloud.data, delimiter=",", fmt="%.17g", header=header, comments="# ")
