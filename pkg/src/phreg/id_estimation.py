"""Intrinsic-dimension estimators.

Two estimators over point clouds:

* `ph_dim_birdal` — the growth rate of the total edge length of minimum
  spanning trees over random subsets. For uniform samples of a d-dimensional
  set the total MST length grows like n^((d-1)/d), so the least-squares slope
  s of log E against log n gives d = 1 / (1 - s).
* `twonn` — the ratio of second- to first-nearest-neighbor distances, whose
  distribution depends only on the intrinsic dimension.

Both share the closed-form least-squares slope kernel `ls_slope`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DegenerateInputError, InvalidInputError
from .geometry import PointCloud
from .tda import _mst_condensed

__all__ = [
    "SubsetSchedule",
    "IdEstimate",
    "ls_slope",
    "default_schedule",
    "ph_dim_birdal",
    "twonn",
]


@dataclass(frozen=True)
class SubsetSchedule:
    """Strictly increasing subset sizes n_1 < ... < n_m used for slope fits."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) < 2:
            raise InvalidInputError("schedule needs at least 2 subset sizes")
        if sizes[0] < 2:
            raise InvalidInputError("smallest subset size must be >= 2")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InvalidInputError(f"subset sizes must be strictly increasing, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def m(self) -> int:
        return len(self.sizes)


@dataclass(frozen=True)
class IdEstimate:
    slope: float
    dimension: float
    method: str
    warning: str | None = field(default=None)


def ls_slope(xs, ys) -> float:
    """Least-squares slope (m*Sxy - Sx*Sy) / (m*Sxx - Sx^2) in closed form."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise InvalidInputError("ls_slope needs two equal-length 1-D arrays of size >= 2")
    m = x.size
    denom = m * np.sum(x * x) - np.sum(x) ** 2
    if denom <= 0.0:
        raise DegenerateInputError("ls_slope abscissa has zero variance")
    return float((m * np.sum(x * y) - np.sum(x) * np.sum(y)) / denom)


def default_schedule(n: int, m: int = 8) -> SubsetSchedule:
    """m sizes evenly spaced from ceil(n/m) to n (deduplicated, ascending)."""
    if n < 2:
        raise InvalidInputError("need n >= 2 to build a schedule")
    raw = np.linspace(math.ceil(n / m), n, m).round().astype(int)
    sizes = sorted(set(int(s) for s in raw if s >= 2))
    if len(sizes) < 2:
        sizes = [2, n] if n > 2 else [2]
    if len(sizes) < 2:
        raise InvalidInputError(f"cannot build a 2-size schedule for n={n}")
    return SubsetSchedule(tuple(sizes))


def _dimension_from_slope(slope: float) -> tuple[float, str | None]:
    # Total MST length of uniform d-dimensional data grows like n^((d-1)/d);
    # invert s = (d-1)/d. Slopes >= 1 have no finite preimage.
    if slope >= 1.0:
        return math.inf, f"slope {slope:.4f} >= 1; dimension diverges"
    return max(0.0, 1.0 / (1.0 - slope)), None


def ph_dim_birdal(
    cloud: PointCloud,
    schedule: SubsetSchedule | None = None,
    reps: int = 5,
    rng: np.random.Generator | None = None,
) -> IdEstimate:
    """Estimate intrinsic dimension from the MST-length growth rate.

    For each schedule size draws `reps` random subsets, averages log E over
    the repetitions, fits the slope of mean log E against log n, and converts
    the slope to a dimension.

    Args:
        cloud: input points; must have at least as many points as the largest
            schedule size.
        schedule: subset sizes; defaults to 8 sizes from ceil(n/8) to n.
        reps: random subsets per size.
        rng: seeded generator; defaults to a fresh unseeded one.

    Raises:
        DegenerateInputError: some subset had zero total edge length (all
            points coincide).
    """
    if schedule is None:
        schedule = default_schedule(cloud.n)
    if rng is None:
        rng = np.random.default_rng()
    if reps < 1:
        raise InvalidInputError(f"reps must be >= 1, got {reps}")
    if schedule.sizes[-1] > cloud.n:
        raise InvalidInputError(
            f"largest schedule size {schedule.sizes[-1]} exceeds cloud size {cloud.n}"
        )

    mean_log_e = []
    for size in schedule.sizes:
        logs = []
        for _ in range(reps):
            idx = rng.choice(cloud.n, size=size, replace=False)
            total = _mst_condensed(pdist(cloud.data[idx]), size)[3]
            if total <= 0.0:
                raise DegenerateInputError(
                    f"total edge length is 0 for a subset of size {size}; "
                    "the cloud has no spatial extent"
                )
            logs.append(math.log(total))
        mean_log_e.append(float(np.mean(logs)))

    slope = ls_slope(np.log(schedule.sizes), mean_log_e)
    dimension, warning = _dimension_from_slope(slope)
    return IdEstimate(slope=slope, dimension=dimension, method="ph_birdal", warning=warning)


def twonn(cloud: PointCloud, truncation: float = 0.1) -> IdEstimate:
    """TwoNN estimator from first/second nearest-neighbor distance ratios.

    Computes mu_i = r2(i)/r1(i) for every point (exact duplicate points are
    removed first), then the maximum-likelihood dimension with the top
    `truncation` fraction of ratios treated as right-censored at the largest
    kept value:

        d = N_kept / (sum_kept log mu + N_censored * log mu_kept_max)

    Censoring rather than plain deletion keeps the estimator unbiased under
    truncation; with truncation = 0 it reduces to N / sum(log mu).
    """
    if not 0.0 <= truncation < 1.0:
        raise InvalidInputError(f"truncation must be in [0, 1), got {truncation}")
    data = np.unique(cloud.data, axis=0)
    n = data.shape[0]
    if n < 3:
        raise DegenerateInputError(
            f"TwoNN needs >= 3 distinct points, got {n} after deduplication"
        )

    dm = squareform(pdist(data))
    np.fill_diagonal(dm, np.inf)
    nearest_two = np.partition(dm, 1, axis=1)[:, :2]
    r1 = nearest_two[:, 0]
    r2 = nearest_two[:, 1]
    if np.any(r1 <= 0.0):
        raise DegenerateInputError("zero first-neighbor distance after deduplication")

    log_mu = np.sort(np.log(r2 / r1))
    n_keep = n - int(np.floor(truncation * n))
    kept = log_mu[:n_keep]
    denom = float(np.sum(kept) + (n - n_keep) * kept[-1])
    if denom <= 0.0:
        raise DegenerateInputError("all neighbor-distance ratios are 1; dimension diverges")
    dimension = n_keep / denom
    return IdEstimate(slope=dimension, dimension=dimension, method="twonn")
