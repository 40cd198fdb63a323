"""Differentiable topology losses over a feature batch.

Three losses on a feature batch Z paired with its targets Y, all built from
total MST edge lengths E(.) of random subsets:

* `loss_ld_prime` — the raw least-squares slope of log E(Z_n) against log n,
  pushing the feature cloud toward a lower growth rate (lower intrinsic
  dimension), with no reference to the targets.
* `loss_ld` — the absolute slope of e_i = log E(Z_{n_i}) / log E(Y_{n_i})
  against log n, which is minimal when feature and target growth rates agree.
* `loss_lt` — distance matching over MST-selected entries of both spaces'
  distance matrices, enforcing topological similarity on the full batch.

Gradients treat the MST edge index sets as locally constant: the tree is
piecewise constant in the edge ordering, so away from ties this is the exact
derivative. Each edge contributes through its length via the unit vector
(z_i - z_j)/||z_i - z_j||; zero-length edges contribute nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DegenerateInputError, DegenerateTargetError, InvalidInputError
from .geometry import PointCloud
from .id_estimation import SubsetSchedule, ls_slope
from .tda import _mst_condensed

__all__ = [
    "RegularizerOutput",
    "BatchPair",
    "training_schedule",
    "make_batch_pair",
    "loss_ld_prime",
    "loss_ld",
    "loss_lt",
    "combined_loss",
    "loss_call_count",
]

# Guard band on |log E(Y)|: Eq. for e_i divides by it, and values near 0 make
# gradients explode. Erroring loudly beats silently diverging.
EPS_LOG_TARGET = 1e-3

_LOSS_CALLS = 0


def loss_call_count() -> int:
    return _LOSS_CALLS


@dataclass(frozen=True)
class RegularizerOutput:
    """Scalar loss value and its gradient with respect to the feature batch."""

    value: float
    grad_z: np.ndarray


@dataclass(frozen=True)
class BatchPair:
    """A feature batch, its paired targets, and pre-drawn subset indices.

    Subset indices are drawn once (see `make_batch_pair`) and index z and y
    identically, which is what makes the ratio e_i well defined. `schedule`
    is None when the batch is too small to carry two distinct subset sizes;
    the slope losses reject such batches, the topology loss does not need
    subsets at all.
    """

    z: PointCloud
    y: PointCloud
    schedule: SubsetSchedule | None
    subset_indices: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.z.n != self.y.n:
            raise InvalidInputError(f"z has {self.z.n} rows but y has {self.y.n}")
        if self.schedule is not None:
            if len(self.subset_indices) != self.schedule.m:
                raise InvalidInputError("one index array per schedule size required")
            for size, idx in zip(self.schedule.sizes, self.subset_indices):
                if idx.shape != (size,):
                    raise InvalidInputError(
                        f"index list for size {size} has shape {idx.shape}"
                    )


def training_schedule(n: int, m: int = 4) -> SubsetSchedule | None:
    """Subset sizes used during training: m sizes ceil(k*n/m), k = 1..m.

    Small batches collapse to the distinct sizes in {2, ..., n}; returns None
    when fewer than two distinct sizes exist.
    """
    if n < 2:
        return None
    if n < 4:
        sizes = tuple(range(2, n + 1))
    else:
        sizes = tuple(sorted({max(2, math.ceil(k * n / m)) for k in range(1, m + 1)}))
    if len(sizes) < 2:
        return None
    return SubsetSchedule(sizes)


def make_batch_pair(
    z: PointCloud,
    y: PointCloud,
    rng: np.random.Generator,
    schedule: SubsetSchedule | None = None,
    schedule_m: int = 4,
) -> BatchPair:
    """Pair a feature batch with targets and draw one subset per schedule size.

    Subsets are drawn independently (not nested), uniformly without
    replacement, and shared between z and y.
    """
    if schedule is None:
        schedule = training_schedule(z.n, m=schedule_m)
    if schedule is None:
        return BatchPair(z=z, y=y, schedule=None, subset_indices=())
    indices = tuple(rng.choice(z.n, size=s, replace=False) for s in schedule.sizes)
    return BatchPair(z=z, y=y, schedule=schedule, subset_indices=indices)


def _subset_energies(
    points: np.ndarray, subset_indices: tuple[np.ndarray, ...]
) -> tuple[list[float], list[tuple[np.ndarray, np.ndarray, np.ndarray]]]:
    """Total MST length per subset plus the edge data needed for gradients.

    Returns (energies, edge_info) where edge_info[k] = (rows_a, rows_b,
    lengths) with rows already mapped back to batch row indices.
    """
    energies = []
    edge_info = []
    for idx in subset_indices:
        ea, eb, lengths, total = _mst_condensed(pdist(points[idx]), idx.size)
        energies.append(total)
        edge_info.append((idx[ea], idx[eb], lengths))
    return energies, edge_info


def _accumulate_edge_grads(
    grad: np.ndarray,
    z: np.ndarray,
    rows_a: np.ndarray,
    rows_b: np.ndarray,
    lengths: np.ndarray,
    coeffs: np.ndarray,
) -> None:
    """Add coeff * d(length)/dz for each edge; zero-length edges are skipped."""
    ok = lengths > 0.0
    if not np.any(ok):
        return
    a = rows_a[ok]
    b = rows_b[ok]
    unit = (z[a] - z[b]) / lengths[ok, None]
    contrib = np.asarray(coeffs)[ok, None] * unit
    np.add.at(grad, a, contrib)
    np.add.at(grad, b, -contrib)


def _slope_coefficients(log_sizes: np.ndarray) -> np.ndarray:
    # slope = sum_i c_i * y_i with c_i = (m*x_i - Sx) / (m*Sxx - Sx^2)
    m = log_sizes.size
    sx = log_sizes.sum()
    denom = m * np.sum(log_sizes**2) - sx**2
    return (m * log_sizes - sx) / denom


def _require_schedule(batch: BatchPair) -> SubsetSchedule:
    if batch.schedule is None:
        raise DegenerateInputError(
            "batch has fewer than two distinct subset sizes; slope losses undefined"
        )
    return batch.schedule


def loss_ld_prime(batch: BatchPair) -> RegularizerOutput:
    """Raw growth-rate slope of the feature cloud (no target term).

    value = ls_slope(log n_i, log E(Z_{n_i})).
    """
    global _LOSS_CALLS
    _LOSS_CALLS += 1
    schedule = _require_schedule(batch)

    z = batch.z.data
    energies, edge_info = _subset_energies(z, batch.subset_indices)
    for size, e in zip(schedule.sizes, energies):
        if e <= 0.0:
            raise DegenerateInputError(
                f"E(Z) = 0 for subset of size {size}; all subset points coincide"
            )

    log_sizes = np.log(np.array(schedule.sizes, dtype=np.float64))
    value = ls_slope(log_sizes, np.log(energies))

    coeffs = _slope_coefficients(log_sizes)
    grad = np.zeros_like(z)
    for c, e, (rows_a, rows_b, lengths) in zip(coeffs, energies, edge_info):
        # d slope / d length = c_i / E_i per edge of subset i
        per_edge = np.full(lengths.shape, c / e)
        _accumulate_edge_grads(grad, z, rows_a, rows_b, lengths, per_edge)
    return RegularizerOutput(value=value, grad_z=grad)


def loss_ld(batch: BatchPair) -> RegularizerOutput:
    """Absolute slope of e_i = log E(Z_{n_i}) / log E(Y_{n_i}) against log n.

    Zero exactly when the feature and target growth curves are proportional,
    in particular when Z = Y on shared subsets. Gradient flows through Z only.
    """
    global _LOSS_CALLS
    _LOSS_CALLS += 1
    schedule = _require_schedule(batch)

    z = batch.z.data
    energies_z, edge_info = _subset_energies(z, batch.subset_indices)
    energies_y, _ = _subset_energies(batch.y.data, batch.subset_indices)

    log_e_y = []
    for size, ez, ey in zip(schedule.sizes, energies_z, energies_y):
        if ez <= 0.0:
            raise DegenerateInputError(
                f"E(Z) = 0 for subset of size {size}; all subset points coincide"
            )
        if ey <= 0.0:
            raise DegenerateInputError(
                f"E(Y) = 0 for subset of size {size}; target subset has no extent"
            )
        ley = math.log(ey)
        if abs(ley) < EPS_LOG_TARGET:
            raise DegenerateTargetError(subset_size=size, log_e_value=ley)
        log_e_y.append(ley)

    log_sizes = np.log(np.array(schedule.sizes, dtype=np.float64))
    ratios = np.log(energies_z) / np.array(log_e_y)
    slope = ls_slope(log_sizes, ratios)
    value = abs(slope)
    sign = 0.0 if slope == 0.0 else math.copysign(1.0, slope)

    coeffs = _slope_coefficients(log_sizes)
    grad = np.zeros_like(z)
    for c, ez, ley, (rows_a, rows_b, lengths) in zip(
        coeffs, energies_z, log_e_y, edge_info
    ):
        per_edge = np.full(lengths.shape, sign * c / (ley * ez))
        _accumulate_edge_grads(grad, z, rows_a, rows_b, lengths, per_edge)
    return RegularizerOutput(value=value, grad_z=grad)


def loss_lt(batch: BatchPair) -> RegularizerOutput:
    """Topology-matching loss over MST-selected distance-matrix entries.

    With A^Z, A^Y the distance matrices of the full batch and pi^Z, pi^Y the
    MST edge index sets of each space, the value is the squared mismatch of
    the selected entries, each term averaged over its n-1 edges:

        value = mean((A^Z - A^Y)[pi^Z]^2) + mean((A^Z - A^Y)[pi^Y]^2)

    The per-edge mean keeps the loss magnitude comparable across batch sizes,
    so one trade-off weight serves every n_m and a larger batch acts as a
    better geometry estimate rather than a stronger penalty. Both terms
    differentiate through A^Z with the index sets held fixed.
    """
    global _LOSS_CALLS
    _LOSS_CALLS += 1
    if batch.z.n < 2:
        raise InvalidInputError("topology loss needs at least 2 points")

    z = batch.z.data
    n = batch.z.n
    w_z = pdist(z)
    w_y = pdist(batch.y.data)
    dm_z = squareform(w_z)
    dm_y = squareform(w_y)

    value = 0.0
    grad = np.zeros_like(z)
    for w_source in (w_z, w_y):
        a, b, _, _ = _mst_condensed(w_source, n)
        dz = dm_z[a, b]
        dy = dm_y[a, b]
        diff = dz - dy
        value += float(np.mean(diff**2))
        _accumulate_edge_grads(grad, z, a, b, dz, 2.0 * diff / diff.size)
    return RegularizerOutput(value=value, grad_z=grad)


def combined_loss(
    batch: BatchPair,
    lambda_d: float,
    lambda_t: float,
    variant: str = "ld",
) -> RegularizerOutput:
    """Weighted sum lambda_t * L_t + lambda_d * L_{d-variant}.

    The task loss is not included here; the network module adds it. A term
    with zero weight is skipped entirely, so e.g. lambda_d = 0 reproduces the
    topology loss alone, exactly scaled.
    """
    if lambda_d < 0 or lambda_t < 0:
        raise InvalidInputError("loss weights must be non-negative")
    if variant not in ("ld", "ld_prime"):
        raise InvalidInputError(f"unknown dimension-loss variant {variant!r}")

    value = 0.0
    grad = np.zeros_like(batch.z.data)
    if lambda_t != 0.0:
        part = loss_lt(batch)
        value += lambda_t * part.value
        grad += lambda_t * part.grad_z
    if lambda_d != 0.0:
        part = loss_ld(batch) if variant == "ld" else loss_ld_prime(batch)
        value += lambda_d * part.value
        grad += lambda_d * part.grad_z
    return RegularizerOutput(value=value, grad_z=grad)
