"""Independent reference computations the tests check the library against.

Nothing in here imports from phreg's implementation paths: distances come
from an explicit double loop, minimum spanning trees from exhaustive
enumeration of all labeled trees via Prufer sequences, and gradients from
central finite differences of the loss values.
"""

from __future__ import annotations

import numpy as np


def brute_pairwise(points: np.ndarray) -> np.ndarray:
    n = points.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = np.sqrt(np.sum((points[i] - points[j]) ** 2))
    return out


def prufer_min_tree_weight(dm: np.ndarray) -> float:
    """Exhaustive minimum total weight over all n^(n-2) labeled spanning trees.

    Decodes every Prufer sequence at once with vectorized numpy: degree
    bookkeeping per sequence, always joining the smallest degree-1 node to the
    current sequence entry.
    """
    n = dm.shape[0]
    if n < 2:
        return 0.0
    if n == 2:
        return float(dm[0, 1])

    grids = np.meshgrid(*([np.arange(n)] * (n - 2)), indexing="ij")
    seqs = np.stack(grids, axis=-1).reshape(-1, n - 2)
    s = seqs.shape[0]
    rows = np.arange(s)
    ids = np.arange(n)

    deg = np.ones((s, n), dtype=np.int64)
    for k in range(n - 2):
        deg[rows, seqs[:, k]] += 1

    total = np.zeros(s)
    for k in range(n - 2):
        v = seqs[:, k]
        leaf = np.where(deg == 1, ids, n).min(axis=1)
        total += dm[leaf, v]
        deg[rows, leaf] -= 1
        deg[rows, v] -= 1

    remaining = np.where(deg == 1, ids, n)
    a = remaining.min(axis=1)
    remaining[rows, a] = n
    b = remaining.min(axis=1)
    total += dm[a, b]
    return float(total.min())


def fd_gradient(value_fn, z: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function of a point array."""
    grad = np.zeros_like(z)
    for i in range(z.shape[0]):
        for j in range(z.shape[1]):
            zp = z.copy()
            zp[i, j] += h
            zm = z.copy()
            zm[i, j] -= h
            grad[i, j] = (value_fn(zp) - value_fn(zm)) / (2.0 * h)
    return grad


def max_rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(numeric))), 1e-12)
    return float(np.max(np.abs(analytic - numeric))) / scale


def tie_free_cloud(
    rng: np.random.Generator, n: int, d: int, gap: float = 1e-4
) -> np.ndarray:
    """Random cloud whose pairwise distances are separated by more than `gap`
    and bounded away from zero, so MST edge selection is locally constant."""
    for _ in range(1000):
        points = rng.normal(size=(n, d))
        dists = np.sort(
            np.array(
                [
                    np.linalg.norm(points[i] - points[j])
                    for i in range(n)
                    for j in range(i + 1, n)
                ]
            )
        )
        if dists[0] > 10 * gap and np.min(np.diff(dists)) > gap:
            return points
    raise RuntimeError("could not build a tie-free configuration")
