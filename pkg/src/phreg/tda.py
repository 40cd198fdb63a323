"""Minimum spanning trees and 0-dimensional persistence.

For a finite point set the death times of the 0-dimensional persistence
intervals of the Vietoris-Rips filtration are exactly the edge lengths of a
Euclidean minimum spanning tree, and the one never-dying component is dropped.
So this module is an MST computation wearing two hats: `mst` exposes the tree,
`ph0` exposes the intervals, and `total_persistence` their summed length E(S).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import DistanceMatrix, PointCloud, pairwise_distances

__all__ = ["MstEdge", "MstResult", "mst", "ph0", "total_persistence", "mst_call_count"]

# Incremented on every mst() call; lets the harness prove that baseline runs
# never touch topology code.
_MST_CALLS = 0


def mst_call_count() -> int:
    return _MST_CALLS


def _kruskal_core_py(si: np.ndarray, sj: np.ndarray, n: int) -> np.ndarray:
    """Union-find scan over pre-sorted edges; returns positions of tree edges.

    Pure-Python twin of the jitted kernel below: same integer logic in the
    same order, so both produce identical output arrays.
    """
    parent = list(range(n))
    rank = [0] * n
    keep = np.empty(n - 1, dtype=np.int64)
    cnt = 0
    si_l = si.tolist()
    sj_l = sj.tolist()
    for k in range(len(si_l)):
        a = si_l[k]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = sj_l[k]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a == b:
            continue
        if rank[a] < rank[b]:
            a, b = b, a
        parent[b] = a
        if rank[a] == rank[b]:
            rank[a] += 1
        keep[cnt] = k
        cnt += 1
        if cnt == n - 1:
            break
    return keep[:cnt]


try:  # jitted kernel: ~50x faster inner loop, identical results
    from numba import njit as _njit

    @_njit(cache=True)
    def _kruskal_core_nb(si, sj, n):  # pragma: no cover - compiled
        parent = np.arange(n)
        rank = np.zeros(n, dtype=np.int64)
        keep = np.empty(n - 1, dtype=np.int64)
        cnt = 0
        for k in range(si.shape[0]):
            a = si[k]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = sj[k]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                continue
            if rank[a] < rank[b]:
                a, b = b, a
            parent[b] = a
            if rank[a] == rank[b]:
                rank[a] += 1
            keep[cnt] = k
            cnt += 1
            if cnt == n - 1:
                break
        return keep[:cnt]

    _kruskal_core = _kruskal_core_nb
except ImportError:  # pragma: no cover - exercised only without numba
    _kruskal_core = _kruskal_core_py


# (upper-triangle row, col) index pairs per n, reused across thousands of calls
_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    cached = _TRIU_CACHE.get(n)
    if cached is None:
        iu, ju = np.triu_indices(n, k=1)
        cached = (iu.astype(np.int64), ju.astype(np.int64))
        _TRIU_CACHE[n] = cached
    return cached


@dataclass(frozen=True)
class MstEdge:
    """A tree edge between points i < j with its Euclidean length."""

    i: int
    j: int
    length: float


@dataclass(frozen=True)
class MstResult:
    edges: tuple[MstEdge, ...]
    total_length: float


def _mst_condensed(w: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Kruskal over a condensed (upper-triangle, row-major) distance vector.

    The condensed layout is already (i, j)-lexicographic, so a stable sort by
    length alone realizes the (length, i, j) tie-break. Returns (i, j,
    lengths, total) of the tree edges.
    """
    global _MST_CALLS
    _MST_CALLS += 1

    if n == 1:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty(0), 0.0

    iu, ju = _triu_pairs(n)
    order = np.argsort(w, kind="stable")
    si = iu[order]
    sj = ju[order]
    keep = _kruskal_core(si, sj, n)
    lengths = w[order[keep]]
    return si[keep], sj[keep], lengths, float(lengths.sum())


def _mst_arrays(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Kruskal over a raw square distance matrix; returns (i, j, lengths, total)."""
    n = values.shape[0]
    if n == 1:
        global _MST_CALLS
        _MST_CALLS += 1
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty(0), 0.0
    iu, ju = _triu_pairs(n)
    return _mst_condensed(values[iu, ju], n)


def mst(dm: DistanceMatrix) -> MstResult:
    """Kruskal's algorithm with union-find (path compression, union by rank).

    Edges are processed in (length, i, j) lexicographic order, so the returned
    tree is deterministic even when lengths tie; the total weight is unique
    regardless of tie-breaking.
    """
    ei, ej, lengths, total = _mst_arrays(dm.values)
    edges = tuple(
        MstEdge(i=int(a), j=int(b), length=float(w))
        for a, b, w in zip(ei, ej, lengths)
    )
    return MstResult(edges=edges, total_length=total)


def ph0(cloud: PointCloud) -> np.ndarray:
    """0-dimensional persistence intervals of the Rips filtration.

    Returns an (n-1) x 2 array of [birth, death] rows with birth always 0 and
    deaths equal to the sorted MST edge lengths. The infinite bar of the
    component that never dies is excluded.
    """
    _, _, lengths, _ = _mst_arrays(pairwise_distances(cloud).values)
    deaths = np.sort(lengths)
    intervals = np.zeros((deaths.size, 2))
    intervals[:, 1] = deaths
    return intervals


def total_persistence(cloud: PointCloud) -> float:
    """E(S): the summed length of all finite PH0 intervals, i.e. the MST weight."""
    if cloud.n < 2:
        raise InvalidInputError("total persistence needs at least 2 points")
    return _mst_arrays(pairwise_distances(cloud).values)[3]
