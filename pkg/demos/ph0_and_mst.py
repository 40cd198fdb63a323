"""Zero-dimensional persistence from minimum spanning trees.

For a finite point cloud, the 0-dimensional persistence intervals of the
Vietoris-Rips filtration are [0, death] with deaths equal to the MST edge
lengths: components merge exactly when the filtration radius reaches the
next tree edge. This script walks through that identification.
"""

import numpy as np

from phreg import PointCloud, mst, pairwise_distances, ph0, total_persistence

# three collinear points: the tree is forced, deaths are the two gaps
cloud = PointCloud([[0.0], [1.0], [3.0]])
result = mst(pairwise_distances(cloud))
print("collinear 0, 1, 3")
for e in result.edges:
    print(f"  edge ({e.i}, {e.j})  length {e.length}")
print(f"  total length E = {result.total_length}")
print(f"  ph0 intervals:\n{ph0(cloud)}\n")

# a random planar cloud: deaths are always the sorted MST edge lengths
rng = np.random.default_rng(0)
cloud = PointCloud(rng.uniform(size=(12, 2)))
intervals = ph0(cloud)
lengths = sorted(e.length for e in mst(pairwise_distances(cloud)).edges)
print("random cloud, n=12: max |death - edge length| =",
      np.max(np.abs(intervals[:, 1] - lengths)))

# E is homogeneous of degree 1 under scaling and invariant under rotation
e1 = total_persistence(cloud)
e3 = total_persistence(PointCloud(3.0 * cloud.data))
q, _ = np.linalg.qr(rng.normal(size=(2, 2)))
er = total_persistence(PointCloud(cloud.data @ q.T))
print(f"E = {e1:.6f},  E(3x) = {e3:.6f}  (ratio {e3/e1:.6f}),  E(rotated) = {er:.6f}")

# unit square: ties are broken deterministically, weight is still unique
square = PointCloud([[0, 0], [1, 0], [0, 1], [1, 1]])
print("\nunit square MST edges (deterministic under ties):")
for e in mst(pairwise_distances(square)).edges:
    print(f"  ({e.i}, {e.j})  length {e.length}")
