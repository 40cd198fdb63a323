"""Intrinsic dimension estimation on known manifolds.

Two estimators: the MST growth-rate slope (total tree length of uniform
d-dimensional data grows like n^((d-1)/d), so d = 1/(1-slope)) and TwoNN
(the ratio of second- to first-neighbor distances is Pareto(d)). Both are
scale-invariant and should recover the dimension of simple shapes.
"""

import numpy as np

from phreg import PointCloud, ph_dim_birdal, twonn

rng = np.random.default_rng(7)

clouds = {
    "segment (d=1)": rng.uniform(size=(1000, 1)),
    "square (d=2)": rng.uniform(size=(1000, 2)),
    "cube (d=3)": rng.uniform(size=(1000, 3)),
}

# a 2-d surface embedded in 3-d: both estimators should still say ~2
t = rng.uniform(1.5 * np.pi, 4.5 * np.pi, size=1000)
h = rng.uniform(0, 21, size=1000)
clouds["swiss roll surface (d=2, ambient 3)"] = np.column_stack(
    [t * np.cos(t), h, t * np.sin(t)]
)

print(f"{'cloud':40s} {'birdal slope':>12s} {'birdal dim':>11s} {'twonn dim':>10s}")
for name, points in clouds.items():
    cloud = PointCloud(points)
    b = ph_dim_birdal(cloud, rng=np.random.default_rng(0))
    t2 = twonn(cloud)
    print(f"{name:40s} {b.slope:12.3f} {b.dimension:11.3f} {t2.dimension:10.3f}")

# scale invariance: dimension is unchanged under uniform scaling
cloud = PointCloud(clouds["square (d=2)"])
big = PointCloud(1000.0 * cloud.data)
print("\nscale invariance (square x1000):",
      ph_dim_birdal(cloud, rng=np.random.default_rng(1)).dimension,
      "vs", ph_dim_birdal(big, rng=np.random.default_rng(1)).dimension)
