"""The three differentiable losses on toy feature/target batches.

loss_ld_prime: raw MST growth-rate slope of the features (lower = lower
intrinsic dimension). loss_ld: absolute slope of log E(Z_n)/log E(Y_n),
zero when feature and target growth agree. loss_lt: squared mismatch of
MST-selected distance-matrix entries between the two spaces.
"""

import numpy as np

from phreg import PointCloud, combined_loss, loss_ld, loss_ld_prime, loss_lt, make_batch_pair
from phreg.regularizers import BatchPair

rng = np.random.default_rng(0)

y = rng.normal(size=(60, 3))           # targets: a 3-d cloud
z_same = y.copy()                      # features identical to targets
z_flat = np.column_stack([y[:, 0], y[:, 1], np.zeros(60)])  # squashed to a plane
z_rand = rng.normal(size=(60, 3))      # unrelated features

for name, z in (("Z = Y", z_same), ("Z = flattened Y", z_flat), ("Z random", z_rand)):
    batch = make_batch_pair(PointCloud(z), PointCloud(y), np.random.default_rng(1))
    print(f"{name:18s} L'_d {loss_ld_prime(batch).value:8.4f}   "
          f"L_d {loss_ld(batch).value:8.4f}   L_t {loss_lt(batch).value:10.4f}")

# the combined loss is a plain weighted sum
batch = make_batch_pair(PointCloud(z_rand), PointCloud(y), np.random.default_rng(2))
combined = combined_loss(batch, lambda_d=10.0, lambda_t=100.0)
print(f"\ncombined (10 L_d + 100 L_t) = {combined.value:.4f}")
print(f"  = 10 * {loss_ld(batch).value:.4f} + 100 * {loss_lt(batch).value:.4f}")

# gradients are exact away from MST ties: central finite-difference check
z = rng.normal(size=(10, 3))
batch = make_batch_pair(PointCloud(z), PointCloud(rng.normal(size=(10, 3))),
                        np.random.default_rng(3))
out = loss_lt(batch)
h = 1e-5
numeric = np.zeros_like(z)
for i in range(10):
    for j in range(3):
        zp = z.copy(); zp[i, j] += h
        zm = z.copy(); zm[i, j] -= h
        up = loss_lt(BatchPair(PointCloud(zp), batch.y, batch.schedule, batch.subset_indices))
        dn = loss_lt(BatchPair(PointCloud(zm), batch.y, batch.schedule, batch.subset_indices))
        numeric[i, j] = (up.value - dn.value) / (2 * h)
rel = np.max(np.abs(out.grad_z - numeric)) / np.max(np.abs(numeric))
print(f"\nL_t gradient vs finite differences: max relative error {rel:.2e}")
