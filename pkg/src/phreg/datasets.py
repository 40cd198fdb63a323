"""Synthetic coordinate-prediction datasets.

Targets y are 3-D points sampled from one of four shapes (Swiss roll, torus,
circle, or an ingested "mammoth" point cloud). Each target is encoded into a
100-dimensional input whose first four dimensions are signed coordinate sums
of the point's own target and whose remaining 96 dimensions apply the same
four encoders to randomly chosen *other* rows, i.e. structured noise drawn
from the same distribution as the signal.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IngestionError, InvalidInputError
from .geometry import PointCloud, load_cloud_csv

__all__ = [
    "SyntheticSpec",
    "EncodedDataset",
    "SplitIndices",
    "SHAPES",
    "sample_shape",
    "encode",
    "split",
    "generate_dataset",
    "write_dataset",
]

SHAPES = ("swiss_roll", "torus", "circle", "mammoth")

INPUT_DIM = 100
N_SIGNAL = 4

# Signal encoders as a matrix: row k gives the coefficients of f_{k+1} on
# (y1, y2, y3). The 4x3 system has full column rank, so the four signal
# dimensions determine y exactly.
ENCODER_MATRIX = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0],
        [1.0, -1.0, 1.0],
        [-1.0, 1.0, 1.0],
    ]
)

SWISS_T_RANGE = (1.5 * np.pi, 4.5 * np.pi)
SWISS_HEIGHT = 21.0
TORUS_R = 2.0
TORUS_r = 1.0
CIRCLE_RADIUS = 1.0


@dataclass(frozen=True)
class SyntheticSpec:
    """Declarative description of one dataset draw."""

    shape: str
    total: int = 3000
    splits: tuple[int, int, int] = (100, 100, 2800)
    seed: int = 0
    mammoth_path: str | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InvalidInputError(f"unknown shape {self.shape!r}; choose from {SHAPES}")
        if sum(self.splits) != self.total:
            raise InvalidInputError(
                f"splits {self.splits} sum to {sum(self.splits)}, expected total={self.total}"
            )
        if any(s < 1 for s in self.splits):
            raise InvalidInputError("every split must hold at least one sample")
        if self.shape == "mammoth" and not self.mammoth_path:
            raise InvalidInputError("mammoth requires mammoth_path")


@dataclass(frozen=True)
class EncodedDataset:
    """Inputs, targets, and the record of how every noise entry was built.

    noise_assignment has shape (n, 96, 2): per row and noise dimension, the
    encoder index in 0..3 and the source-row index (never the row itself).
    """

    x: np.ndarray
    y: np.ndarray
    noise_assignment: np.ndarray


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def _sample_swiss_roll(n: int, rng: np.random.Generator) -> np.ndarray:
    t = rng.uniform(*SWISS_T_RANGE, size=n)
    height = rng.uniform(0.0, SWISS_HEIGHT, size=n)
    return np.column_stack([t * np.cos(t), height, t * np.sin(t)])


def _sample_torus(n: int, rng: np.random.Generator) -> np.ndarray:
    # Area-uniform sampling: the tube angle has density proportional to
    # R + r*cos(theta), handled by rejection.
    u = rng.uniform(0.0, 2.0 * np.pi, size=n)
    theta = np.empty(n)
    filled = 0
    while filled < n:
        cand = rng.uniform(0.0, 2.0 * np.pi, size=2 * (n - filled))
        accept = rng.uniform(0.0, 1.0, size=cand.size) < (
            (TORUS_R + TORUS_r * np.cos(cand)) / (TORUS_R + TORUS_r)
        )
        good = cand[accept][: n - filled]
        theta[filled : filled + good.size] = good
        filled += good.size
    ring = TORUS_R + TORUS_r * np.cos(theta)
    return np.column_stack([ring * np.cos(u), ring * np.sin(u), TORUS_r * np.sin(theta)])


def _sample_circle(n: int, rng: np.random.Generator) -> np.ndarray:
    angle = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return np.column_stack(
        [CIRCLE_RADIUS * np.cos(angle), CIRCLE_RADIUS * np.sin(angle), np.zeros(n)]
    )


def _sample_mammoth(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    try:
        cloud = load_cloud_csv(spec.mammoth_path)
    except InvalidInputError as exc:
        raise IngestionError(str(exc)) from exc
    if cloud.d != 3:
        raise IngestionError(f"mammoth file must hold 3-D points, got d={cloud.d}")
    if cloud.n < spec.total:
        raise IngestionError(
            f"mammoth file has {cloud.n} points, need at least {spec.total}"
        )
    indices = rng.choice(cloud.n, size=spec.total, replace=False)
    return np.array(cloud.data[indices])


def sample_shape(spec: SyntheticSpec, rng: np.random.Generator) -> PointCloud:
    """Draw spec.total target points from the named shape, embedded in 3-D."""
    if spec.shape == "swiss_roll":
        points = _sample_swiss_roll(spec.total, rng)
    elif spec.shape == "torus":
        points = _sample_torus(spec.total, rng)
    elif spec.shape == "circle":
        points = _sample_circle(spec.total, rng)
    else:
        points = _sample_mammoth(spec, rng)
    return PointCloud(points)


def encode(targets: PointCloud, rng: np.random.Generator) -> EncodedDataset:
    """Encode 3-D targets into 100-D inputs: 4 signal dims + 96 noise dims.

    Noise entry (i, k) applies a uniformly drawn encoder to a uniformly drawn
    other row j != i; the (encoder, source) pair is recorded per entry.
    """
    if targets.d != 3:
        raise InvalidInputError(f"targets must be 3-D points, got d={targets.d}")
    n = targets.n
    if n < 2:
        raise InvalidInputError("encoding needs n >= 2 to draw noise sources j != i")

    y = targets.data
    signals = y @ ENCODER_MATRIX.T  # (n, 4)

    n_noise = INPUT_DIM - N_SIGNAL
    encoder_idx = rng.integers(0, N_SIGNAL, size=(n, n_noise))
    # uniform over the n-1 rows other than i
    source_idx = rng.integers(0, n - 1, size=(n, n_noise))
    rows = np.arange(n)[:, None]
    source_idx = np.where(source_idx >= rows, source_idx + 1, source_idx)

    all_encoded = signals  # f_k(y_j) for any j is just signals[j, k]
    noise = all_encoded[source_idx, encoder_idx]

    x = np.concatenate([signals, noise], axis=1)
    assignment = np.stack([encoder_idx, source_idx], axis=2)
    return EncodedDataset(x=x, y=np.array(y), noise_assignment=assignment)


def split(dataset: EncodedDataset, spec: SyntheticSpec, rng: np.random.Generator) -> SplitIndices:
    """Seeded shuffle into disjoint train/val/test index sets."""
    n = dataset.x.shape[0]
    if n != spec.total:
        raise InvalidInputError(f"dataset has {n} rows but spec.total={spec.total}")
    perm = rng.permutation(n)
    n_train, n_val, _ = spec.splits
    return SplitIndices(
        train=perm[:n_train],
        val=perm[n_train : n_train + n_val],
        test=perm[n_train + n_val :],
    )


def generate_dataset(spec: SyntheticSpec) -> tuple[EncodedDataset, SplitIndices]:
    """Full pipeline from spec to encoded, split dataset; bitwise-deterministic."""
    rng = np.random.default_rng(spec.seed)
    targets = sample_shape(spec, rng)
    dataset = encode(targets, rng)
    indices = split(dataset, spec, rng)
    return dataset, indices


def write_dataset(
    spec: SyntheticSpec, dataset: EncodedDataset, indices: SplitIndices, out_dir: str | Path
) -> None:
    """Write targets.csv, inputs.csv, splits.json and meta.json to a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "targets.csv", dataset.y, delimiter=",", fmt="%.17g")
    np.savetxt(out / "inputs.csv", dataset.x, delimiter=",", fmt="%.17g")
    with open(out / "splits.json", "w") as fh:
        json.dump(
            {
                "train": indices.train.tolist(),
                "val": indices.val.tolist(),
                "test": indices.test.tolist(),
            },
            fh,
        )
    digest = hashlib.sha256(
        np.ascontiguousarray(dataset.noise_assignment).tobytes()
    ).hexdigest()
    meta = {
        "shape": spec.shape,
        "total": spec.total,
        "splits": list(spec.splits),
        "seed": spec.seed,
        "mammoth_path": spec.mammoth_path,
        "noise_assignment_sha256": digest,
    }
    with open(out / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
