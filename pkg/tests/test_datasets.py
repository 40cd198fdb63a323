import json

import numpy as np
import pytest

from phreg import (
    IngestionError,
    InvalidInputError,
    PointCloud,
    SyntheticSpec,
    encode,
    generate_dataset,
    sample_shape,
    split,
)
from phreg.datasets import (
    CIRCLE_RADIUS,
    ENCODER_MATRIX,
    SWISS_HEIGHT,
    SWISS_T_RANGE,
    TORUS_R,
    TORUS_r,
    write_dataset,
)


def _rng(seed=0):
    return np.random.default_rng(seed)


class TestShapes:
    def test_circle_defining_equation(self):
        spec = SyntheticSpec(shape="circle", total=500, splits=(100, 100, 300))
        cloud = sample_shape(spec, _rng())
        radii = cloud.data[:, 0] ** 2 + cloud.data[:, 1] ** 2
        assert np.max(np.abs(radii - CIRCLE_RADIUS**2)) < 1e-9
        assert np.all(cloud.data[:, 2] == 0.0)

    def test_torus_defining_equation(self):
        spec = SyntheticSpec(shape="torus", total=500, splits=(100, 100, 300))
        cloud = sample_shape(spec, _rng(1))
        ring = np.sqrt(cloud.data[:, 0] ** 2 + cloud.data[:, 1] ** 2)
        residual = (ring - TORUS_R) ** 2 + cloud.data[:, 2] ** 2
        assert np.max(np.abs(residual - TORUS_r**2)) < 1e-9

    def test_swiss_roll_inverts_to_in_range_parameters(self):
        spec = SyntheticSpec(shape="swiss_roll", total=400, splits=(100, 100, 200))
        cloud = sample_shape(spec, _rng(2))
        t = np.sqrt(cloud.data[:, 0] ** 2 + cloud.data[:, 2] ** 2)
        assert np.all(t >= SWISS_T_RANGE[0] - 1e-9)
        assert np.all(t <= SWISS_T_RANGE[1] + 1e-9)
        assert np.all((cloud.data[:, 1] >= 0) & (cloud.data[:, 1] <= SWISS_HEIGHT))
        # the parametrization reproduces the ambient coordinates
        assert np.max(np.abs(t * np.cos(t) - cloud.data[:, 0])) < 1e-9
        assert np.max(np.abs(t * np.sin(t) - cloud.data[:, 2])) < 1e-9

    def test_requested_count(self):
        spec = SyntheticSpec(shape="torus", total=123, splits=(41, 41, 41))
        assert sample_shape(spec, _rng(3)).n == 123

    def test_deterministic_per_seed(self):
        spec = SyntheticSpec(shape="swiss_roll", total=200, splits=(50, 50, 100))
        a = sample_shape(spec, _rng(7)).data
        b = sample_shape(spec, _rng(7)).data
        assert np.array_equal(a, b)


class TestMammoth:
    def test_ingestion_and_downsampling(self, tmp_path):
        points = _rng(0).normal(size=(500, 3))
        path = tmp_path / "mammoth.csv"
        np.savetxt(path, points, delimiter=",")
        spec = SyntheticSpec(
            shape="mammoth", total=300, splits=(100, 100, 100), mammoth_path=str(path)
        )
        cloud = sample_shape(spec, _rng(1))
        assert cloud.n == 300
        # every sampled row exists in the source
        source_rows = {tuple(np.round(r, 12)) for r in points}
        assert all(tuple(np.round(r, 12)) in source_rows for r in cloud.data)

    def test_too_small_file_rejected(self, tmp_path):
        path = tmp_path / "small.csv"
        np.savetxt(path, _rng(0).normal(size=(10, 3)), delimiter=",")
        spec = SyntheticSpec(
            shape="mammoth", total=300, splits=(100, 100, 100), mammoth_path=str(path)
        )
        with pytest.raises(IngestionError):
            sample_shape(spec, _rng(0))

    def test_missing_file_rejected(self):
        spec = SyntheticSpec(
            shape="mammoth", total=300, splits=(100, 100, 100), mammoth_path="/no/file.csv"
        )
        with pytest.raises(IngestionError):
            sample_shape(spec, _rng(0))

    def test_wrong_dimensionality_rejected(self, tmp_path):
        path = tmp_path / "flat.csv"
        np.savetxt(path, _rng(0).normal(size=(400, 2)), delimiter=",")
        spec = SyntheticSpec(
            shape="mammoth", total=300, splits=(100, 100, 100), mammoth_path=str(path)
        )
        with pytest.raises(IngestionError):
            sample_shape(spec, _rng(0))

    def test_path_required(self):
        with pytest.raises(InvalidInputError):
            SyntheticSpec(shape="mammoth", total=300, splits=(100, 100, 100))


class TestEncode:
    def test_signal_formulas(self):
        targets = PointCloud([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])
        encoded = encode(targets, _rng(0))
        assert np.array_equal(encoded.x[0, :4], [3.0, 1.0, 1.0, 1.0])
        assert np.array_equal(encoded.x[1, :4], [0.0, 0.0, 0.0, 0.0])
        assert np.array_equal(encoded.x[2, :4], [6.0, 0.0, 2.0, 4.0])

    def test_signal_dims_decode_targets_exactly(self):
        targets = PointCloud(_rng(1).normal(size=(50, 3)))
        encoded = encode(targets, _rng(2))
        recovered, *_ = np.linalg.lstsq(ENCODER_MATRIX, encoded.x[:, :4].T, rcond=None)
        assert np.max(np.abs(recovered.T - targets.data)) < 1e-12

    def test_encoder_matrix_full_column_rank(self):
        assert np.linalg.matrix_rank(ENCODER_MATRIX) == 3

    def test_noise_never_references_own_row(self):
        targets = PointCloud(_rng(3).normal(size=(30, 3)))
        encoded = encode(targets, _rng(4))
        sources = encoded.noise_assignment[:, :, 1]
        rows = np.arange(30)[:, None]
        assert np.all(sources != rows)

    def test_noise_values_match_assignment_record(self):
        targets = PointCloud(_rng(5).normal(size=(20, 3)))
        encoded = encode(targets, _rng(6))
        signals = targets.data @ ENCODER_MATRIX.T
        for i in (0, 7, 19):
            for c in (0, 50, 95):
                k, j = encoded.noise_assignment[i, c]
                assert encoded.x[i, 4 + c] == signals[j, k]

    def test_shapes(self):
        targets = PointCloud(_rng(7).normal(size=(10, 3)))
        encoded = encode(targets, _rng(8))
        assert encoded.x.shape == (10, 100)
        assert encoded.y.shape == (10, 3)
        assert encoded.noise_assignment.shape == (10, 96, 2)

    def test_single_row_rejected(self):
        with pytest.raises(InvalidInputError):
            encode(PointCloud([[1.0, 2.0, 3.0]]), _rng(0))


class TestSplit:
    def test_disjoint_and_exhaustive(self):
        spec = SyntheticSpec(shape="circle", total=300, splits=(60, 40, 200))
        dataset, _ = generate_dataset(spec)
        idx = split(dataset, spec, _rng(0))
        assert len(idx.train) == 60 and len(idx.val) == 40 and len(idx.test) == 200
        combined = np.concatenate([idx.train, idx.val, idx.test])
        assert sorted(combined.tolist()) == list(range(300))

    def test_same_seed_same_partition(self):
        spec = SyntheticSpec(shape="circle", total=200, splits=(50, 50, 100))
        dataset, _ = generate_dataset(spec)
        a = split(dataset, spec, _rng(9))
        b = split(dataset, spec, _rng(9))
        assert np.array_equal(a.train, b.train)
        assert np.array_equal(a.val, b.val)
        assert np.array_equal(a.test, b.test)

    def test_paper_sizes(self):
        spec = SyntheticSpec(shape="swiss_roll")
        assert spec.splits == (100, 100, 2800)
        _, idx = generate_dataset(spec)
        assert len(idx.train) == 100 and len(idx.val) == 100 and len(idx.test) == 2800

    def test_mismatched_totals_rejected(self):
        with pytest.raises(InvalidInputError):
            SyntheticSpec(shape="circle", total=100, splits=(50, 50, 100))


class TestGeneration:
    def test_bitwise_deterministic(self):
        spec = SyntheticSpec(shape="torus", total=200, splits=(50, 50, 100), seed=11)
        d1, i1 = generate_dataset(spec)
        d2, i2 = generate_dataset(spec)
        assert np.array_equal(d1.x, d2.x)
        assert np.array_equal(d1.y, d2.y)
        assert np.array_equal(d1.noise_assignment, d2.noise_assignment)
        assert np.array_equal(i1.train, i2.train)

    def test_write_dataset_files(self, tmp_path):
        spec = SyntheticSpec(shape="circle", total=150, splits=(40, 40, 70), seed=3)
        dataset, indices = generate_dataset(spec)
        write_dataset(spec, dataset, indices, tmp_path)
        x = np.loadtxt(tmp_path / "inputs.csv", delimiter=",")
        y = np.loadtxt(tmp_path / "targets.csv", delimiter=",")
        assert x.shape == (150, 100)
        assert y.shape == (150, 3)
        splits = json.loads((tmp_path / "splits.json").read_text())
        assert sorted(splits) == ["test", "train", "val"]
        meta = json.loads((tmp_path / "meta.json").read_text())
        assert meta["shape"] == "circle"
        assert len(meta["noise_assignment_sha256"]) == 64
