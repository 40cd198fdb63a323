"""Config-driven experiment runner for the synthetic coordinate-prediction task.

A run trains the 2-layer MLP on one synthetic dataset per seed, optionally
adding the topology/dimension regularizers to the task loss, selects the
checkpoint with the best validation MSE, and reports test MSE aggregated over
seeds. Seeds are independent: each one regenerates its own dataset draw and
its own training randomness, so runs are reproducible seed by seed and may
execute in parallel worker processes without changing any result.

Reports split into a deterministic results section (byte-stable across runs
of the same build) and a profiling section (wall-clock and memory, by nature
not byte-stable).
"""

from __future__ import annotations

import csv
import json
import resource
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import regularizers, tda
from .datasets import SplitIndices, SyntheticSpec, generate_dataset
from .errors import InvalidInputError
from .geometry import PointCloud
from .id_estimation import twonn
from .nn import (
    AdamWState,
    MlpModel,
    adamw_step,
    backward,
    forward,
    init_model,
    mse_loss,
)
from .regularizers import combined_loss, make_batch_pair

__all__ = [
    "VARIANTS",
    "LAMBDA_PRESETS",
    "ExperimentConfig",
    "SeedResult",
    "MetricsReport",
    "DataBundle",
    "run_experiment",
    "track_id",
    "dump_embeddings",
    "measure_epoch_overhead",
]

VARIANTS = ("baseline", "ld_prime", "ld", "lt", "ld_plus_lt")

# Per-shape trade-off weights: (lambda_d, lambda_t).
LAMBDA_PRESETS = {
    "swiss_roll": (10.0, 100.0),
    "torus": (1.0, 100.0),
    "circle": (1.0, 100.0),
    "mammoth": (1.0, 10000.0),
}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: SyntheticSpec
    variant: str = "baseline"
    lambda_d: float | None = None  # None -> shape preset
    lambda_t: float | None = None
    epochs: int = 10000
    lr: float = 1e-3
    weight_decay: float = 0.01
    n_m: int | None = None  # None -> train-split size
    schedule_m: int = 4
    seeds: tuple[int, ...] = (0,)
    hidden: int = 100
    feature_dim: int | None = None  # overrides hidden width
    # pre-activation features give the topology losses a linear image of the
    # input to act on; through the ReLU mask their gradient cannot align w1
    feature_layer: str = "pre_act"
    # train in per-dimension standardized coordinates (an affine
    # homeomorphism: the topology/ID the regularizers act on is unchanged);
    # metrics are reported in raw units and the returned model is raw-facing
    standardize: bool = True
    track_id_every: int | None = None
    record_loss_trace: bool = False  # per-epoch validation MSE, raw units
    dump_embeddings_csv: bool = False
    workers: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.epochs < 1:
            raise InvalidInputError("epochs must be >= 1")
        if not self.seeds:
            raise InvalidInputError("at least one seed required")
        if self.lambda_d is not None and self.lambda_d < 0:
            raise InvalidInputError("lambda_d must be >= 0")
        if self.lambda_t is not None and self.lambda_t < 0:
            raise InvalidInputError("lambda_t must be >= 0")
        if self.track_id_every is not None and self.track_id_every < 1:
            raise InvalidInputError("track_id_every must be >= 1")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def effective_lambdas(self) -> tuple[float, float]:
        """(lambda_d, lambda_t) actually applied, given variant and presets."""
        preset_d, preset_t = LAMBDA_PRESETS[self.dataset.shape]
        lam_d = preset_d if self.lambda_d is None else self.lambda_d
        lam_t = preset_t if self.lambda_t is None else self.lambda_t
        if self.variant == "baseline":
            return 0.0, 0.0
        if self.variant in ("ld", "ld_prime"):
            return lam_d, 0.0
        if self.variant == "lt":
            return 0.0, lam_t
        return lam_d, lam_t


@dataclass
class SeedResult:
    seed: int
    test_mse: float | None = None
    best_val_mse: float | None = None
    best_epoch: int | None = None
    final_train_mse: float | None = None
    id_trace: list[tuple[int, float]] | None = None
    loss_trace: list[float] | None = None
    error: str | None = None
    # profiling (excluded from the deterministic report section)
    seconds_per_epoch: float = 0.0
    reg_seconds_per_epoch: float = 0.0
    peak_rss_mb: float = 0.0
    regularizer_calls: int = 0
    mst_calls: int = 0


@dataclass
class MetricsReport:
    config: dict
    per_seed: list[SeedResult]
    mean_test_mse: float | None
    std_test_mse: float | None
    complete: bool

    def results_dict(self) -> dict:
        """Deterministic section: identical configs give identical bytes."""
        return {
            "config": self.config,
            "per_seed": [
                {
                    "seed": r.seed,
                    "test_mse": r.test_mse,
                    "best_val_mse": r.best_val_mse,
                    "best_epoch": r.best_epoch,
                    "final_train_mse": r.final_train_mse,
                    "id_trace": r.id_trace,
                    "loss_trace": r.loss_trace,
                    "error": r.error,
                }
                for r in self.per_seed
            ],
            "mean_test_mse": self.mean_test_mse,
            "std_test_mse": self.std_test_mse,
            "complete": self.complete,
        }

    def profile_dict(self) -> dict:
        return {
            "per_seed": [
                {
                    "seed": r.seed,
                    "seconds_per_epoch": r.seconds_per_epoch,
                    "reg_seconds_per_epoch": r.reg_seconds_per_epoch,
                    "peak_rss_mb": r.peak_rss_mb,
                    "regularizer_calls": r.regularizer_calls,
                    "mst_calls": r.mst_calls,
                }
                for r in self.per_seed
            ],
        }

    def canonical_json(self) -> str:
        return json.dumps(self.results_dict(), sort_keys=True, indent=2)

    def to_json(self) -> str:
        payload = self.results_dict()
        payload["profile"] = self.profile_dict()
        return json.dumps(payload, sort_keys=True, indent=2)


@dataclass(frozen=True)
class DataBundle:
    """One dataset draw, already split."""

    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray

    @classmethod
    def from_spec(cls, spec: SyntheticSpec) -> "DataBundle":
        dataset, idx = generate_dataset(spec)
        return cls(
            x_train=dataset.x[idx.train],
            y_train=dataset.y[idx.train],
            x_val=dataset.x[idx.val],
            y_val=dataset.y[idx.val],
            x_test=dataset.x[idx.test],
            y_test=dataset.y[idx.test],
        )


def _config_dict(cfg: ExperimentConfig) -> dict:
    lam_d, lam_t = cfg.effective_lambdas()
    return {
        "shape": cfg.dataset.shape,
        "total": cfg.dataset.total,
        "splits": list(cfg.dataset.splits),
        "data_seed": cfg.dataset.seed,
        "variant": cfg.variant,
        "lambda_d": lam_d,
        "lambda_t": lam_t,
        "epochs": cfg.epochs,
        "lr": cfg.lr,
        "weight_decay": cfg.weight_decay,
        "n_m": cfg.n_m,
        "schedule_m": cfg.schedule_m,
        "seeds": list(cfg.seeds),
        "hidden": cfg.feature_dim or cfg.hidden,
        "feature_layer": cfg.feature_layer,
        "standardize": cfg.standardize,
        "track_id_every": cfg.track_id_every,
    }


def _val_id_estimate(model: MlpModel, x_val: np.ndarray, feature_layer: str) -> float:
    trace = forward(model, x_val)
    feats = trace.z if feature_layer == "post_act" else trace.pre
    return twonn(PointCloud(feats)).dimension


class _Scaler:
    """Per-dimension affine standardization of inputs and targets.

    Constant dimensions (e.g. the circle's third coordinate) keep scale 1.
    The transform is an affine homeomorphism, so the topology and intrinsic
    dimension the regularizers act on are unchanged.
    """

    def __init__(self, x_train: np.ndarray, y_train: np.ndarray, enabled: bool):
        if enabled:
            self.x_mu = x_train.mean(axis=0)
            x_sd = x_train.std(axis=0)
            self.x_sd = np.where(x_sd > 1e-12, x_sd, 1.0)
            self.y_mu = y_train.mean(axis=0)
            y_sd = y_train.std(axis=0)
            self.y_sd = np.where(y_sd > 1e-9, y_sd, 1.0)
        else:
            self.x_mu = np.zeros(x_train.shape[1])
            self.x_sd = np.ones(x_train.shape[1])
            self.y_mu = np.zeros(y_train.shape[1])
            self.y_sd = np.ones(y_train.shape[1])

    def x(self, x: np.ndarray) -> np.ndarray:
        return (x - self.x_mu) / self.x_sd

    def y(self, y: np.ndarray) -> np.ndarray:
        return (y - self.y_mu) / self.y_sd

    def bake(self, model: MlpModel) -> MlpModel:
        """Fold the transforms into the weights: the result maps raw inputs
        to raw predictions with identical features (pre = normalized pre)."""
        w1 = model.w1 / self.x_sd[:, None]
        b1 = model.b1 - (self.x_mu / self.x_sd) @ model.w1
        w2 = model.w2 * self.y_sd
        b2 = model.b2 * self.y_sd + self.y_mu
        return MlpModel(w1=w1, b1=b1, w2=w2, b2=b2)


def train_one_seed(cfg: ExperimentConfig, seed: int) -> tuple[SeedResult, MlpModel | None]:
    """Train a single run; returns its result and the selected model.

    The dataset is redrawn per run (data seed = spec seed + run seed), so the
    reported spread covers sampling and initialization randomness together.
    """
    result = SeedResult(seed=seed)
    mst_calls_before = tda.mst_call_count()
    loss_calls_before = regularizers.loss_call_count()

    spec = replace(cfg.dataset, seed=cfg.dataset.seed + seed)
    bundle = DataBundle.from_spec(spec)
    n_train = bundle.x_train.shape[0]

    n_m = cfg.n_m if cfg.n_m is not None else n_train
    if not 2 <= n_m <= n_train:
        raise InvalidInputError(f"n_m must be in [2, {n_train}], got {n_m}")

    lam_d, lam_t = cfg.effective_lambdas()
    use_reg = cfg.variant != "baseline" and (lam_d > 0 or lam_t > 0)
    reg_variant = "ld_prime" if cfg.variant == "ld_prime" else "ld"

    hidden = cfg.feature_dim or cfg.hidden
    rng = np.random.default_rng(np.random.SeedSequence([seed, cfg.dataset.seed, 2718]))
    model = init_model(bundle.x_train.shape[1], hidden, bundle.y_train.shape[1], rng)
    state = AdamWState.for_model(model, lr=cfg.lr, weight_decay=cfg.weight_decay)

    scaler = _Scaler(bundle.x_train, bundle.y_train, cfg.standardize)
    x_train = scaler.x(bundle.x_train)
    y_train = scaler.y(bundle.y_train)
    x_val = scaler.x(bundle.x_val)
    x_test = scaler.x(bundle.x_test)

    def raw_mse(m: MlpModel, x: np.ndarray, y_raw: np.ndarray) -> float:
        yhat = forward(m, x).yhat * scaler.y_sd + scaler.y_mu
        value, _ = mse_loss(yhat, y_raw)
        return value

    track_every = cfg.track_id_every
    id_trace: list[tuple[int, float]] | None = [] if track_every else None
    if track_every:
        id_trace.append((0, _val_id_estimate(model, x_val, cfg.feature_layer)))
    loss_trace: list[float] | None = [] if cfg.record_loss_trace else None

    best_val = np.inf
    best_epoch = 0
    best_model = model.copy()
    reg_seconds = 0.0
    t_start = time.perf_counter()

    for epoch in range(1, cfg.epochs + 1):
        trace = forward(model, x_train)
        _, grad_yhat = mse_loss(trace.yhat, y_train)

        grad_z = None
        if use_reg:
            t_reg = time.perf_counter()
            features = trace.z if cfg.feature_layer == "post_act" else trace.pre
            if n_m < n_train:
                rows = rng.choice(n_train, size=n_m, replace=False)
                feats = features[rows]
                targets = y_train[rows]
            else:
                rows = None
                feats = features
                targets = y_train
            batch = make_batch_pair(
                PointCloud(feats), PointCloud(targets), rng, schedule_m=cfg.schedule_m
            )
            reg = combined_loss(batch, lam_d, lam_t, variant=reg_variant)
            if rows is None:
                grad_z = reg.grad_z
            else:
                grad_z = np.zeros_like(features)
                grad_z[rows] = reg.grad_z
            reg_seconds += time.perf_counter() - t_reg

        grads = backward(model, trace, grad_yhat, grad_z, cfg.feature_layer)
        adamw_step(model, grads, state)

        val_mse = raw_mse(model, x_val, bundle.y_val)
        if loss_trace is not None:
            loss_trace.append(val_mse)
        if val_mse < best_val:
            best_val = val_mse
            best_epoch = epoch
            best_model = model.copy()

        if track_every and epoch % track_every == 0:
            id_trace.append((epoch, _val_id_estimate(model, x_val, cfg.feature_layer)))

    elapsed = time.perf_counter() - t_start
    test_mse = raw_mse(best_model, x_test, bundle.y_test)
    final_train_mse = raw_mse(model, x_train, bundle.y_train)
    best_model = scaler.bake(best_model)

    if cfg.dump_embeddings_csv and cfg.out_dir and seed == cfg.seeds[0]:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        dump_embeddings(best_model, bundle, out / "embeddings.csv", cfg.feature_layer)

    result.test_mse = float(test_mse)
    result.best_val_mse = float(best_val)
    result.best_epoch = best_epoch
    result.final_train_mse = float(final_train_mse)
    result.id_trace = id_trace
    result.loss_trace = loss_trace
    result.seconds_per_epoch = elapsed / cfg.epochs
    result.reg_seconds_per_epoch = reg_seconds / cfg.epochs
    result.peak_rss_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    result.regularizer_calls = regularizers.loss_call_count() - loss_calls_before
    result.mst_calls = tda.mst_call_count() - mst_calls_before
    return result, best_model


def _seed_worker(args: tuple[ExperimentConfig, int]) -> SeedResult:
    cfg, seed = args
    try:
        result, _ = train_one_seed(cfg, seed)
        return result
    except Exception as exc:  # noqa: BLE001 - a failed seed must not sink the run
        return SeedResult(seed=seed, error=f"{type(exc).__name__}: {exc}")


def run_experiment(cfg: ExperimentConfig) -> MetricsReport:
    """Train every seed, aggregate mean and sample std of test MSE.

    Failed seeds are recorded with their error message; the report is marked
    incomplete if any seed failed. Seeds run in parallel when cfg.workers > 1,
    with results identical to the serial order.
    """
    jobs = [(cfg, seed) for seed in cfg.seeds]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_seed_worker, jobs))
    else:
        results = [_seed_worker(job) for job in jobs]

    successes = [r.test_mse for r in results if r.error is None]
    mean = float(np.mean(successes)) if successes else None
    std = float(np.std(successes, ddof=1)) if len(successes) > 1 else (0.0 if successes else None)
    report = MetricsReport(
        config=_config_dict(cfg),
        per_seed=results,
        mean_test_mse=mean,
        std_test_mse=std,
        complete=all(r.error is None for r in results),
    )
    if cfg.out_dir:
        _write_report(cfg, report)
    return report


def _write_report(cfg: ExperimentConfig, report: MetricsReport) -> None:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    with open(out / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "seed",
                "test_mse",
                "best_val_mse",
                "best_epoch",
                "seconds_per_epoch",
                "reg_seconds_per_epoch",
                "peak_rss_mb",
                "regularizer_calls",
                "error",
            ]
        )
        for r in report.per_seed:
            writer.writerow(
                [
                    r.seed,
                    r.test_mse,
                    r.best_val_mse,
                    r.best_epoch,
                    f"{r.seconds_per_epoch:.6g}",
                    f"{r.reg_seconds_per_epoch:.6g}",
                    f"{r.peak_rss_mb:.1f}",
                    r.regularizer_calls,
                    r.error or "",
                ]
            )
    if cfg.track_id_every:
        with open(out / "trace.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "epoch", "twonn_dimension"])
            for r in report.per_seed:
                for epoch, dim in r.id_trace or []:
                    writer.writerow([r.seed, epoch, f"{dim:.10g}"])


def track_id(cfg: ExperimentConfig, every_k_epochs: int) -> list[list[tuple[int, float]]]:
    """Run the experiment recording a TwoNN estimate of the validation-set
    features every k epochs (epoch 0 included); returns one trace per seed."""
    report = run_experiment(replace(cfg, track_id_every=every_k_epochs))
    for r in report.per_seed:
        if r.error is not None:
            raise RuntimeError(f"seed {r.seed} failed: {r.error}")
    return [r.id_trace for r in report.per_seed]


def dump_embeddings(
    model: MlpModel,
    bundle: DataBundle,
    path: str | Path,
    feature_layer: str = "pre_act",
) -> Path:
    """Write the test-set feature batch as CSV; targets go to a sibling file.

    The feature file has exactly one column per feature dimension so that
    downstream tools can load it as a plain matrix.
    """
    path = Path(path)
    trace = forward(model, bundle.x_test)
    feats = trace.z if feature_layer == "post_act" else trace.pre
    np.savetxt(path, feats, delimiter=",", fmt="%.17g")
    np.savetxt(
        path.with_name(path.stem + "_targets" + path.suffix),
        bundle.y_test,
        delimiter=",",
        fmt="%.17g",
    )
    return path


def measure_epoch_overhead(
    n_m_values: tuple[int, ...] = (50, 100, 200, 300),
    epochs: int = 60,
    shape: str = "swiss_roll",
    seed: int = 0,
) -> dict[int, float]:
    """Per-epoch regularizer overhead of ld_plus_lt at each n_m, in seconds.

    Uses a train split as large as the biggest n_m so every value is a true
    subsample of one batch. The overhead is the time spent in the regularizer
    block, which is exactly the work a baseline run does not do.
    """
    biggest = max(n_m_values)
    test = 3000 - biggest - 100
    spec = SyntheticSpec(shape=shape, total=3000, splits=(biggest, 100, test), seed=seed)
    overhead = {}
    for n_m in n_m_values:
        cfg = ExperimentConfig(
            dataset=spec,
            variant="ld_plus_lt",
            epochs=epochs,
            n_m=n_m,
            seeds=(seed,),
        )
        result, _ = train_one_seed(cfg, seed)
        overhead[n_m] = result.reg_seconds_per_epoch
    return overhead
