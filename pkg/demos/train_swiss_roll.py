"""Coordinate prediction on the Swiss roll: baseline vs full regularizer.

Trains the 2-layer MLP on 100 Swiss-roll samples with and without the
topology/dimension losses and compares test MSE. Shortened to 2000 epochs
and 2 seeds so it finishes in about a minute; the full protocol (10000
epochs, 10 seeds) is what the acceptance suite runs.
"""

from phreg import ExperimentConfig, SyntheticSpec, run_experiment

spec = SyntheticSpec(shape="swiss_roll", seed=0)

reports = {}
for variant in ("baseline", "ld_plus_lt"):
    cfg = ExperimentConfig(
        dataset=spec,
        variant=variant,
        epochs=2000,
        seeds=(0, 1),
        workers=2,
    )
    report = run_experiment(cfg)
    reports[variant] = report
    lam_d, lam_t = cfg.effective_lambdas()
    print(f"{variant:11s} (lambda_d={lam_d}, lambda_t={lam_t}): "
          f"test MSE {report.mean_test_mse:.3f} +/- {report.std_test_mse:.3f}")
    for r in report.per_seed:
        print(f"    seed {r.seed}: {r.test_mse:.3f}  "
              f"(best epoch {r.best_epoch}, {1e3 * r.seconds_per_epoch:.2f} ms/epoch)")

ratio = reports["ld_plus_lt"].mean_test_mse / reports["baseline"].mean_test_mse
print(f"\nregularized / baseline = {ratio:.3f}")
