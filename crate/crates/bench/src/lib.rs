//! Fixtures shared by the benchmarks.

use fpt_core::{EstimatorKind, ExperimentConfig, PrecisionSpec, Sweep, WalkParams};

/// The three noisy-channel estimators at their default settings.
pub fn noisy_estimators() -> Vec<EstimatorKind> {
    vec![
        EstimatorKind::SequentialMmse,
        EstimatorKind::SingleObservation {
            q: fpt_core::DEFAULT_Q,
        },
        EstimatorKind::FixedTime,
    ]
}

pub fn noisy_params(ell: f64) -> WalkParams {
    WalkParams::noisy(10.0, ell, 0.5).expect("valid parameters")
}

/// A one-level noisy sweep with a fixed number of trials.
pub fn small_experiment(ell: f64, trials: u64, workers: usize) -> ExperimentConfig {
    ExperimentConfig {
        params: noisy_params(0.0),
        estimators: noisy_estimators(),
        p: 1.0,
        sweep: Sweep::Levels(vec![ell]),
        precision: PrecisionSpec::new(0.05)
            .and_then(|p| p.with_trials(trials))
            .expect("valid precision"),
        master_seed: 1,
        workers,
    }
}
