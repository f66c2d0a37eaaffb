//! Tracking the first-passage time of a drifting Gaussian random walk from
//! noisy or delayed observations.
//!
//! The latent walk is `X_t = V_1 + ... + V_t + s t` with standard normal
//! increments and `tau = inf{t : X_t >= ell}`. An estimator only sees an
//! observation process `Y`, either `X` plus accumulated Gaussian noise or `X`
//! delayed by `d` steps, and must stop as close to `tau` as possible in the
//! `E|eta - tau|^p` sense.
//!
//! * [`process`] and [`observation`] simulate `X` and `Y`.
//! * [`estimators`] holds the four stopping rules.
//! * [`theory`] has the asymptotic constants and concentration bounds.
//! * [`montecarlo`] runs coupled trials, sizes samples and reduces moments
//!   deterministically across worker counts.

pub mod error;
pub mod estimators;
pub mod montecarlo;
pub mod observation;
pub mod process;
pub mod rng;
pub mod stats;
pub mod theory;

pub use error::{ParamError, Result};
pub use estimators::{EstimatorKind, StopDecision, StoppingRule, DEFAULT_Q};
pub use montecarlo::{
    required_samples, run_coupled_trial, run_divergence_demo, run_experiment, ExperimentConfig,
    LevelRule, MomentEstimate, PrecisionSpec, Sweep, TrialOutcome,
};
pub use observation::ChannelKind;
pub use process::{FirstPassage, PathState, WalkParams};
pub use rng::{StreamKey, TrialStreams};
