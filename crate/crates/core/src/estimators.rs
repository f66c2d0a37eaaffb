//! Estimators of the first-passage time that see only the observation
//! process.
//!
//! Each estimator is a [`StoppingRule`]: it is fed `(t, Y_t)` in step order,
//! starting at `t = 0` with `Y_0 = 0`, and commits to a stopping time once it
//! can. A rule never sees the latent walk.

use std::fmt;

use crate::error::{check, ParamError, Result};
use crate::observation::ChannelKind;
use crate::process::WalkParams;

/// Exponent used by the single-observation rule unless overridden.
pub const DEFAULT_Q: f64 = 0.51;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    /// Stop the first time the mmse estimate of `X_t` reaches the level.
    SequentialMmse,
    /// Observe once at `t_star` and extrapolate at the drift rate.
    SingleObservation { q: f64 },
    /// The constant `round(ell / s)`.
    FixedTime,
    /// Stop when the delayed observation reaches `ell - s*d`.
    DelayedThreshold,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::SequentialMmse => "sequential_mmse",
            EstimatorKind::SingleObservation { .. } => "single_observation",
            EstimatorKind::FixedTime => "fixed_time",
            EstimatorKind::DelayedThreshold => "delayed_threshold",
        }
    }

    pub fn q(&self) -> Option<f64> {
        match *self {
            EstimatorKind::SingleObservation { q } => Some(q),
            _ => None,
        }
    }

    /// Checks that the estimator applies to the given walk.
    pub fn validate(&self, params: &WalkParams) -> Result<()> {
        let noisy_with_drift = |estimator| match params.channel {
            ChannelKind::Noisy { .. } if params.s > 0.0 => Ok(()),
            _ => Err(ParamError::IncompatibleMode {
                estimator,
                requirement: "a noisy channel and drift s > 0",
            }),
        };
        match *self {
            EstimatorKind::SequentialMmse => noisy_with_drift("sequential_mmse"),
            EstimatorKind::FixedTime => noisy_with_drift("fixed_time"),
            EstimatorKind::SingleObservation { q } => {
                check(q > 0.5 && q < 1.0, "q", "in (1/2, 1)", q)?;
                noisy_with_drift("single_observation")?;
                t_star(params.ell, params.s, q).map(|_| ())
            }
            EstimatorKind::DelayedThreshold => match params.channel {
                ChannelKind::Delayed { .. } => Ok(()),
                ChannelKind::Noisy { .. } => Err(ParamError::IncompatibleMode {
                    estimator: "delayed_threshold",
                    requirement: "a delayed channel",
                }),
            },
        }
    }

    /// A fresh stopping rule for one trial.
    pub fn rule(&self, params: &WalkParams) -> Result<Box<dyn StoppingRule + Send>> {
        self.validate(params)?;
        Ok(match *self {
            EstimatorKind::SequentialMmse => Box::new(SequentialMmseRule::new(params)),
            EstimatorKind::SingleObservation { q } => {
                Box::new(SingleObservationRule::new(params, q)?)
            }
            EstimatorKind::FixedTime => Box::new(FixedTimeRule::new(params)?),
            EstimatorKind::DelayedThreshold => Box::new(DelayedThresholdRule::new(params)),
        })
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The outcome of a stopping rule on one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopDecision {
    pub eta: u64,
    /// The rule had not committed when the horizon was reached; `eta` is the
    /// cap.
    pub stopped_by_cap: bool,
}

impl StopDecision {
    /// Clamps a committed stopping time to the horizon.
    pub fn committed(eta: u64, cap: u64) -> Self {
        if eta > cap {
            Self::capped(cap)
        } else {
            StopDecision {
                eta,
                stopped_by_cap: false,
            }
        }
    }

    pub fn capped(cap: u64) -> Self {
        StopDecision {
            eta: cap,
            stopped_by_cap: true,
        }
    }
}

/// A causal estimator of the first-passage time.
pub trait StoppingRule {
    /// Feeds `Y_t`. Returns the stopping time once the rule commits to it;
    /// after that the rule is not fed again. The committed value may lie in
    /// the future (a fixed-time rule commits at `t = 0`), never in the past.
    fn observe(&mut self, t: u64, y: f64) -> Option<u64>;
}

/// Conditional mean of `X_t` given `Y_t` under the noisy channel.
///
/// `X_hat_0` is 0 by convention.
#[inline]
pub fn mmse_estimate(y_t: f64, t: u64, s: f64, epsilon: f64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let e2 = epsilon * epsilon;
    y_t / (1.0 + e2) + s * e2 * t as f64 / (1.0 + e2)
}

/// Observation step of the single-observation rule,
/// `floor(ell/s - (ell/s)^q)`.
pub fn t_star(ell: f64, s: f64, q: f64) -> Result<u64> {
    check(s > 0.0 && s.is_finite(), "s", "> 0", s)?;
    check(q > 0.5 && q < 1.0, "q", "in (1/2, 1)", q)?;
    let ratio = ell / s;
    if ratio.is_nan() || ratio < 1.0 {
        return Err(ParamError::LevelBelowDrift { ratio });
    }
    let value = (ratio - ratio.powf(q)).floor();
    Ok(value as u64)
}

/// `t_star + floor((ell - X_hat_{t_star})_+ / s)` from the single observation
/// `Y_{t_star}`.
pub fn single_observation_eta(
    params: &WalkParams,
    q: f64,
    y_at_tstar: f64,
) -> Result<StopDecision> {
    EstimatorKind::SingleObservation { q }.validate(params)?;
    let ts = t_star(params.ell, params.s, q)?;
    let eta = extrapolate(params, ts, y_at_tstar);
    Ok(StopDecision::committed(eta, params.horizon_cap()?))
}

fn extrapolate(params: &WalkParams, ts: u64, y: f64) -> u64 {
    let estimate = mmse_estimate(y, ts, params.s, params.epsilon());
    let remaining = (params.ell - estimate).max(0.0);
    ts + (remaining / params.s).floor() as u64
}

/// `round(ell / s)`, ties away from zero.
pub fn fixed_time_eta(ell: f64, s: f64) -> Result<StopDecision> {
    check(s > 0.0 && s.is_finite(), "s", "> 0", s)?;
    check(ell >= 0.0 && ell.is_finite(), "ell", "finite and >= 0", ell)?;
    Ok(StopDecision {
        eta: (ell / s).round() as u64,
        stopped_by_cap: false,
    })
}

/// Runs the sequential mmse rule over an observation stream.
///
/// Observations are `(t, Y_t)` in step order from `t = 0`. A stream that ends
/// before the rule stops is treated as censored at the horizon.
pub fn run_sequential_mmse(
    params: &WalkParams,
    observations: impl IntoIterator<Item = (u64, f64)>,
) -> Result<StopDecision> {
    let rule = EstimatorKind::SequentialMmse.rule(params)?;
    drive(rule, params.horizon_cap()?, observations)
}

/// Runs the delayed-threshold rule over an observation stream.
pub fn delayed_eta(
    params: &WalkParams,
    observations: impl IntoIterator<Item = (u64, f64)>,
) -> Result<StopDecision> {
    let rule = EstimatorKind::DelayedThreshold.rule(params)?;
    warn_if_below_shift(params);
    drive(rule, params.horizon_cap()?, observations)
}

/// Logs a warning when `ell < s*d`, outside the range where the
/// delayed-threshold rule is known to be asymptotically optimal.
pub fn warn_if_below_shift(params: &WalkParams) -> bool {
    let shift = params.s * params.delay() as f64;
    let below = params.ell < shift;
    if below {
        log::warn!(
            "ell = {} is below s*d = {shift}; the delayed-threshold rule is only \
             known to be optimal for ell >= s*d",
            params.ell
        );
    }
    below
}

fn drive(
    mut rule: Box<dyn StoppingRule + Send>,
    cap: u64,
    observations: impl IntoIterator<Item = (u64, f64)>,
) -> Result<StopDecision> {
    for (t, y) in observations {
        if t > cap {
            break;
        }
        if let Some(eta) = rule.observe(t, y) {
            return Ok(StopDecision::committed(eta, cap));
        }
    }
    Ok(StopDecision::capped(cap))
}

#[derive(Debug, Clone)]
pub struct SequentialMmseRule {
    ell: f64,
    s: f64,
    epsilon: f64,
}

impl SequentialMmseRule {
    pub fn new(params: &WalkParams) -> Self {
        Self {
            ell: params.ell,
            s: params.s,
            epsilon: params.epsilon(),
        }
    }
}

impl StoppingRule for SequentialMmseRule {
    #[inline]
    fn observe(&mut self, t: u64, y: f64) -> Option<u64> {
        (mmse_estimate(y, t, self.s, self.epsilon) >= self.ell).then_some(t)
    }
}

#[derive(Debug, Clone)]
pub struct SingleObservationRule {
    params: WalkParams,
    t_star: u64,
}

impl SingleObservationRule {
    pub fn new(params: &WalkParams, q: f64) -> Result<Self> {
        Ok(Self {
            params: *params,
            t_star: t_star(params.ell, params.s, q)?,
        })
    }

    pub fn t_star(&self) -> u64 {
        self.t_star
    }
}

impl StoppingRule for SingleObservationRule {
    #[inline]
    fn observe(&mut self, t: u64, y: f64) -> Option<u64> {
        (t == self.t_star).then(|| extrapolate(&self.params, t, y))
    }
}

#[derive(Debug, Clone)]
pub struct FixedTimeRule {
    eta: u64,
}

impl FixedTimeRule {
    pub fn new(params: &WalkParams) -> Result<Self> {
        Ok(Self {
            eta: fixed_time_eta(params.ell, params.s)?.eta,
        })
    }
}

impl StoppingRule for FixedTimeRule {
    fn observe(&mut self, _t: u64, _y: f64) -> Option<u64> {
        Some(self.eta)
    }
}

#[derive(Debug, Clone)]
pub struct DelayedThresholdRule {
    threshold: f64,
}

impl DelayedThresholdRule {
    pub fn new(params: &WalkParams) -> Self {
        Self {
            threshold: params.ell - params.s * params.delay() as f64,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

impl StoppingRule for DelayedThresholdRule {
    #[inline]
    fn observe(&mut self, t: u64, y: f64) -> Option<u64> {
        (y >= self.threshold).then_some(t)
    }
}
