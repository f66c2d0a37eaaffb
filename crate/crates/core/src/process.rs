//! The latent walk `X_t = V_1 + ... + V_t + s*t` and its first passage of a
//! level.

use crate::error::{check, ParamError, Result};
use crate::observation::{noisy_observe, ChannelKind};
use crate::rng::TrialStreams;

/// Smallest horizon used for walks with positive drift.
pub const MIN_HORIZON_CAP: u64 = 1_000;

/// Full parameterization of one experiment point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    /// Drift per step, `s >= 0`.
    pub s: f64,
    /// Threshold level, `ell >= 0`.
    pub ell: f64,
    pub channel: ChannelKind,
    /// Maximum number of simulated steps. `None` selects the default, which
    /// only exists for positive drift.
    pub horizon_cap: Option<u64>,
}

impl WalkParams {
    pub fn noisy(s: f64, ell: f64, epsilon: f64) -> Result<Self> {
        Self::new(s, ell, ChannelKind::Noisy { epsilon })
    }

    pub fn delayed(s: f64, ell: f64, delay: u64) -> Result<Self> {
        Self::new(s, ell, ChannelKind::Delayed { delay })
    }

    pub fn new(s: f64, ell: f64, channel: ChannelKind) -> Result<Self> {
        let params = Self {
            s,
            ell,
            channel,
            horizon_cap: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_horizon_cap(mut self, cap: u64) -> Result<Self> {
        check(cap >= 1, "horizon_cap", ">= 1", cap as f64)?;
        self.horizon_cap = Some(cap);
        Ok(self)
    }

    pub fn with_level(mut self, ell: f64) -> Result<Self> {
        self.ell = ell;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.s.is_finite() && self.s >= 0.0,
            "s",
            "finite and >= 0",
            self.s,
        )?;
        check(
            self.ell.is_finite() && self.ell >= 0.0,
            "ell",
            "finite and >= 0",
            self.ell,
        )?;
        if let ChannelKind::Noisy { epsilon } = self.channel {
            check(
                epsilon.is_finite() && epsilon >= 0.0,
                "epsilon",
                "finite and >= 0",
                epsilon,
            )?;
        }
        if let Some(cap) = self.horizon_cap {
            check(cap >= 1, "horizon_cap", ">= 1", cap as f64)?;
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        match self.channel {
            ChannelKind::Noisy { epsilon } => epsilon,
            ChannelKind::Delayed { .. } => 0.0,
        }
    }

    pub fn delay(&self) -> u64 {
        match self.channel {
            ChannelKind::Noisy { .. } => 0,
            ChannelKind::Delayed { delay } => delay,
        }
    }

    /// Resolved horizon: the explicit cap, or `max(10*ceil(ell/s), 1000)` for
    /// positive drift. Zero drift has no default.
    pub fn horizon_cap(&self) -> Result<u64> {
        match self.horizon_cap {
            Some(cap) => Ok(cap),
            None if self.s > 0.0 => Ok(default_horizon_cap(self.ell, self.s)),
            None => Err(ParamError::MissingHorizonCap),
        }
    }
}

pub fn default_horizon_cap(ell: f64, s: f64) -> u64 {
    let steps = (ell / s).ceil();
    let scaled = if steps.is_finite() && steps < (u64::MAX / 20) as f64 {
        10 * steps as u64
    } else {
        u64::MAX / 2
    };
    scaled.max(MIN_HORIZON_CAP)
}

/// Position of the latent and observed processes at step `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub t: u64,
    pub x: f64,
    pub y: f64,
    // running W_1 + ... + W_t of the noisy channel
    noise_acc: f64,
}

impl PathState {
    /// `t = 0`, `X_0 = Y_0 = 0`.
    pub const ORIGIN: PathState = PathState {
        t: 0,
        x: 0.0,
        y: 0.0,
        noise_acc: 0.0,
    };

    pub fn noise_acc(&self) -> f64 {
        self.noise_acc
    }
}

impl Default for PathState {
    fn default() -> Self {
        Self::ORIGIN
    }
}

/// One step of the walk from standard-normal draws `v` (increment) and `w`
/// (observation noise). For a delay channel `y` mirrors `x`; the delay is
/// applied downstream by a [`crate::observation::DelayLine`].
#[inline]
pub fn advance(state: PathState, params: &WalkParams, v: f64, w: f64) -> PathState {
    let x = state.x + params.s + v;
    match params.channel {
        ChannelKind::Noisy { epsilon } => {
            let noise_acc = state.noise_acc + w;
            PathState {
                t: state.t + 1,
                x,
                y: noisy_observe(x, noise_acc, epsilon),
                noise_acc,
            }
        }
        ChannelKind::Delayed { .. } => PathState {
            t: state.t + 1,
            x,
            y: x,
            noise_acc: state.noise_acc,
        },
    }
}

/// First passage of the latent walk over `ell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPassage {
    pub tau: u64,
    /// `X_tau - ell`. Nonnegative when the level was crossed; for a truncated
    /// walk this is `X_cap - ell`, the (negative) distance still to go.
    pub overshoot: f64,
    /// The horizon was reached without crossing; `tau` is then the cap.
    pub truncated: bool,
}

impl FirstPassage {
    pub(crate) fn at_origin() -> Self {
        FirstPassage {
            tau: 0,
            overshoot: 0.0,
            truncated: false,
        }
    }
}

/// First passage on a recorded sequence of increments: `draws[t-1]` is `V_t`.
///
/// Panics if `draws` is shorter than the walk needs before crossing or
/// reaching the horizon.
pub fn simulate_first_passage(params: &WalkParams, draws: &[f64]) -> Result<FirstPassage> {
    let mut draws = draws.iter().copied();
    first_passage_from(params, || {
        draws
            .next()
            .expect("draw sequence shorter than the horizon cap")
    })
}

/// First passage driven by the increment stream of a trial. Memory is O(1).
pub fn sample_first_passage(
    params: &WalkParams,
    streams: &mut TrialStreams,
) -> Result<FirstPassage> {
    first_passage_from(params, || streams.increment())
}

fn first_passage_from(
    params: &WalkParams,
    mut next_increment: impl FnMut() -> f64,
) -> Result<FirstPassage> {
    let cap = params.horizon_cap()?;
    let ell = params.ell;
    if 0.0 >= ell {
        return Ok(FirstPassage::at_origin());
    }
    let mut x = 0.0;
    for t in 1..=cap {
        x += params.s + next_increment();
        if x >= ell {
            return Ok(FirstPassage {
                tau: t,
                overshoot: x - ell,
                truncated: false,
            });
        }
    }
    Ok(FirstPassage {
        tau: cap,
        overshoot: x - ell,
        truncated: true,
    })
}

/// Exact first passage of the driftless walk, without stepping through every
/// increment.
///
/// The walk is embedded in a Brownian motion observed at integer times. From
/// `X_t = x < ell` the Brownian motion hits `ell` after a Lévy-distributed time
/// `theta = (ell - x)^2 / Z^2`; every integer time before `t + theta` lies
/// below the level. At the next integer time `t' = t + ceil(theta)` the walk
/// is `ell + sqrt(ceil(theta) - theta) * Z'`. If that is at or above the level
/// it is the first passage, otherwise the construction restarts from `t'`.
/// Each round costs two normal draws and crosses with probability at least
/// one half, so the cost is independent of `tau`.
pub fn sample_driftless_passage(ell: f64, cap: u64, streams: &mut TrialStreams) -> FirstPassage {
    if 0.0 >= ell {
        return FirstPassage::at_origin();
    }
    let mut t = 0u64;
    let mut x = 0.0f64;
    loop {
        let gap = ell - x;
        let z = streams.increment();
        let theta = gap * gap / (z * z);
        let remaining = (cap - t) as f64;
        if theta > remaining || !theta.is_finite() {
            // No integer time up to the cap reaches the level. The walk
            // position at the cap is not needed by any caller.
            return FirstPassage {
                tau: cap,
                overshoot: f64::NAN,
                truncated: true,
            };
        }
        let jump = theta.ceil().max(1.0);
        let next_x = ell + (jump - theta).max(0.0).sqrt() * streams.increment();
        t += jump as u64;
        if next_x >= ell {
            return FirstPassage {
                tau: t,
                overshoot: next_x - ell,
                truncated: false,
            };
        }
        x = next_x;
    }
}
