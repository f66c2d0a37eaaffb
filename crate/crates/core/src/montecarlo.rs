//! Coupled-trial experiment engine.
//!
//! A trial simulates one latent path and feeds its observations to every
//! requested estimator, so `|eta - tau|` is always measured within a path.
//! Trial `i` of sweep point `j` draws from the streams keyed by
//! `(master_seed, j, i)`, results are collected in trial order and reduced
//! with compensated sums, so output does not depend on the worker count.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{check, ParamError, Result};
use crate::estimators::{EstimatorKind, StopDecision, StoppingRule};
use crate::observation::{ChannelKind, DelayLine};
use crate::process::{
    advance, default_horizon_cap, sample_driftless_passage, sample_first_passage, FirstPassage,
    PathState, WalkParams,
};
use crate::rng::TrialStreams;
use crate::stats::{
    ks_distance, ks_distance_lattice, mean_and_stderr, median, CompensatedSum, MeanEstimate,
};
use crate::theory::{self, clt_reference_cdf};

/// Target precision of a ratio estimate and, optionally, an explicit trial
/// count that overrides the derived one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionSpec {
    pub delta: f64,
    pub n_override: Option<u64>,
}

impl PrecisionSpec {
    pub fn new(delta: f64) -> Result<Self> {
        check(delta > 0.0 && delta < 1.0, "delta", "in (0, 1)", delta)?;
        Ok(Self {
            delta,
            n_override: None,
        })
    }

    /// A fixed trial count. `delta` is kept only for reporting.
    pub fn with_trials(mut self, n: u64) -> Result<Self> {
        check(n >= 1, "n", ">= 1", n as f64)?;
        self.n_override = Some(n);
        Ok(self)
    }

    pub fn trials_for(&self, estimator: &EstimatorKind, epsilon: f64) -> Result<u64> {
        match self.n_override {
            Some(n) => Ok(n),
            None => required_samples(self.delta, estimator, epsilon),
        }
    }
}

/// Chebyshev sample size for a ratio estimate within `delta` with probability
/// at least `1 - delta`.
///
/// With `Var(eta - tau) ≈ E|eta - tau|^2`, plugging in the asymptotic second
/// moments gives `pi / (2 delta^3)` for the two asymptotically optimal noisy
/// rules and for the delayed rule, and `(1 + eps^2)/eps^2 * pi / (2 delta^3)`
/// for the fixed-time rule.
pub fn required_samples(delta: f64, estimator: &EstimatorKind, epsilon: f64) -> Result<u64> {
    check(delta > 0.0 && delta < 1.0, "delta", "in (0, 1)", delta)?;
    let base = PI / (2.0 * delta.powi(3));
    let n = match estimator {
        EstimatorKind::FixedTime => theory::fixed_time_ratio(epsilon, 2.0)? * base,
        _ => base,
    };
    Ok(n.ceil() as u64)
}

/// How the level is chosen at each point of a delay sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelRule {
    Fixed(f64),
    /// `ell = base + s * d`
    Offset {
        base: f64,
    },
}

impl LevelRule {
    pub fn level(&self, s: f64, delay: u64) -> f64 {
        match *self {
            LevelRule::Fixed(ell) => ell,
            LevelRule::Offset { base } => base + s * delay as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Noisy observations at each level.
    Levels(Vec<f64>),
    /// Delayed observations at each delay.
    Delays { delays: Vec<u64>, level: LevelRule },
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::Levels(levels) => levels.len(),
            Sweep::Delays { delays, .. } => delays.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Drift, channel template and horizon shared by every sweep point. The
    /// level (and the delay, for delay sweeps) is set per point.
    pub params: WalkParams,
    pub estimators: Vec<EstimatorKind>,
    /// Moment order, `p >= 1`.
    pub p: f64,
    pub sweep: Sweep,
    pub precision: PrecisionSpec,
    pub master_seed: u64,
    pub workers: usize,
}

/// One sweep point, fully resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: u64,
    /// The swept quantity: the level, or the delay.
    pub value: f64,
    pub params: WalkParams,
    pub theory_constant: f64,
}

impl ExperimentConfig {
    /// Resolves and validates every sweep point before anything runs.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        if self.sweep.is_empty() {
            return Err(ParamError::EmptySweep);
        }
        if self.estimators.is_empty() {
            return Err(ParamError::IncompatibleMode {
                estimator: "(none)",
                requirement: "at least one estimator",
            });
        }
        check(self.p >= 1.0 && self.p.is_finite(), "p", ">= 1", self.p)?;
        check(self.workers >= 1, "workers", ">= 1", self.workers as f64)?;
        let s = self.params.s;
        let raw: Vec<(f64, WalkParams)> = match &self.sweep {
            Sweep::Levels(levels) => {
                if !matches!(self.params.channel, ChannelKind::Noisy { .. }) {
                    return Err(ParamError::IncompatibleMode {
                        estimator: "level sweep",
                        requirement: "a noisy channel",
                    });
                }
                levels
                    .iter()
                    .map(|&ell| Ok((ell, self.params.with_level(ell)?)))
                    .collect::<Result<_>>()?
            }
            Sweep::Delays { delays, level } => delays
                .iter()
                .map(|&d| {
                    let mut params = self.params;
                    params.channel = ChannelKind::Delayed { delay: d };
                    Ok((d as f64, params.with_level(level.level(s, d))?))
                })
                .collect::<Result<_>>()?,
        };
        raw.into_iter()
            .enumerate()
            .map(|(index, (value, params))| {
                params.horizon_cap()?;
                if let ChannelKind::Delayed { .. } = params.channel {
                    crate::estimators::warn_if_below_shift(&params);
                }
                for estimator in &self.estimators {
                    estimator.validate(&params)?;
                }
                let theory_constant = theory_constant(&params, self.p)?;
                if theory_constant.is_nan() || theory_constant <= 0.0 {
                    let what = match params.channel {
                        ChannelKind::Noisy { .. } => "ell",
                        ChannelKind::Delayed { .. } => "d",
                    };
                    return Err(ParamError::DegenerateConstant { what, value });
                }
                Ok(SweepPoint {
                    index: index as u64,
                    value,
                    params,
                    theory_constant,
                })
            })
            .collect()
    }
}

/// `c1` for noisy walks, `c2` for delayed walks with drift, `d^p` without.
pub fn theory_constant(params: &WalkParams, p: f64) -> Result<f64> {
    match params.channel {
        ChannelKind::Noisy { epsilon } => theory::c1(params.ell, params.s, epsilon, p),
        ChannelKind::Delayed { delay } if params.s > 0.0 => theory::c2(delay, params.s, p),
        ChannelKind::Delayed { delay } => theory::c2_driftless(delay, p),
    }
}

/// One estimator's result on one coupled trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub estimator: EstimatorKind,
    pub tau: u64,
    pub eta: u64,
    pub overshoot: f64,
    /// The walk did not cross within the horizon, or the estimator had not
    /// stopped by then.
    pub truncated: bool,
}

impl TrialOutcome {
    pub fn abs_error(&self) -> u64 {
        self.eta.abs_diff(self.tau)
    }
}

/// Empirical `E|eta - tau|^p` at one sweep point, with its theory ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub estimator: EstimatorKind,
    pub sweep_index: u64,
    /// Level (noisy sweeps) or delay (delay sweeps).
    pub sweep_value: f64,
    pub ell: f64,
    pub p: f64,
    /// Mean of `|eta - tau|^p` over the trials that were not truncated.
    pub empirical_moment: f64,
    /// Trials run, truncated ones included.
    pub n: u64,
    pub stderr: f64,
    pub theory_constant: f64,
    pub ratio: f64,
    pub truncated_count: u64,
}

/// Simulates one shared path and evaluates `tau` and every estimator on it.
pub fn run_coupled_trial(
    params: &WalkParams,
    estimators: &[EstimatorKind],
    streams: &mut TrialStreams,
) -> Result<Vec<TrialOutcome>> {
    let mut rules = estimators
        .iter()
        .map(|e| e.rule(params))
        .collect::<Result<Vec<_>>>()?;
    let mut refs: Vec<&mut dyn StoppingRule> = rules
        .iter_mut()
        .map(|r| r.as_mut() as &mut dyn StoppingRule)
        .collect();
    let (passage, decisions) = run_coupled_rules(params, &mut refs, streams)?;
    Ok(estimators
        .iter()
        .zip(decisions)
        .map(|(&estimator, decision)| TrialOutcome {
            estimator,
            tau: passage.tau,
            eta: decision.eta,
            overshoot: passage.overshoot,
            truncated: passage.truncated || decision.stopped_by_cap,
        })
        .collect())
}

/// The trial loop behind [`run_coupled_trial`], for arbitrary rules.
///
/// Steps the walk until the passage is found and every rule has committed, or
/// the horizon is reached. Once all rules have committed only the latent walk
/// is advanced; the noise stream is then left untouched.
pub fn run_coupled_rules(
    params: &WalkParams,
    rules: &mut [&mut dyn StoppingRule],
    streams: &mut TrialStreams,
) -> Result<(FirstPassage, Vec<StopDecision>)> {
    let cap = params.horizon_cap()?;
    let ell = params.ell;
    let mut committed: Vec<Option<u64>> = rules.iter_mut().map(|r| r.observe(0, 0.0)).collect();
    let mut pending = committed.iter().filter(|c| c.is_none()).count();
    let mut passage = (0.0 >= ell).then(FirstPassage::at_origin);

    let mut delay_line = match params.channel {
        ChannelKind::Delayed { delay } => {
            let mut line = DelayLine::new(delay);
            line.push(0.0);
            Some(line)
        }
        ChannelKind::Noisy { .. } => None,
    };
    let noisy = delay_line.is_none();

    let mut state = PathState::ORIGIN;
    while state.t < cap && (passage.is_none() || pending > 0) {
        if pending == 0 {
            let (mut t, mut x) = (state.t, state.x);
            while t < cap {
                t += 1;
                x += params.s + streams.increment();
                if x >= ell {
                    passage = Some(FirstPassage {
                        tau: t,
                        overshoot: x - ell,
                        truncated: false,
                    });
                    break;
                }
            }
            state.t = t;
            state.x = x;
            break;
        }
        let v = streams.increment();
        let w = if noisy { streams.noise() } else { 0.0 };
        state = advance(state, params, v, w);
        let t = state.t;
        let y = match delay_line.as_mut() {
            Some(line) => {
                line.push(state.x);
                line.observe(t).expect("delay line sized to d + 1")
            }
            None => state.y,
        };
        if passage.is_none() && state.x >= ell {
            passage = Some(FirstPassage {
                tau: t,
                overshoot: state.x - ell,
                truncated: false,
            });
        }
        for (rule, slot) in rules.iter_mut().zip(committed.iter_mut()) {
            if slot.is_none() {
                if let Some(eta) = rule.observe(t, y) {
                    *slot = Some(eta);
                    pending -= 1;
                }
            }
        }
    }
    let passage = passage.unwrap_or(FirstPassage {
        tau: cap,
        overshoot: state.x - ell,
        truncated: true,
    });
    let decisions = committed
        .into_iter()
        .map(|c| match c {
            Some(eta) => StopDecision::committed(eta, cap),
            None => StopDecision::capped(cap),
        })
        .collect();
    Ok((passage, decisions))
}

/// Maps `f` over trial indices `0..n` on `workers` threads, keeping index
/// order in the result.
pub fn parallel_trials<T, F>(workers: usize, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to start worker threads");
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

/// Runs every sweep point and returns one estimate per (point, estimator), in
/// sweep order then estimator order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<MomentEstimate>> {
    let points = config.points()?;
    let mut estimates = Vec::with_capacity(points.len() * config.estimators.len());
    for point in &points {
        estimates.extend(run_sweep_point(config, point)?);
    }
    Ok(estimates)
}

/// Runs a single resolved sweep point.
///
/// Each estimator gets its own trial count; trial `i` evaluates only the
/// estimators whose count exceeds `i`, so every estimator's sample is a prefix
/// of the same coupled sequence.
pub fn run_sweep_point(
    config: &ExperimentConfig,
    point: &SweepPoint,
) -> Result<Vec<MomentEstimate>> {
    let params = point.params;
    let epsilon = params.epsilon();
    let counts = config
        .estimators
        .iter()
        .map(|e| config.precision.trials_for(e, epsilon))
        .collect::<Result<Vec<_>>>()?;
    let n_max = counts.iter().copied().max().unwrap_or(0);
    log::info!(
        "sweep point {} ({}): {} trials",
        point.index,
        point.value,
        n_max
    );

    let estimators = &config.estimators;
    let trials = parallel_trials(config.workers, n_max, |i| {
        let active: Vec<EstimatorKind> = estimators
            .iter()
            .zip(&counts)
            .filter(|(_, &n)| i < n)
            .map(|(e, _)| *e)
            .collect();
        let mut streams = TrialStreams::for_trial(config.master_seed, point.index, i);
        run_coupled_trial(&params, &active, &mut streams)
    });
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;

    let p = config.p;
    Ok(estimators
        .iter()
        .zip(&counts)
        .map(|(&estimator, &n)| {
            let outcomes = trials
                .iter()
                .take(n as usize)
                .filter_map(|trial| trial.iter().find(|o| o.estimator == estimator));
            let truncated_count = outcomes.clone().filter(|o| o.truncated).count() as u64;
            let errors = outcomes
                .filter(|o| !o.truncated)
                .map(|o| (o.abs_error() as f64).powf(p));
            let MeanEstimate { mean, stderr, .. } = mean_and_stderr(errors);
            MomentEstimate {
                estimator,
                sweep_index: point.index,
                sweep_value: point.value,
                ell: params.ell,
                p,
                empirical_moment: mean,
                n,
                stderr,
                theory_constant: point.theory_constant,
                ratio: mean / point.theory_constant,
                truncated_count,
            }
        })
        .collect())
}

/// One row of the divergence demonstration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceRow {
    pub n: u64,
    /// The constant estimator: median of the first `n` (capped) passage
    /// times.
    pub eta_const: f64,
    /// Mean of `|eta_const - min(tau, cap)|^p` over the first `n` trials.
    pub empirical_moment: f64,
    pub truncated_count: u64,
    pub truncation_rate: f64,
}

/// Empirical `p`-th moment of a constant estimator's error for a driftless
/// walk seen through noise, over growing sample sizes.
///
/// The moment is infinite for every estimator when `p >= 1/2`; a finite
/// horizon turns it into a truncated mean that keeps growing with the cap
/// and, in distribution, with the sample size. Truncated trials enter at the
/// cap and are counted. The estimator ignores the observations, so only the
/// latent passage times are simulated, by the exact embedded sampler in
/// [`sample_driftless_passage`].
pub fn run_divergence_demo(
    params: &WalkParams,
    p: f64,
    n_grid: &[u64],
    master_seed: u64,
    workers: usize,
) -> Result<Vec<DivergenceRow>> {
    check(
        params.s == 0.0,
        "s",
        "= 0 for the divergence demonstration",
        params.s,
    )?;
    let epsilon = match params.channel {
        ChannelKind::Noisy { epsilon } => epsilon,
        ChannelKind::Delayed { .. } => {
            return Err(ParamError::IncompatibleMode {
                estimator: "divergence demonstration",
                requirement: "a noisy channel",
            })
        }
    };
    check(epsilon > 0.0, "epsilon", "> 0", epsilon)?;
    check(p >= 0.5 && p.is_finite(), "p", ">= 1/2", p)?;
    let cap = params.horizon_cap.ok_or(ParamError::MissingHorizonCap)?;
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(ParamError::EmptySweep);
    }
    check(grid[0] >= 1, "n", ">= 1", grid[0] as f64)?;
    let n_max = *grid.last().expect("nonempty grid");

    let ell = params.ell;
    let taus = parallel_trials(workers, n_max, |i| {
        let mut streams = TrialStreams::for_trial(master_seed, 0, i);
        sample_driftless_passage(ell, cap, &mut streams)
    });

    Ok(grid
        .iter()
        .map(|&n| {
            let prefix = &taus[..n as usize];
            let mut values: Vec<f64> = prefix.iter().map(|fp| fp.tau as f64).collect();
            let eta_const = median(&mut values).expect("n >= 1");
            let moment: CompensatedSum = prefix
                .iter()
                .map(|fp| (fp.tau as f64 - eta_const).abs().powf(p))
                .collect();
            let truncated_count = prefix.iter().filter(|fp| fp.truncated).count() as u64;
            DivergenceRow {
                n,
                eta_const,
                empirical_moment: moment.value() / n as f64,
                truncated_count,
                truncation_rate: truncated_count as f64 / n as f64,
            }
        })
        .collect())
}

/// Distance between the standardized passage time
/// `sqrt(s^3/ell) (tau - ell/s)` and the standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltCheck {
    pub n: u64,
    /// Plain sup-distance of the empirical CDF. Because `tau` is
    /// integer-valued this cannot fall below half the largest lattice
    /// probability, whatever `n`.
    pub ks: f64,
    /// Sup-distance after spreading each lattice atom uniformly over the unit
    /// interval below it.
    pub ks_continuity_corrected: f64,
    pub truncated_count: u64,
}

pub fn empirical_cdf_check(
    params: &WalkParams,
    n: u64,
    master_seed: u64,
    workers: usize,
) -> Result<CltCheck> {
    check(params.s > 0.0, "s", "> 0", params.s)?;
    check(params.ell > 0.0, "ell", "> 0", params.ell)?;
    if n == 0 {
        return Err(ParamError::EmptySample);
    }
    params.horizon_cap()?;
    let passages = parallel_trials(workers, n, |i| {
        let mut streams = TrialStreams::for_trial(master_seed, 0, i);
        sample_first_passage(params, &mut streams)
    });
    let passages = passages.into_iter().collect::<Result<Vec<_>>>()?;
    let truncated_count = passages.iter().filter(|fp| fp.truncated).count() as u64;

    let (s, ell) = (params.s, params.ell);
    let mean = ell / s;
    let sd = (ell / s.powi(3)).sqrt();
    let mut taus: Vec<i64> = passages.iter().map(|fp| fp.tau as i64).collect();
    taus.sort_unstable();
    let standardized: Vec<f64> = taus.iter().map(|&t| (t as f64 - mean) / sd).collect();
    let ks = ks_distance(&standardized, clt_reference_cdf);

    let cdf = |x: f64| clt_reference_cdf((x - mean) / sd);
    let stationary = |slope: f64| {
        // pdf of tau's normal approximation equals the interpolation slope
        let level = slope * sd * (2.0 * PI).sqrt();
        if level > 0.0 && level <= 1.0 {
            let z = (-2.0 * level.ln()).sqrt();
            vec![mean - z * sd, mean + z * sd]
        } else {
            Vec::new()
        }
    };
    let ks_continuity_corrected = ks_distance_lattice(&taus, cdf, stationary);
    Ok(CltCheck {
        n,
        ks,
        ks_continuity_corrected,
        truncated_count,
    })
}

/// Empirical tail frequencies of the passage time next to their bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub z: f64,
    pub lower_bound: f64,
    /// Frequency of `mu < ell/s - z`.
    pub lower_empirical: f64,
    pub lower_stderr: f64,
    pub upper_bound: f64,
    /// Frequency of `mu > ell/s + z`.
    pub upper_empirical: f64,
    pub upper_stderr: f64,
}

/// Passage time `mu = inf{t >= 1 : S_t >= ell}` of a walk with increments
/// `N(s, sigma2)`, for an ascending, deduplicated `z` grid.
///
/// Every `z` must satisfy `0 <= z < ell/s`, the range of the lower bound.
pub fn tail_frequencies(
    ell: f64,
    s: f64,
    sigma2: f64,
    zs: &[f64],
    n: u64,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<TailRow>> {
    if n == 0 {
        return Err(ParamError::EmptySample);
    }
    if zs.is_empty() {
        return Err(ParamError::EmptySweep);
    }
    let mut grid = zs.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let bounds = grid
        .iter()
        .map(|&z| {
            Ok((
                theory::lower_tail_bound(ell, s, sigma2, z)?,
                theory::upper_tail_bound(ell, s, sigma2, z)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let sigma = sigma2.sqrt();
    let cap = default_horizon_cap(ell, s);
    let mus = parallel_trials(workers, n, |i| {
        let mut streams = TrialStreams::for_trial(master_seed, 0, i);
        let mut sum = 0.0;
        for t in 1..=cap {
            sum += s + sigma * streams.increment();
            if sum >= ell {
                return t;
            }
        }
        cap
    });

    let mean = ell / s;
    let nf = n as f64;
    let binomial_stderr = |freq: f64| (freq * (1.0 - freq) / nf).sqrt();
    Ok(grid
        .iter()
        .zip(bounds)
        .map(|(&z, (lower_bound, upper_bound))| {
            let below = mus.iter().filter(|&&mu| (mu as f64) < mean - z).count() as f64 / nf;
            let above = mus.iter().filter(|&&mu| (mu as f64) > mean + z).count() as f64 / nf;
            TailRow {
                z,
                lower_bound,
                lower_empirical: below,
                lower_stderr: binomial_stderr(below),
                upper_bound,
                upper_empirical: above,
                upper_stderr: binomial_stderr(above),
            }
        })
        .collect())
}

/// Mean absolute residual `|X_hat_t - X_t|` of the mmse estimate at a fixed
/// step, over `n` independent paths.
pub fn mmse_residual(
    s: f64,
    epsilon: f64,
    t: u64,
    n: u64,
    master_seed: u64,
    workers: usize,
) -> Result<MeanEstimate> {
    let params = WalkParams::noisy(s, 0.0, epsilon)?;
    check(t >= 1, "t", ">= 1", t as f64)?;
    if n == 0 {
        return Err(ParamError::EmptySample);
    }
    let residuals = parallel_trials(workers, n, |i| {
        let mut streams = TrialStreams::for_trial(master_seed, 0, i);
        let mut state = PathState::ORIGIN;
        for _ in 0..t {
            let v = streams.increment();
            let w = streams.noise();
            state = advance(state, &params, v, w);
        }
        (crate::estimators::mmse_estimate(state.y, t, s, epsilon) - state.x).abs()
    });
    Ok(mean_and_stderr(residuals.iter().copied()))
}
