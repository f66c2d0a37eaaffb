use std::num::NonZeroUsize;

use fpt_core::montecarlo::tail_frequencies;
use fpt_core::theory::{self, ConstantKind, TheoryConstant};
use fpt_core::{
    run_divergence_demo, run_experiment, ChannelKind, EstimatorKind, ExperimentConfig, LevelRule,
    PrecisionSpec, Sweep, WalkParams, DEFAULT_Q,
};

use crate::config::{List, Resolver};
use crate::error::CliError;
use crate::output::{num, CsvRow, Sink, MOMENT_HEADER};
use crate::{BoundsArgs, Common, ConstantsArgs, DelayedArgs, DivergeArgs, NoisyArgs};

/// Levels used when `--levels` is not given.
const DEFAULT_LEVELS: [f64; 7] = [250.0, 500.0, 1000.0, 2500.0, 5000.0, 1e4, 1e5];

struct Run {
    seed: u64,
    workers: usize,
}

fn common(resolver: &mut Resolver, args: &Common, command: &str) -> Result<Run, CliError> {
    resolver.record("command", command);
    let seed = resolver.seed(args.seed)?;
    let default_workers = std::thread::available_parallelism().map_or(1, NonZeroUsize::get);
    let workers = resolver.or("workers", args.workers, default_workers)?;
    if workers == 0 {
        return Err(CliError::Param("--workers must be >= 1".into()));
    }
    if let Some(out) = &args.out {
        resolver.record("out", out.display());
    }
    Ok(Run { seed, workers })
}

fn precision(
    resolver: &mut Resolver,
    delta: Option<f64>,
    n: Option<u64>,
    default_delta: f64,
) -> Result<PrecisionSpec, CliError> {
    let delta = resolver.or("delta", delta, default_delta)?;
    let spec = PrecisionSpec::new(delta)?;
    Ok(match resolver.get("n", n)? {
        Some(n) => spec.with_trials(n)?,
        None => spec,
    })
}

pub fn noisy(args: NoisyArgs) -> Result<(), CliError> {
    let mut r = Resolver::load(args.common.config.as_deref())?;
    let run = common(&mut r, &args.common, "noisy")?;
    let s = r.require("s", args.s)?;
    let eps = r.require("eps", args.eps)?;
    let p = r.or("p", args.p, 1.0)?;
    let q = r.or("q", args.q, DEFAULT_Q)?;
    let levels = r.or("levels", args.levels, List(DEFAULT_LEVELS.to_vec()))?;
    let precision = precision(&mut r, args.delta, args.n, 0.05)?;
    let cap = r.get("cap", args.cap)?;

    // Reject bad parameters before any simulation starts.
    theory::c1(0.0, s, eps, p)?;
    let mut params = WalkParams::noisy(s, 0.0, eps)?;
    if let Some(cap) = cap {
        params = params.with_horizon_cap(cap)?;
    }
    let config = ExperimentConfig {
        params,
        estimators: vec![
            EstimatorKind::SequentialMmse,
            EstimatorKind::SingleObservation { q },
            EstimatorKind::FixedTime,
        ],
        p,
        sweep: Sweep::Levels(levels.0),
        precision,
        master_seed: run.seed,
        workers: run.workers,
    };
    let estimates = run_experiment(&config)?;
    let rows = estimates
        .iter()
        .map(|e| CsvRow::from_estimate("noisy", e, s, eps, run.seed))
        .collect::<Result<Vec<_>, _>>()?;
    write_moment_rows(args.common.out.as_deref(), &rows, &r)
}

pub fn delayed(args: DelayedArgs) -> Result<(), CliError> {
    let mut r = Resolver::load(args.common.config.as_deref())?;
    let run = common(&mut r, &args.common, "delayed")?;
    let s: f64 = r.require("s", args.s)?;
    let p = r.or("p", args.p, 1.0)?;
    let delays: List<u64> = r.require("delays", args.delays)?;
    let level = match (r.get("ell", args.ell)?, r.get("ell-rule", args.ell_rule)?) {
        (Some(_), Some(_)) => {
            return Err(CliError::Param(
                "give either --ell or --ell-rule, not both".into(),
            ))
        }
        (Some(ell), None) => LevelRule::Fixed(ell),
        (None, Some(rule)) => LevelRule::Offset { base: rule.0 },
        (None, None) => {
            return Err(CliError::Param(
                "one of --ell or --ell-rule is required".into(),
            ))
        }
    };
    let precision = precision(&mut r, args.delta, args.n, 0.03)?;
    let cap = r.get("cap", args.cap)?;

    let mut params = WalkParams::delayed(s, 0.0, 0)?;
    match cap {
        Some(cap) => params = params.with_horizon_cap(cap)?,
        None if s == 0.0 => {
            return Err(CliError::Param(
                "--cap is required when s = 0: the passage time has infinite mean".into(),
            ))
        }
        None => {}
    }
    let config = ExperimentConfig {
        params,
        estimators: vec![EstimatorKind::DelayedThreshold],
        p,
        sweep: Sweep::Delays {
            delays: delays.0,
            level,
        },
        precision,
        master_seed: run.seed,
        workers: run.workers,
    };
    let estimates = run_experiment(&config)?;
    let rows = estimates
        .iter()
        .map(|e| CsvRow::from_estimate("delayed", e, s, 0.0, run.seed))
        .collect::<Result<Vec<_>, _>>()?;
    write_moment_rows(args.common.out.as_deref(), &rows, &r)
}

fn write_moment_rows(
    out: Option<&std::path::Path>,
    rows: &[CsvRow],
    resolver: &Resolver,
) -> Result<(), CliError> {
    let mut sink = Sink::open(out)?;
    sink.row(MOMENT_HEADER)?;
    for row in rows {
        sink.row(row.record())?;
    }
    sink.finish(resolver.resolved())
}

pub fn constants(args: ConstantsArgs) -> Result<(), CliError> {
    let mut r = Resolver::load(args.config.as_deref())?;
    let any = args.c1
        || args.c2
        || args.ft_ratio
        || args.gauss_moment
        || args.tail_lower
        || args.tail_upper
        || args.moment_bound;
    if !any {
        return Err(CliError::Param(
            "select at least one of --c1, --c2, --ft-ratio, --gauss-moment, --tail-lower, \
             --tail-upper, --moment-bound"
                .into(),
        ));
    }
    let p = r.or("p", args.p, 1.0)?;
    let mut lines = Vec::new();
    let mut push = |kind, value| lines.push(TheoryConstant { kind, value }.to_string());

    if args.gauss_moment {
        push(ConstantKind::GaussAbsMoment, theory::gauss_abs_moment(p)?);
    }
    if args.c1 {
        let ell = r.require("ell", args.ell)?;
        let s = r.require("s", args.s)?;
        let eps = r.require("eps", args.eps)?;
        push(ConstantKind::C1, theory::c1(ell, s, eps, p)?);
    }
    if args.c2 {
        let d = r.require("d", args.d)?;
        let s: f64 = r.require("s", args.s)?;
        let value = if s == 0.0 {
            theory::c2_driftless(d, p)?
        } else {
            theory::c2(d, s, p)?
        };
        push(ConstantKind::C2, value);
    }
    if args.ft_ratio {
        let eps = r.require("eps", args.eps)?;
        push(
            ConstantKind::FixedTimeRatio,
            theory::fixed_time_ratio(eps, p)?,
        );
    }
    if args.tail_lower || args.tail_upper || args.moment_bound {
        let ell = r.require("ell", args.ell)?;
        let s = r.require("s", args.s)?;
        let sigma2 = r.or("sigma2", args.sigma2, 1.0)?;
        if args.tail_lower || args.tail_upper {
            let z = r.require("z", args.z)?;
            if args.tail_lower {
                push(
                    ConstantKind::TailBoundLower,
                    theory::lower_tail_bound(ell, s, sigma2, z)?,
                );
            }
            if args.tail_upper {
                push(
                    ConstantKind::TailBoundUpper,
                    theory::upper_tail_bound(ell, s, sigma2, z)?,
                );
            }
        }
        if args.moment_bound {
            let bound = theory::centered_moment_bound(ell, s, sigma2, p)?;
            push(ConstantKind::MomentBound, bound.value);
            lines.push(format!("  k1 = {}", num(bound.k1)));
            lines.push(format!("  k2 = {}", num(bound.k2)));
            lines.push(format!("  i1_bound = {}", num(bound.i1_bound)));
            lines.push(format!("  i2_bound = {}", num(bound.i2_bound)));
        }
    }
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

pub fn bounds(args: BoundsArgs) -> Result<(), CliError> {
    let mut r = Resolver::load(args.common.config.as_deref())?;
    let run = common(&mut r, &args.common, "bounds")?;
    let ell = r.require("ell", args.ell)?;
    let s = r.require("s", args.s)?;
    let sigma2 = r.or("sigma2", args.sigma2, 1.0)?;
    let zs: List<f64> = r.require("z", args.z)?;
    let n = r.or("n", args.n, 100_000)?;
    let rows = tail_frequencies(ell, s, sigma2, &zs.0, n, run.seed, run.workers)?;

    let mut sink = Sink::open(args.common.out.as_deref())?;
    sink.row([
        "z",
        "lower_bound",
        "lower_empirical",
        "lower_stderr",
        "upper_bound",
        "upper_empirical",
        "upper_stderr",
    ])?;
    for row in rows {
        sink.row([
            num(row.z),
            num(row.lower_bound),
            num(row.lower_empirical),
            num(row.lower_stderr),
            num(row.upper_bound),
            num(row.upper_empirical),
            num(row.upper_stderr),
        ])?;
    }
    sink.finish(r.resolved())
}

pub fn diverge(args: DivergeArgs) -> Result<(), CliError> {
    let mut r = Resolver::load(args.common.config.as_deref())?;
    let run = common(&mut r, &args.common, "diverge")?;
    let ell = r.require("ell", args.ell)?;
    let s = r.or("s", args.s, 0.0)?;
    if s != 0.0 {
        return Err(CliError::Param(format!(
            "--s must be 0 for the divergence demonstration, got {s}"
        )));
    }
    let eps = r.or("eps", args.eps, 0.5)?;
    let p = r.or("p", args.p, 0.5)?;
    let cap = r.get("cap", args.cap)?.ok_or_else(|| {
        CliError::Param(
            "--cap is required: without drift the passage time has infinite mean".into(),
        )
    })?;
    let grid = r.or(
        "n-grid",
        args.n_grid,
        List(vec![1_000, 10_000, 100_000, 1_000_000]),
    )?;
    let params =
        WalkParams::new(s, ell, ChannelKind::Noisy { epsilon: eps })?.with_horizon_cap(cap)?;
    let rows = run_divergence_demo(&params, p, &grid.0, run.seed, run.workers)?;

    let mut sink = Sink::open(args.common.out.as_deref())?;
    sink.row([
        "n",
        "eta_const",
        "empirical_moment",
        "truncated_count",
        "truncation_rate",
        "ell",
        "p",
        "cap",
        "master_seed",
    ])?;
    for row in rows {
        sink.row([
            row.n.to_string(),
            num(row.eta_const),
            num(row.empirical_moment),
            row.truncated_count.to_string(),
            num(row.truncation_rate),
            num(ell),
            num(p),
            cap.to_string(),
            run.seed.to_string(),
        ])?;
    }
    sink.finish(r.resolved())
}
