//! Closed-form constants and bounds that simulations are compared against.
//!
//! `sigma2` is the per-step variance of the walk whose passage time is being
//! bounded: 1 for the latent walk itself.

use std::f64::consts::PI;
use std::fmt;

use libm::{erfc, tgamma as gamma};

use crate::error::{check, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstantKind {
    C1,
    C2,
    FixedTimeRatio,
    GaussAbsMoment,
    TailBoundLower,
    TailBoundUpper,
    MomentBound,
}

impl ConstantKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConstantKind::C1 => "c1",
            ConstantKind::C2 => "c2",
            ConstantKind::FixedTimeRatio => "fixed_time_ratio",
            ConstantKind::GaussAbsMoment => "gauss_abs_moment",
            ConstantKind::TailBoundLower => "lower_tail_bound",
            ConstantKind::TailBoundUpper => "upper_tail_bound",
            ConstantKind::MomentBound => "centered_moment_bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstant {
    pub kind: ConstantKind,
    pub value: f64,
}

impl fmt::Display for TheoryConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {:?}", self.kind.name(), self.value)
    }
}

/// `E|N|^p` for a standard normal `N`: `2^{p/2} Γ((p+1)/2) / sqrt(π)`.
pub fn gauss_abs_moment(p: f64) -> Result<f64> {
    check(p >= 0.0 && p.is_finite(), "p", "finite and >= 0", p)?;
    Ok(2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / PI.sqrt())
}

/// Asymptotic minimal `p`-th moment of the tracking error under noisy
/// observations:
/// `(ell eps^2 / (s^3 (1 + eps^2)))^{p/2} E|N|^p`.
pub fn c1(ell: f64, s: f64, epsilon: f64, p: f64) -> Result<f64> {
    check(s > 0.0 && s.is_finite(), "s", "> 0", s)?;
    check(
        epsilon > 0.0 && epsilon.is_finite(),
        "epsilon",
        "> 0",
        epsilon,
    )?;
    check(ell >= 0.0 && ell.is_finite(), "ell", ">= 0", ell)?;
    check(p >= 1.0 && p.is_finite(), "p", ">= 1", p)?;
    let e2 = epsilon * epsilon;
    let scale = ell * e2 / (s.powi(3) * (1.0 + e2));
    Ok(scale.powf(p / 2.0) * gauss_abs_moment(p)?)
}

/// Asymptotic minimal `p`-th moment under a delay `d` with drift `s > 0`:
/// `d^{p/2} / s^p E|N|^p`.
pub fn c2(d: u64, s: f64, p: f64) -> Result<f64> {
    check(s > 0.0 && s.is_finite(), "s", "> 0", s)?;
    check(p >= 1.0 && p.is_finite(), "p", ">= 1", p)?;
    Ok((d as f64).powf(p / 2.0) / s.powf(p) * gauss_abs_moment(p)?)
}

/// Exact minimal `p`-th moment under a delay `d` without drift: `d^p`.
pub fn c2_driftless(d: u64, p: f64) -> Result<f64> {
    check(p >= 0.5 && p.is_finite(), "p", ">= 1/2", p)?;
    Ok((d as f64).powf(p))
}

/// Limit of `E|tau - ell/s|^p / c1` as the level grows:
/// `((1 + eps^2) / eps^2)^{p/2}`.
pub fn fixed_time_ratio(epsilon: f64, p: f64) -> Result<f64> {
    check(
        epsilon > 0.0 && epsilon.is_finite(),
        "epsilon",
        "> 0",
        epsilon,
    )?;
    check(p >= 0.0 && p.is_finite(), "p", "finite and >= 0", p)?;
    let e2 = epsilon * epsilon;
    Ok(((1.0 + e2) / e2).powf(p / 2.0))
}

fn check_walk(s: f64, sigma2: f64, z: f64) -> Result<()> {
    check(s > 0.0 && s.is_finite(), "s", "> 0", s)?;
    check(sigma2 > 0.0 && sigma2.is_finite(), "sigma2", "> 0", sigma2)?;
    check(z >= 0.0, "z", ">= 0", z)
}

/// Upper bound on `P(mu < ell/s - z)`, valid for `0 <= z < ell/s`.
pub fn lower_tail_bound(ell: f64, s: f64, sigma2: f64, z: f64) -> Result<f64> {
    check_walk(s, sigma2, z)?;
    let mean = ell / s;
    check(z < mean, "z", "< ell/s for the lower tail", z)?;
    Ok((-(s * s * z * z) / (2.0 * sigma2 * (mean - z))).exp())
}

/// Upper bound on `P(mu > ell/s + z)`, valid for `z >= 0`.
pub fn upper_tail_bound(ell: f64, s: f64, sigma2: f64, z: f64) -> Result<f64> {
    check_walk(s, sigma2, z)?;
    check(ell >= 0.0, "ell", ">= 0", ell)?;
    let denom = 2.0 * sigma2 * (ell / s + z);
    if denom == 0.0 {
        // ell = z = 0
        return Ok(1.0);
    }
    Ok((-(s * s * z * z) / denom).exp())
}

/// Explicit form of the bound `E|mu - ell/s|^p <= 2 (I1 + I2)` with
///
/// * `I1 <= k1 ell^{p/2}`, `k1 = (4 sigma2 / s^3)^{p/2} Γ(p/2 + 1)`,
/// * `I2 <= k2 = s^{-2p} ∫_0^∞ exp(-t^{1/p} / (8 sigma2)) dt
///            = s^{-2p} (8 sigma2)^p Γ(p + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBound {
    pub k1: f64,
    pub k2: f64,
    pub i1_bound: f64,
    pub i2_bound: f64,
    pub value: f64,
}

pub fn centered_moment_bound(ell: f64, s: f64, sigma2: f64, p: f64) -> Result<MomentBound> {
    check_walk(s, sigma2, 0.0)?;
    check(ell >= 0.0 && ell.is_finite(), "ell", ">= 0", ell)?;
    check(p > 0.0 && p.is_finite(), "p", "> 0", p)?;
    let k1 = (4.0 * sigma2 / s.powi(3)).powf(p / 2.0) * gamma(p / 2.0 + 1.0);
    let k2 = s.powf(-2.0 * p) * (8.0 * sigma2).powf(p) * gamma(p + 1.0);
    let i1_bound = k1 * ell.powf(p / 2.0);
    Ok(MomentBound {
        k1,
        k2,
        i1_bound,
        i2_bound: k2,
        value: 2.0 * (i1_bound + k2),
    })
}

/// Standard normal CDF.
pub fn clt_reference_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn clt_reference_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_moment_trivial_orders() {
        assert_relative_eq!(gauss_abs_moment(0.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gauss_abs_moment(2.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gauss_abs_moment(4.0).unwrap(), 3.0, max_relative = 1e-14);
        assert!(gauss_abs_moment(-1.0).is_err());
    }

    #[test]
    fn c1_examples() {
        assert_eq!(c1(0.0, 10.0, 0.5, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            c1(1000.0, 10.0, 0.5, 1.0).unwrap(),
            0.2f64.sqrt() * (2.0 / PI).sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            c1(1000.0, 10.0, 0.5, 1.0).unwrap(),
            0.356824823,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            c1(1000.0, 10.0, 0.1, 1.0).unwrap(),
            0.079392481,
            epsilon = 1e-9
        );
    }

    #[test]
    fn c1_rejections() {
        assert!(c1(1000.0, 0.0, 0.5, 1.0).is_err());
        assert!(c1(1000.0, 10.0, 0.0, 1.0).is_err());
        assert!(c1(1000.0, 10.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn c2_examples() {
        assert_eq!(c2(0, 1.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(c2(100, 1.0, 1.0).unwrap(), 7.978845608, epsilon = 1e-9);
        assert_relative_eq!(c2(400, 1.0, 1.0).unwrap(), 15.957691216, epsilon = 1e-9);
        assert!(c2(100, 0.0, 1.0).is_err());
        assert_eq!(c2_driftless(5, 2.0).unwrap(), 25.0);
    }

    #[test]
    fn fixed_time_ratio_examples() {
        assert_relative_eq!(
            fixed_time_ratio(0.5, 1.0).unwrap(),
            5f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            fixed_time_ratio(100.0, 1.0).unwrap(),
            1.00005,
            epsilon = 1e-8
        );
        assert_relative_eq!(
            fixed_time_ratio(0.1, 2.0).unwrap(),
            101.0,
            max_relative = 1e-12
        );
        assert!(fixed_time_ratio(0.0, 1.0).is_err());
    }

    #[test]
    fn tail_bound_examples() {
        assert_eq!(lower_tail_bound(1000.0, 10.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(upper_tail_bound(1000.0, 10.0, 1.0, 0.0).unwrap(), 1.0);
        let lower = lower_tail_bound(1000.0, 10.0, 1.0, 10.0).unwrap();
        assert_relative_eq!(lower, (-10_000.0f64 / 180.0).exp(), max_relative = 1e-14);
        assert!(lower > 7.4e-25 && lower < 7.6e-25, "{lower}");
        let upper = upper_tail_bound(1000.0, 10.0, 1.0, 10.0).unwrap();
        assert!(upper > 1.7e-20 && upper < 1.9e-20, "{upper}");
        assert!(lower_tail_bound(1000.0, 10.0, 1.0, 100.0).is_err());
        assert!(lower_tail_bound(1000.0, 10.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn moment_bound_at_p2() {
        let b = centered_moment_bound(1000.0, 10.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(b.i1_bound, 4.0 * 1000.0 / 1000.0, max_relative = 1e-14);
        assert_relative_eq!(b.k2, 64.0 * 2.0 / 1e4, max_relative = 1e-14);
        assert_relative_eq!(
            b.value,
            2.0 * (b.i1_bound + b.i2_bound),
            max_relative = 1e-15
        );
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_eq!(clt_reference_cdf(0.0), 0.5);
        assert_relative_eq!(clt_reference_cdf(1.959964), 0.975, epsilon = 1e-7);
        assert_relative_eq!(clt_reference_cdf(-1.959964), 0.025, epsilon = 1e-7);
    }
}
