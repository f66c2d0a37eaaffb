mod common;

use approx::assert_relative_eq;
use fpt_core::estimators::{t_star, EstimatorKind};
use fpt_core::montecarlo::required_samples;
use fpt_core::theory::{
    c1, c2, c2_driftless, centered_moment_bound, clt_reference_cdf, fixed_time_ratio,
    gauss_abs_moment, lower_tail_bound, upper_tail_bound,
};

#[test]
fn gauss_moment_matches_quadrature() {
    for p in [0.5, 1.0, 1.5, 2.0, 3.0, 4.0] {
        let closed = gauss_abs_moment(p).unwrap();
        let quad = common::gauss_abs_moment(p);
        let rel = (closed - quad).abs() / quad;
        assert!(rel < 1e-10, "p={p}: {closed} vs {quad} (rel {rel:e})");
    }
}

#[test]
fn gauss_moment_known_values() {
    assert_relative_eq!(gauss_abs_moment(0.0).unwrap(), 1.0, max_relative = 1e-14);
    assert_relative_eq!(
        gauss_abs_moment(1.0).unwrap(),
        (2.0 / std::f64::consts::PI).sqrt(),
        max_relative = 1e-14
    );
    assert_relative_eq!(gauss_abs_moment(2.0).unwrap(), 1.0, max_relative = 1e-14);
    assert_relative_eq!(gauss_abs_moment(4.0).unwrap(), 3.0, max_relative = 1e-14);
}

#[test]
fn normal_cdf_matches_quadrature() {
    for x in [-3.0, -1.0, -0.2, 0.0, 0.7, 1.959964, 4.0] {
        assert!(
            (clt_reference_cdf(x) - common::normal_cdf(x)).abs() < 1e-14,
            "x={x}"
        );
    }
    assert!((clt_reference_cdf(1.959964) - 0.975).abs() < 1e-7);
}

#[test]
fn moment_bound_k2_matches_quadrature() {
    for (s, sigma2, p) in [
        (1.0, 1.0, 1.0),
        (10.0, 1.0, 1.0),
        (2.0, 0.5, 2.0),
        (3.0, 2.0, 3.0),
    ] {
        let bound = centered_moment_bound(100.0, s, sigma2, p).unwrap();
        let integral: f64 =
            common::integrate_half_line(|t: f64| (-t.powf(1.0 / p) / (8.0 * sigma2)).exp(), 1e-12);
        let quad = integral / f64::powf(s, 2.0 * p);
        assert_relative_eq!(bound.k2, quad, max_relative = 1e-9);
        // k1 = (4 sigma2 / s^3)^{p/2} Γ(p/2 + 1), with Γ from quadrature
        let gamma = common::integrate_half_line(|t: f64| t.powf(p / 2.0) * (-t).exp(), 1e-13);
        let k1 = (4.0 * sigma2 / s.powi(3)).powf(p / 2.0) * gamma;
        assert_relative_eq!(bound.k1, k1, max_relative = 1e-9);
        assert_relative_eq!(
            bound.value,
            2.0 * (k1 * 100f64.powf(p / 2.0) + quad),
            max_relative = 1e-9
        );
    }
}

#[test]
fn c1_reference_values() {
    // (1000 * 0.25 / (1000 * 1.25))^{1/2} * sqrt(2/pi) = sqrt(0.2) * sqrt(2/pi)
    let expected = (0.2f64).sqrt() * (2.0 / std::f64::consts::PI).sqrt();
    assert_relative_eq!(
        c1(1000.0, 10.0, 0.5, 1.0).unwrap(),
        expected,
        max_relative = 1e-14
    );
    assert!((c1(1000.0, 10.0, 0.5, 1.0).unwrap() - 0.356_824_823).abs() < 1e-9);
    assert!((c1(1000.0, 10.0, 0.1, 1.0).unwrap() - 0.079_392_481).abs() < 1e-9);
}

#[test]
fn c1_homogeneity() {
    for p in [1.0, 1.5, 2.0, 3.0] {
        for lambda in [0.25, 2.0, 10.0] {
            let base = c1(1000.0, 10.0, 0.5, p).unwrap();
            // ell^{p/2}
            let scaled = c1(lambda * 1000.0, 10.0, 0.5, p).unwrap();
            assert_relative_eq!(scaled, lambda.powf(p / 2.0) * base, max_relative = 1e-12);
            // s^{-3p/2}
            let scaled = c1(1000.0, lambda * 10.0, 0.5, p).unwrap();
            assert_relative_eq!(scaled, lambda.powf(-1.5 * p) * base, max_relative = 1e-12);
        }
    }
}

#[test]
fn c2_homogeneity() {
    for p in [1.0, 2.0, 2.5] {
        let base = c2(10, 2.0, p).unwrap();
        for k in [2u64, 5, 40] {
            let scaled = c2(10 * k, 2.0, p).unwrap();
            assert_relative_eq!(
                scaled,
                (k as f64).powf(p / 2.0) * base,
                max_relative = 1e-12
            );
        }
        for lambda in [0.5, 3.0] {
            let scaled = c2(10, 2.0 * lambda, p).unwrap();
            assert_relative_eq!(scaled, lambda.powf(-p) * base, max_relative = 1e-12);
        }
        assert_relative_eq!(
            c2_driftless(7, p).unwrap(),
            7f64.powf(p),
            max_relative = 1e-15
        );
    }
    // d^{p/2} / s^p E|N|^p at d = 100, s = 1, p = 1
    assert_relative_eq!(
        c2(100, 1.0, 1.0).unwrap(),
        10.0 * (2.0 / std::f64::consts::PI).sqrt(),
        max_relative = 1e-14
    );
}

#[test]
fn fixed_time_ratio_values() {
    assert_relative_eq!(
        fixed_time_ratio(0.5, 1.0).unwrap(),
        5f64.sqrt(),
        max_relative = 1e-15
    );
    assert!((fixed_time_ratio(0.5, 1.0).unwrap() - 2.236_067_9).abs() < 1e-7);
    let mut last = f64::INFINITY;
    for eps in [0.05, 0.1, 0.5, 1.0, 2.0, 10.0] {
        let r = fixed_time_ratio(eps, 1.0).unwrap();
        assert!(r < last && r > 1.0);
        last = r;
    }
    assert!(fixed_time_ratio(0.0, 1.0).is_err());
}

#[test]
fn tail_bounds_shape() {
    assert_eq!(lower_tail_bound(1000.0, 10.0, 1.0, 0.0).unwrap(), 1.0);
    assert_eq!(upper_tail_bound(1000.0, 10.0, 1.0, 0.0).unwrap(), 1.0);
    // exp(-100 * 25 / (2 * 95))
    assert_relative_eq!(
        lower_tail_bound(1000.0, 10.0, 1.0, 5.0).unwrap(),
        (-2500.0f64 / 190.0).exp(),
        max_relative = 1e-14
    );
    assert!(lower_tail_bound(1000.0, 10.0, 1.0, 100.0).is_err());
    assert!(lower_tail_bound(1000.0, 10.0, 1.0, -1.0).is_err());
}

#[test]
fn sample_sizes() {
    let seq = EstimatorKind::SequentialMmse;
    assert_eq!(required_samples(0.05, &seq, 0.5).unwrap(), 12_567);
    assert_eq!(
        required_samples(0.03, &EstimatorKind::DelayedThreshold, 0.0).unwrap(),
        58_178
    );
    assert_eq!(
        required_samples(0.1, &EstimatorKind::FixedTime, 0.5).unwrap(),
        7_854
    );
    assert!(required_samples(1.0, &seq, 0.5).is_err());
}

#[test]
fn t_star_examples() {
    assert_eq!(t_star(1000.0, 10.0, 0.51).unwrap(), 89);
    assert_eq!(t_star(1.0, 1.0, 0.51).unwrap(), 0);
    assert!(t_star(0.5, 1.0, 0.51).is_err());
}
