//! Adaptive Gauss–Kronrod (7/15) quadrature, used as an independent oracle
//! for closed forms in the theory module.

#![allow(dead_code)]

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (est, err) = kronrod(f, a, b);
    if depth == 0 || err <= tol.max(1e-15 * est.abs()) {
        return est;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    adapt(&f, a, b, tol, 48)
}

/// `∫_0^∞ f` by summing unit-width panels of geometrically growing length
/// until a panel contributes less than `tol`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut a = 0.0;
    let mut width = 1.0;
    for _ in 0..200 {
        let piece = integrate(&f, a, a + width, tol * 1e-3);
        total += piece;
        if piece.abs() < tol * 1e-3 && a > 1.0 {
            break;
        }
        a += width;
        width *= 1.5;
    }
    total
}

/// Standard normal density, written out independently of the crate.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E|N|^p` by quadrature. The substitution `x = u^2` keeps the integrand
/// smooth at the origin for fractional `p`.
pub fn gauss_abs_moment(p: f64) -> f64 {
    2.0 * integrate_half_line(|u| 2.0 * u.powf(2.0 * p + 1.0) * phi(u * u), 1e-14)
}

/// Standard normal CDF by quadrature of the density.
pub fn normal_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        0.5 + integrate(phi, 0.0, x, 1e-15)
    } else {
        0.5 - integrate(phi, x, 0.0, 1e-15)
    }
}
