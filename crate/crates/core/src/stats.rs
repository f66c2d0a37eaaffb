//! Order-stable reductions and empirical-distribution distances.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Sample mean and standard error of the mean, accumulated in iteration
/// order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub n: u64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator) over `sqrt(n)`; 0 when
    /// fewer than two values.
    pub stderr: f64,
}

pub fn mean_and_stderr(values: impl IntoIterator<Item = f64> + Clone) -> MeanEstimate {
    let mut n = 0u64;
    let mut total = CompensatedSum::new();
    for v in values.clone() {
        n += 1;
        total.add(v);
    }
    if n == 0 {
        return MeanEstimate {
            n,
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = total.value() / n as f64;
    // two-pass variance: exact zero for constant samples
    let squares: CompensatedSum = values
        .into_iter()
        .map(|v| (v - mean) * (v - mean))
        .collect();
    let stderr = if n > 1 {
        (squares.value() / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    MeanEstimate { n, mean, stderr }
}

/// Median of a nonempty sample (mean of the two middle values for even
/// sizes). Reorders `values`.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mid = values.len() / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if values.len() % 2 == 1 {
        return Some(upper);
    }
    let lower = values[..mid]
        .iter()
        .copied()
        .max_by(f64::total_cmp)
        .expect("nonempty lower half");
    Some(0.5 * (lower + upper))
}

/// Kolmogorov–Smirnov distance `sup_x |F_n(x) - F(x)|` between the empirical
/// CDF of `sorted` (ascending) and a continuous CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        // walk over ties so that the step is taken once
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        sup = sup
            .max((f - i as f64 / n).abs())
            .max((j as f64 / n - f).abs());
        i = j;
    }
    sup
}

/// Sup-distance between a continuous CDF and the continuity-corrected
/// empirical CDF of an integer-valued sample.
///
/// The corrected CDF interpolates linearly between `(k, F_n(k))` at
/// consecutive integers, i.e. it is the exact CDF of `K - U` with `U` uniform
/// on `[0, 1)`. `cdf` and `pdf` are the reference distribution in the
/// sample's own units. The supremum on each unit interval is located exactly:
/// at the endpoints or where `pdf` equals the interpolation slope, for which
/// `stationary` returns the candidate points.
pub fn ks_distance_lattice(
    sorted: &[i64],
    cdf: impl Fn(f64) -> f64,
    stationary: impl Fn(f64) -> Vec<f64>,
) -> f64 {
    let Some((&first, &last)) = sorted.first().zip(sorted.last()) else {
        return f64::NAN;
    };
    let n = sorted.len() as f64;
    // below the support the corrected CDF is 0, above it 1
    let mut sup = cdf((first - 1) as f64).max(1.0 - cdf(last as f64));
    let mut idx = 0;
    let mut prev = 0.0;
    for k in first..=last {
        while idx < sorted.len() && sorted[idx] <= k {
            idx += 1;
        }
        let at_k = idx as f64 / n;
        let slope = at_k - prev;
        let (lo, hi) = ((k - 1) as f64, k as f64);
        sup = sup.max((at_k - cdf(hi)).abs());
        for x in stationary(slope) {
            if x > lo && x < hi {
                let interp = prev + slope * (x - lo);
                sup = sup.max((interp - cdf(x)).abs());
            }
        }
        prev = at_k;
    }
    sup
}
