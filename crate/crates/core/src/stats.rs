//! Small sample statistics used by the Monte Carlo checks.

use alloc::vec::Vec;

use crate::math;

/// Sample mean with its standard error `s/√n`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl MeanEstimate {
    /// Two-pass mean and unbiased variance, shifted by the first sample
    /// (constant samples give their value and a zero error exactly).
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, n };
        }
        let shift = xs[0];
        let mean = shift + xs.iter().map(|x| x - shift).sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, std_error: 0.0, n };
        }
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        Self { mean, std_error: math::sqrt(var / n as f64), n }
    }

    /// `a − b` for independent estimates.
    pub fn difference(&self, other: &Self) -> Self {
        Self {
            mean: self.mean - other.mean,
            std_error: math::sqrt(self.std_error * self.std_error + other.std_error * other.std_error),
            n: self.n.min(other.n),
        }
    }

    /// Whether `value` lies within `k` standard errors plus `slack`.
    pub fn covers(&self, value: f64, k: f64, slack: f64) -> bool {
        math::abs(self.mean - value) <= k * self.std_error + slack
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * math::erfc(-z / core::f64::consts::SQRT_2)
}

/// Kolmogorov–Smirnov statistic `sup |F_n − F|` of a sample against `cdf`.
/// Non-finite samples are dropped.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        // Ties move the empirical CDF by their multiplicity at once.
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        d = d.max(math::abs(f - i as f64 / n)).max(math::abs((j + 1) as f64 / n - f));
        i = j + 1;
    }
    d
}

/// Asymptotic one-sample KS critical value `√(−ln(α/2)/2)/√n`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    math::sqrt(-math::ln(alpha / 2.0) / 2.0) / math::sqrt(n as f64)
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa: Vec<f64> = a.iter().copied().filter(|x| x.is_finite()).collect();
    let mut xb: Vec<f64> = b.iter().copied().filter(|x| x.is_finite()).collect();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let v = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] == v {
            i += 1;
        }
        while j < xb.len() && xb[j] == v {
            j += 1;
        }
        d = d.max(math::abs(i as f64 / na - j as f64 / nb));
    }
    d
}

/// Two-sample KS critical value at level `alpha`.
pub fn ks_two_sample_critical(na: usize, nb: usize, alpha: f64) -> f64 {
    let (a, b) = (na as f64, nb as f64);
    math::sqrt(-math::ln(alpha / 2.0) / 2.0) * math::sqrt((a + b) / (a * b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        let e = MeanEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(MeanEstimate::from_samples(&[1.0; 10]).std_error, 0.0);
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let xs: alloc::vec::Vec<f64> = (0..100).map(|k| (k as f64 + 0.5) / 100.0).collect();
        assert!((ks_statistic(&xs, |x| x.clamp(0.0, 1.0)) - 0.005).abs() < 1e-12);
        assert!((ks_critical_value(100, 0.01) - 0.16276).abs() < 1e-4);
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
    }
}
