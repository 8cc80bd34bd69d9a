//! Small statistics helpers shared by the estimators.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::noise::NoiseStream;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Two-sided Student-t critical value for confidence `level` with `df`
/// degrees of freedom.
pub fn t_critical(level: f64, df: usize) -> f64 {
    let t = StudentsT::new(0.0, 1.0, df.max(1) as f64).expect("valid t distribution");
    t.inverse_cdf(0.5 + level / 2.0)
}

/// `log(mean(exp(xs)))`, computed without overflow.
pub fn log_mean_exp(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + (s / xs.len() as f64).ln()
}

/// Kish effective sample size of the weights `exp(log_w)`.
pub fn effective_sample_size(log_w: &[f64]) -> f64 {
    let m = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (s1, s2) = log_w.iter().fold((0.0, 0.0), |(a, b), x| {
        let w = (x - m).exp();
        (a + w, b + w * w)
    });
    s1 * s1 / s2
}

/// Bootstrap standard error of `stat` over resamples of `xs`.
pub fn bootstrap_se(xs: &[f64], resamples: usize, rng: &mut NoiseStream, stat: impl Fn(&[f64]) -> f64) -> f64 {
    let n = xs.len();
    let mut buf = vec![0.0; n];
    let vals: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.index_below(n)];
            }
            stat(&buf)
        })
        .collect();
    variance(&vals).sqrt()
}

/// Ordinary least squares fit `y = a + b x`; returns `(a, b, se_b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let se_b = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (a, b, se_b)
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Running sum with Kahan compensation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_mean_exp_is_stable() {
        assert_eq!(log_mean_exp(&[0.0, 0.0]), 0.0);
        let v = log_mean_exp(&[1000.0, 1000.0 + 2f64.ln()]);
        assert!((v - (1000.0 + 1.5f64.ln())).abs() < 1e-12);
        assert!((log_mean_exp(&[-800.0, -800.0]) + 800.0).abs() < 1e-12);
    }

    #[test]
    fn ess_bounds() {
        assert!((effective_sample_size(&[0.0; 10]) - 10.0).abs() < 1e-12);
        assert!((effective_sample_size(&[0.0, -1e6, -1e6]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_critical_matches_tables() {
        assert!((t_critical(0.95, 19) - 2.093).abs() < 1e-3);
        assert!((t_critical(0.95, 100_000) - 1.960).abs() < 1e-3);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.5 + 2.0 * v).collect();
        let (a, b, se) = linear_fit(&x, &y);
        assert!((a - 1.5).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && se < 1e-12);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
