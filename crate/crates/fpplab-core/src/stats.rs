//! Small statistics toolkit: sample moments, least-squares survival-tail
//! fits, percentile bootstrap, and the Student-t tail needed for fit
//! diagnostics.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation.
pub fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    libm::sqrt(ss / (n - 1) as f64)
}

/// Standard error of the sample mean.
pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    sample_sd(xs) / libm::sqrt(xs.len() as f64)
}

/// Empirical quantile of a sorted slice (linear interpolation).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Percentile bootstrap 95% interval. The estimator receives a resampled
/// index multiset over `0..n`.
pub fn bootstrap_ci_95(
    n: usize,
    resamples: usize,
    rng: &mut impl Rng,
    mut stat: impl FnMut(&[usize]) -> f64,
) -> (f64, f64) {
    let mut idx = vec![0usize; n];
    let mut vals = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for v in idx.iter_mut() {
            *v = rng.gen_range(0..n);
        }
        vals.push(stat(&idx));
    }
    vals.sort_by(f64::total_cmp);
    (quantile_sorted(&vals, 0.025), quantile_sorted(&vals, 0.975))
}

/// Ordinary least squares of `y` on `x`.
#[derive(Debug, Clone, Copy)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Two-sided p-value for slope != 0 (Student t, n-2 df).
    pub p_value: f64,
    pub n: usize,
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(Error::InsufficientSamples);
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut sse = 0.0;
    for i in 0..n {
        let r = y[i] - intercept - slope * x[i];
        sse += r * r;
    }
    let df = (n - 2) as f64;
    let sigma2 = sse / df;
    let slope_stderr = libm::sqrt(sigma2 / sxx);
    let p_value = if slope_stderr == 0.0 {
        0.0
    } else {
        student_t_two_sided(slope / slope_stderr, df)
    };
    Ok(OlsFit { slope, intercept, slope_stderr, p_value, n })
}

/// Exponential-tail fit of integer waiting times: least squares of the log
/// empirical survival `log P(T >= n)` over the range where the survival is
/// at least `10 / sample_size`. `rate` is the decay constant, `prefactor`
/// the fitted multiplier.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub rate: f64,
    pub prefactor: f64,
    pub rate_stderr: f64,
    pub sample_size: usize,
    /// Two-sided p-value of the fitted slope.
    pub goodness: f64,
}

pub fn fit_survival_tail(samples: &[u32], min_samples: usize) -> Result<TailFit> {
    let n = samples.len();
    if n < min_samples {
        return Err(Error::InsufficientSamples);
    }
    let max = *samples.iter().max().unwrap() as usize;
    // survival[v] = #{ samples >= v } for v in 1..=max
    let mut counts = vec![0u64; max + 2];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let mut survival = vec![0u64; max + 2];
    let mut acc = 0u64;
    for v in (0..=max).rev() {
        acc += counts[v];
        survival[v] = acc;
    }
    let floor = 10.0 / n as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (v, &surv) in survival.iter().enumerate().take(max + 1).skip(1) {
        let s = surv as f64 / n as f64;
        if s >= floor {
            xs.push(v as f64);
            ys.push(libm::log(s));
        }
    }
    if xs.len() < 3 {
        return Err(Error::DegenerateFit);
    }
    let fit = ols(&xs, &ys)?;
    Ok(TailFit {
        rate: -fit.slope,
        prefactor: libm::exp(fit.intercept),
        rate_stderr: fit.slope_stderr,
        sample_size: n,
        goodness: fit.p_value,
    })
}

/// Two-sided p-value of a Student-t statistic.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_beta(0.5 * df, 0.5, x)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_bt = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log(1.0 - x);
    let bt = libm::exp(ln_bt);
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * beta_cf(a, b, x) / a
    } else {
        1.0 - bt * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 3e-14;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..200 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::SplitMix64;

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((sample_sd(&xs) - 1.2909944487358056).abs() < 1e-12);
    }

    #[test]
    fn student_t_reference_values() {
        // frozen from scipy.stats.t.sf(t, df) * 2
        assert!((student_t_two_sided(0.0, 10.0) - 1.0).abs() < 1e-12);
        assert!((student_t_two_sided(2.0, 10.0) - 0.07338803).abs() < 1e-6);
        assert!((student_t_two_sided(1.0, 5.0) - 0.36321746).abs() < 1e-6);
        assert!((student_t_two_sided(4.0, 30.0) - 0.00038185).abs() < 1e-6);
    }

    #[test]
    fn ols_recovers_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.25 * v).collect();
        let fit = ols(&x, &y).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.p_value < 1e-12);
    }

    #[test]
    fn geometric_tail_recovered_within_5_percent() {
        // inverse-CDF sampling of a geometric law with success r
        let r = 0.4f64;
        let mut rng = SplitMix64::new(11);
        let samples: Vec<u32> = (0..200_000)
            .map(|_| {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                1 + (libm::log(1.0 - u) / libm::log(1.0 - r)) as u32
            })
            .collect();
        let fit = fit_survival_tail(&samples, 1000).unwrap();
        let expect = -libm::log(1.0 - r);
        assert!(
            (fit.rate - expect).abs() / expect < 0.05,
            "rate {} expected {expect}",
            fit.rate
        );
        assert!(fit.goodness < 0.01);
    }

    #[test]
    fn degenerate_survival_is_flagged() {
        let samples = vec![1u32; 5000];
        assert_eq!(fit_survival_tail(&samples, 1000).unwrap_err(), Error::DegenerateFit);
        assert_eq!(
            fit_survival_tail(&[1, 2, 3], 1000).unwrap_err(),
            Error::InsufficientSamples
        );
    }

    #[test]
    fn bootstrap_brackets_the_mean() {
        let mut rng = SplitMix64::new(3);
        let data: Vec<f64> = (0..400).map(|i| (i % 7) as f64).collect();
        let m = mean(&data);
        let (lo, hi) = bootstrap_ci_95(data.len(), 500, &mut rng, |idx| {
            idx.iter().map(|&i| data[i]).sum::<f64>() / idx.len() as f64
        });
        assert!(lo < m && m < hi);
        assert!(hi - lo < 1.0);
    }
}
