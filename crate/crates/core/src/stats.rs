//! Summary statistics and least-squares fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = CompensatedSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample variance (two-pass).
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    compensated_sum(xs.iter().map(|x| (x - m) * (x - m))) / (xs.len() - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean.
    pub mean_stderr: f64,
    /// Standard error of the sample variance, from the fourth central moment.
    pub variance_stderr: f64,
    pub second_moment: f64,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let count = xs.len();
    let m = mean(xs);
    let var = sample_variance(xs);
    let nf = count as f64;
    let mu4 = compensated_sum(xs.iter().map(|x| (x - m).powi(4))) / nf;
    let sigma2 = compensated_sum(xs.iter().map(|x| (x - m) * (x - m))) / nf;
    let vv = if count > 3 { (mu4 - sigma2 * sigma2 * (nf - 3.0) / (nf - 1.0)) / nf } else { f64::NAN };
    Summary {
        count,
        mean: m,
        variance: var,
        mean_stderr: (var / nf).sqrt(),
        variance_stderr: vv.max(0.0).sqrt(),
        second_moment: compensated_sum(xs.iter().map(|x| x * x)) / nf,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::InvalidArgument("a fit needs at least three points".into()));
    }
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx = compensated_sum(x.iter().map(|a| (a - mx) * (a - mx)));
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all x values coincide".into()));
    }
    let sxy = compensated_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = compensated_sum(x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)));
    let s2 = rss / (n - 2.0);
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr: (s2 / sxx).sqrt(),
        intercept_stderr: (s2 * (1.0 / n + mx * mx / sxx)).sqrt(),
    })
}
