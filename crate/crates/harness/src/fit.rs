//! Slope fits of log-variance against qubit number.

use mcm_core::stats::{ols, LinearFit};

use crate::error::{HarnessError, Result};
use crate::experiments::ResultRow;

/// What is regressed against `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogScale {
    /// `log2 Var`.
    Variance,
    /// `log2 √Var`.
    StdDev,
}

/// OLS of `log2(variance)` (or its half) against `n`.
pub fn fit_log2(points: &[(usize, f64)], scale: LogScale) -> Result<LinearFit> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(n, v) in points {
        if !(v > 0.0) {
            return Err(HarnessError::NonPositiveVariance { n, variance: v });
        }
        xs.push(n as f64);
        ys.push(match scale {
            LogScale::Variance => v.log2(),
            LogScale::StdDev => 0.5 * v.log2(),
        });
    }
    Ok(ols(&xs, &ys)?)
}

/// Fits the rows selected by `keep`, using their `n` and `variance`.
pub fn fit_slope<'a, I, F>(rows: I, keep: F, scale: LogScale) -> Result<LinearFit>
where
    I: IntoIterator<Item = &'a ResultRow>,
    F: Fn(&ResultRow) -> bool,
{
    let points: Vec<(usize, f64)> = rows.into_iter().filter(|r| keep(r)).map(|r| (r.n, r.variance)).collect();
    fit_log2(&points, scale)
}
