use rayon::prelude::*;

use crate::data::{CondensedDistances, Dataset};
use crate::error::{Error, Result};
use crate::kernels::SmoothingKernel;
use crate::locfit::hat_coefficients;
use crate::simulate::model::CorrelationModel;

/// Default correlation threshold for `sse_cor`.
pub const DEFAULT_ZETA: f64 = 0.02;

/// `(1/n) sum (fitted_i - truth_i)^2`.
pub fn mse_prac(fitted: &[f64], truth: &[f64]) -> Result<f64> {
    if fitted.len() != truth.len() || fitted.is_empty() {
        return Err(Error::invalid(
            "fitted and true values must have equal nonzero length",
        ));
    }
    Ok(fitted
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / fitted.len() as f64)
}

/// Mean of `(estimate - sigma2)^2` over trials.
pub fn mse_sigma2(estimates: &[f64], sigma2: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::invalid("no variance estimates"));
    }
    Ok(estimates.iter().map(|s| (s - sigma2).powi(2)).sum::<f64>() / estimates.len() as f64)
}

/// Sum over unordered pairs whose true correlation is at least `zeta` of the
/// squared error of the estimated correlation at that pair's distance.
pub fn sse_cor(
    rho_hat: impl Fn(f64) -> f64 + Sync,
    model: &CorrelationModel,
    distances: &CondensedDistances,
    zeta: f64,
) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::invalid(format!("zeta = {zeta} outside (0, 1)")));
    }
    let n = distances.n();
    // Collected first so the summation order does not depend on scheduling.
    let terms: Vec<f64> = distances
        .values()
        .par_iter()
        .map(|&d| {
            let rho = model.correlation(d, n);
            if rho >= zeta {
                (rho_hat(d) - rho).powi(2)
            } else {
                0.0
            }
        })
        .collect();
    Ok(terms.iter().sum())
}

/// `(2 sigma2 / n) sum_i sum_{s != i} c_is rho_n(|Xi - Xs|)`, the
/// correlation term in the expected RSS.
pub fn correlation_penalty(
    data: &Dataset,
    model: &CorrelationModel,
    h: f64,
    k: &SmoothingKernel,
) -> Result<f64> {
    let n = data.n();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let c = hat_coefficients(data, i, h, k)?;
            let xi = data.point(i);
            Ok(c.iter()
                .enumerate()
                .filter(|&(s, &w)| s != i && w != 0.0)
                .map(|(s, &w)| w * model.correlation(data.distance(xi, data.point(s)), n))
                .sum())
        })
        .collect::<Result<_>>()?;
    Ok(2.0 * model.sigma2 / n as f64 * rows.iter().sum::<f64>())
}

/// Sample mean and standard deviation (`n - 1` denominator, 0 for one value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
