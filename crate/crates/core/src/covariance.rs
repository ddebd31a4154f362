//! Kernel-smoothed estimation of the error covariance as a function of lag.

use rayon::prelude::*;

use crate::bandwidth::log_spaced;
use crate::data::{CondensedDistances, Dataset};
use crate::error::{Error, Result};
use crate::kernels::{BoundaryKernel, CovarianceKernel1D, SmoothingKernel};
use crate::locfit::{fit_all, rss};

/// Default calibration tolerance `delta_n`.
pub const DEFAULT_DELTA: f64 = 2e-4;
/// Default number of positive lag grid points.
pub const DEFAULT_N_STAR: usize = 200;
/// Fraction of `sigma2_tilde` below which the pilot curve is truncated.
pub const TRUNCATION_FRACTION: f64 = 0.02;
/// Number of default `b` candidates.
pub const B_CANDIDATES: usize = 25;
/// `|c_hat| > SANITY_BOUND * sigma2_tilde` is flagged.
pub const SANITY_BOUND: f64 = 1.5;

const PILOT_POINTS: usize = 200;

/// Residual products over all pairs, sorted by distance, for repeated
/// evaluation of the smoothed covariance at many lags and bandwidths.
#[derive(Debug, Clone)]
pub struct CovarianceEstimator {
    n: usize,
    dist: Vec<f64>,
    prod: Vec<f64>,
    diag_sum: f64,
    median: f64,
    min_positive: Option<f64>,
}

impl CovarianceEstimator {
    pub fn new(eps: &[f64], distances: &CondensedDistances) -> Result<Self> {
        let n = distances.n();
        if eps.len() != n {
            return Err(Error::invalid(format!(
                "{} residuals for {} points",
                eps.len(),
                n
            )));
        }
        if eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("residuals must be finite"));
        }
        let mut pairs: Vec<(f64, f64)> = distances
            .pairs()
            .map(|(i, j, d)| (d, eps[i] * eps[j]))
            .collect();
        pairs.par_sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let (dist, prod): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let median = if dist.is_empty() {
            0.0
        } else {
            dist[dist.len() / 2]
        };
        let min_positive = dist.iter().copied().find(|&d| d > 0.0);
        let diag_sum = eps.iter().map(|e| e * e).sum();
        Ok(Self {
            n,
            dist,
            prod,
            diag_sum,
            median,
            min_positive,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Median pairwise distance.
    pub fn median_distance(&self) -> f64 {
        self.median
    }

    pub fn min_positive_distance(&self) -> Option<f64> {
        self.min_positive
    }

    /// Smoothed covariance at lag `t` with bandwidth `b`, summing over all
    /// ordered pairs including `i = j`. The boundary kernel with `q = t/b`
    /// is used when `t < b`.
    pub fn estimate(&self, t: f64, b: f64) -> Result<f64> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid(format!(
                "bandwidth b = {b} must be positive"
            )));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("lag t = {t} must be nonnegative")));
        }
        let boundary = (t < b).then(|| BoundaryKernel::for_lag(t, b));
        let weight = |d: f64| {
            let u = (t - d) / b;
            match &boundary {
                Some(k) => k.eval(u),
                None => CovarianceKernel1D.eval(u),
            }
        };
        let lo = self.dist.partition_point(|&d| d < t - b);
        let hi = self.dist.partition_point(|&d| d <= t + b);
        let w0 = weight(0.0);
        let mut num = w0 * self.diag_sum;
        let mut den = w0 * self.n as f64;
        let mut pair_num = 0.0;
        let mut pair_den = 0.0;
        for k in lo..hi {
            let w = weight(self.dist[k]);
            pair_num += w * self.prod[k];
            pair_den += w;
        }
        num += 2.0 * pair_num;
        den += 2.0 * pair_den;
        if den == 0.0 {
            return Err(Error::NoPairs { t, b });
        }
        Ok(num / den)
    }
}

/// One-shot `C_hat_n(t)` from residuals (or `C_tilde_n(t)` from true errors).
pub fn estimate_covariance(
    eps: &[f64],
    distances: &CondensedDistances,
    t: f64,
    b: f64,
) -> Result<f64> {
    CovarianceEstimator::new(eps, distances)?.estimate(t, b)
}

/// `h_T = h_o * n^(1/(D+4) - 1/(D+8))`, the bandwidth for the RSS variance estimate.
pub fn variance_bandwidth(h_o: f64, n: usize, dim: usize) -> f64 {
    let d = dim as f64;
    h_o * (n as f64).powf(1.0 / (d + 4.0) - 1.0 / (d + 8.0))
}

/// `sigma2_hat = RSS(h_T, K_o)`.
pub fn sigma2_rss(data: &Dataset, h_t: f64, ko: &SmoothingKernel) -> Result<f64> {
    if !(h_t > 0.0) {
        return Err(Error::invalid(format!("h_T = {h_t} must be positive")));
    }
    rss(&fit_all(data, h_t, ko))
}

/// 25 log-spaced values from the smallest positive pair distance to half the
/// median pair distance.
pub fn default_b_candidates(est: &CovarianceEstimator) -> Result<Vec<f64>> {
    let lo = est
        .min_positive_distance()
        .ok_or_else(|| Error::invalid("all pairwise distances are zero"))?;
    let hi = 0.5 * est.median_distance();
    if !(hi > lo) {
        return Err(Error::invalid(
            "half the median distance does not exceed the smallest distance",
        ));
    }
    Ok(log_spaced(lo, hi, B_CANDIDATES))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTrace {
    pub b_candidates: Vec<f64>,
    /// `C_hat(0)` per candidate.
    pub sigma2_tilde: Vec<f64>,
    /// `|sigma2_hat - sigma2_tilde(b)|` per candidate.
    pub discrepancy: Vec<f64>,
    /// Whether a candidate was added by bisection.
    pub refined: Vec<bool>,
    pub chosen_index: usize,
    pub chosen_b: f64,
    pub delta_n: f64,
    pub sigma2_hat: f64,
    /// No candidate met `delta_n`; the smallest discrepancy was used.
    pub fallback: bool,
}

/// Largest index with `discrepancy <= delta`, else the argmin (flagged).
pub fn choose_b(discrepancy: &[f64], delta: f64) -> Option<(usize, bool)> {
    if let Some(k) = discrepancy.iter().rposition(|&v| v <= delta) {
        return Some((k, false));
    }
    discrepancy
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| (k, true))
}

const BISECTION_STEPS: usize = 60;

/// Variance calibration: the largest `b` keeping `C_hat(0)` within
/// `delta_n` of `sigma2_hat`.
///
/// `C_hat(0)` is continuous in `b`, so when the candidates straddle
/// `sigma2_hat` above every qualifying candidate, the highest such bracket is
/// bisected and the point found is added to the trace. A zero `delta_n`
/// disables the bisection and always takes the grid rule.
pub fn calibrate_b(
    est: &CovarianceEstimator,
    sigma2_hat: f64,
    b_candidates: &[f64],
    delta_n: f64,
) -> Result<CalibrationTrace> {
    if b_candidates.is_empty() {
        return Err(Error::invalid("empty b candidate set"));
    }
    if b_candidates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("b candidates must be strictly increasing"));
    }
    if !(delta_n >= 0.0) {
        return Err(Error::invalid("delta_n must be nonnegative"));
    }
    if b_candidates.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::invalid("b candidates must be positive"));
    }
    let tilde = |b: f64| est.estimate(0.0, b).unwrap_or(f64::NAN);
    let mut b_all = b_candidates.to_vec();
    let mut sigma2_tilde: Vec<f64> = b_all.par_iter().map(|&b| tilde(b)).collect();
    let mut refined = vec![false; b_all.len()];

    let gap = |s: f64| s - sigma2_hat;
    let best_grid = sigma2_tilde.iter().rposition(|&s| gap(s).abs() <= delta_n);
    let bracket = (0..b_all.len() - 1).rev().find(|&k| {
        let (a, c) = (gap(sigma2_tilde[k]), gap(sigma2_tilde[k + 1]));
        a.is_finite() && c.is_finite() && a.signum() != c.signum()
    });
    if let Some(k) = bracket.filter(|&k| delta_n > 0.0 && best_grid.is_none_or(|q| k >= q)) {
        let (mut lo, mut hi) = (b_all[k], b_all[k + 1]);
        let lo_sign = gap(sigma2_tilde[k]).signum();
        let mut found = None;
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            let s = tilde(mid);
            if !s.is_finite() {
                break;
            }
            if gap(s).abs() <= delta_n {
                found = Some((mid, s));
                break;
            }
            if gap(s).signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        if let Some((b, s)) = found {
            b_all.insert(k + 1, b);
            sigma2_tilde.insert(k + 1, s);
            refined.insert(k + 1, true);
        }
    }

    let discrepancy: Vec<f64> = sigma2_tilde
        .iter()
        .map(|s| {
            let v = (sigma2_hat - s).abs();
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        })
        .collect();
    let (chosen_index, fallback) = choose_b(&discrepancy, delta_n)
        .ok_or_else(|| Error::invalid("no b candidate is usable"))?;
    if fallback {
        log::warn!(
            "variance calibration: no b within delta_n = {delta_n}; using argmin b = {} (discrepancy {:e})",
            b_all[chosen_index],
            discrepancy[chosen_index]
        );
    }
    Ok(CalibrationTrace {
        chosen_b: b_all[chosen_index],
        b_candidates: b_all,
        sigma2_tilde,
        discrepancy,
        refined,
        chosen_index,
        delta_n,
        sigma2_hat,
        fallback,
    })
}

/// Estimated covariance on a lag grid, zero beyond `truncation_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub t_grid: Vec<f64>,
    pub c_hat: Vec<f64>,
    pub b: f64,
    pub sigma2_hat: f64,
    pub sigma2_tilde: f64,
    pub truncation_t: f64,
    /// Grid lags dropped because their window held no pairs.
    pub dropped: Vec<f64>,
    /// Per grid point: `|c_hat| > 1.5 sigma2_tilde`.
    pub sanity_flags: Vec<bool>,
}

impl CovarianceEstimate {
    pub fn value_at(&self, t: f64) -> f64 {
        interpolate(&self.t_grid, &self.c_hat, self.truncation_t, t)
    }

    pub fn any_flagged(&self) -> bool {
        self.sanity_flags.iter().any(|&f| f)
    }
}

pub(crate) fn interpolate(ts: &[f64], vs: &[f64], truncation: f64, t: f64) -> f64 {
    if ts.is_empty() || t < 0.0 {
        return f64::NAN;
    }
    if t > 0.0 && t >= truncation {
        return 0.0;
    }
    let k = ts.partition_point(|&s| s <= t);
    if k == 0 {
        return vs[0];
    }
    if k == ts.len() {
        return vs[k - 1];
    }
    let (t0, t1) = (ts[k - 1], ts[k]);
    if t == t0 {
        return vs[k - 1];
    }
    let w = (t - t0) / (t1 - t0);
    vs[k - 1] + w * (vs[k] - vs[k - 1])
}

/// Lag at which a pilot curve first drops below `0.02 sigma2_tilde`
/// (this includes sign changes), scanning up to the median distance.
pub fn default_truncation(est: &CovarianceEstimator, b: f64, sigma2_tilde: f64) -> f64 {
    let top = est.median_distance();
    let threshold = TRUNCATION_FRACTION * sigma2_tilde.max(0.0);
    let pilot: Vec<f64> = (1..=PILOT_POINTS)
        .map(|k| top * k as f64 / PILOT_POINTS as f64)
        .collect();
    let values: Vec<Option<f64>> = pilot.par_iter().map(|&t| est.estimate(t, b).ok()).collect();
    pilot
        .iter()
        .zip(&values)
        .find(|(_, v)| matches!(v, Some(c) if *c < threshold))
        .map(|(&t, _)| t)
        .unwrap_or(top)
}

/// Evaluates the covariance estimate at `0` and `n_star` lags spanning
/// `(0, truncation_t]`; the last lag is set to zero.
pub fn covariance_curve(
    est: &CovarianceEstimator,
    sigma2_hat: f64,
    b: f64,
    n_star: usize,
    truncation_t: Option<f64>,
) -> Result<CovarianceEstimate> {
    if n_star < 2 {
        return Err(Error::invalid("n_star must be at least 2"));
    }
    let sigma2_tilde = est.estimate(0.0, b)?;
    let truncation_t = match truncation_t {
        Some(t) if t >= 0.0 && t.is_finite() => t,
        Some(t) => {
            return Err(Error::invalid(format!(
                "truncation lag {t} must be nonnegative"
            )))
        }
        None => default_truncation(est, b, sigma2_tilde),
    };
    let mut t_grid = vec![0.0];
    let mut c_hat = vec![sigma2_tilde];
    let mut dropped = Vec::new();
    if truncation_t > 0.0 {
        let lags: Vec<f64> = (1..=n_star)
            .map(|k| truncation_t * k as f64 / n_star as f64)
            .collect();
        let values: Vec<Result<f64>> = lags.par_iter().map(|&t| est.estimate(t, b)).collect();
        for (k, (t, v)) in lags.into_iter().zip(values).enumerate() {
            if k == n_star - 1 {
                t_grid.push(t);
                c_hat.push(0.0);
                continue;
            }
            match v {
                Ok(c) => {
                    t_grid.push(t);
                    c_hat.push(c);
                }
                Err(e) => {
                    log::warn!("covariance curve: lag {t} dropped: {e}");
                    dropped.push(t);
                }
            }
        }
    }
    let bound = SANITY_BOUND * sigma2_tilde.abs();
    let sanity_flags: Vec<bool> = c_hat.iter().map(|c| c.abs() > bound).collect();
    if sanity_flags.iter().any(|&f| f) {
        log::warn!("covariance curve exceeds 1.5 sigma2_tilde at some lags");
    }
    Ok(CovarianceEstimate {
        t_grid,
        c_hat,
        b,
        sigma2_hat,
        sigma2_tilde,
        truncation_t,
        dropped,
        sanity_flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationMode {
    /// Divide by `C_hat(0)`.
    #[default]
    ByChat0,
    /// Divide by the RSS-based `sigma2_hat`.
    BySigma2Hat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub t_grid: Vec<f64>,
    pub rho: Vec<f64>,
    pub truncation_t: f64,
    /// Some raw ratio fell outside `[-1, 1]` and was clamped.
    pub clamped: bool,
}

impl CorrelationEstimate {
    pub fn value_at(&self, t: f64) -> f64 {
        interpolate(&self.t_grid, &self.rho, self.truncation_t, t)
    }
}

pub fn estimate_correlation(
    cov: &CovarianceEstimate,
    mode: CorrelationMode,
) -> Result<CorrelationEstimate> {
    let denom = match mode {
        CorrelationMode::ByChat0 => cov.c_hat[0],
        CorrelationMode::BySigma2Hat => cov.sigma2_hat,
    };
    if !(denom > 0.0) {
        return Err(Error::invalid(format!(
            "correlation denominator {denom} is not positive"
        )));
    }
    let mut clamped = false;
    let rho = cov
        .c_hat
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            if k == 0 && mode == CorrelationMode::ByChat0 {
                return 1.0;
            }
            let r = c / denom;
            if r.abs() > 1.0 {
                clamped = true;
            }
            r.clamp(-1.0, 1.0)
        })
        .collect();
    if clamped {
        log::warn!("correlation estimate clamped to [-1, 1]");
    }
    Ok(CorrelationEstimate {
        t_grid: cov.t_grid.clone(),
        rho,
        truncation_t: cov.truncation_t,
        clamped,
    })
}

/// Options for [`analyze_residuals`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceOptions {
    pub delta_n: f64,
    pub n_star: usize,
    /// `None` uses the pilot-curve default.
    pub truncation_t: Option<f64>,
    /// `None` uses [`default_b_candidates`].
    pub b_candidates: Option<Vec<f64>>,
    pub mode: CorrelationMode,
}

impl Default for CovarianceOptions {
    fn default() -> Self {
        Self {
            delta_n: DEFAULT_DELTA,
            n_star: DEFAULT_N_STAR,
            truncation_t: None,
            b_candidates: None,
            mode: CorrelationMode::ByChat0,
        }
    }
}

/// Calibration, curve and correlation from one residual vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceAnalysis {
    pub calibration: CalibrationTrace,
    pub curve: CovarianceEstimate,
    pub correlation: CorrelationEstimate,
}

/// Runs variance calibration, evaluates the covariance curve at the chosen
/// `b` and normalizes it to a correlation.
pub fn analyze_residuals(
    eps: &[f64],
    distances: &CondensedDistances,
    sigma2_hat: f64,
    opts: &CovarianceOptions,
) -> Result<CovarianceAnalysis> {
    let est = CovarianceEstimator::new(eps, distances)?;
    let candidates = match &opts.b_candidates {
        Some(b) => b.clone(),
        None => default_b_candidates(&est)?,
    };
    let calibration = calibrate_b(&est, sigma2_hat, &candidates, opts.delta_n)?;
    let curve = covariance_curve(
        &est,
        sigma2_hat,
        calibration.chosen_b,
        opts.n_star,
        opts.truncation_t,
    )?;
    let correlation = estimate_correlation(&curve, opts.mode)?;
    Ok(CovarianceAnalysis {
        calibration,
        curve,
        correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_qualifying_candidate() {
        assert_eq!(choose_b(&[3e-4, 1e-4, 1e-4, 5e-4], 2e-4), Some((2, false)));
        assert_eq!(choose_b(&[1e-5, 1e-5], 2e-4), Some((1, false)));
        assert_eq!(choose_b(&[3e-4, 2.5e-4, 5e-4], 2e-4), Some((1, true)));
    }

    #[test]
    fn h_t_exponent() {
        let h = variance_bandwidth(0.2, 500, 2);
        assert!((h - 0.2 * 500f64.powf(1.0 / 15.0)).abs() < 1e-15);
    }

    #[test]
    fn interpolation_midpoint_and_truncation() {
        let ts = [0.0, 1.0, 2.0];
        let vs = [4.0, 2.0, 0.0];
        assert_eq!(interpolate(&ts, &vs, 2.0, 1.0), 2.0);
        assert_eq!(interpolate(&ts, &vs, 2.0, 0.5), 3.0);
        assert_eq!(interpolate(&ts, &vs, 2.0, 2.5), 0.0);
        assert_eq!(interpolate(&ts, &vs, 2.0, 0.0), 4.0);
    }
}
