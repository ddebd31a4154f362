use rayon::prelude::*;

use crate::bandwidth::grid::validate_grid;
use crate::bandwidth::select::argmin_with_ties;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::SmoothingKernel;
use crate::locfit::fit_with_leverage;

#[derive(Debug, Clone, PartialEq)]
pub struct GcvSelection {
    pub h: f64,
    pub grid: Vec<f64>,
    /// GCV score per grid point, `+inf` where infeasible.
    pub scores: Vec<f64>,
}

/// `RSS(h) / (1 - tr(H)/n)^2`, with `tr(H)` from the diagonal hat weights.
/// `None` if any fit is singular or the smoother interpolates.
pub fn gcv_score(data: &Dataset, h: f64, k: &SmoothingKernel) -> Option<f64> {
    if !(h > 0.0) {
        return None;
    }
    let parts: Option<Vec<(f64, f64)>> = (0..data.n())
        .into_par_iter()
        .map(|i| fit_with_leverage(data, i, h, k))
        .collect();
    let parts = parts?;
    let n = data.n() as f64;
    let rss = parts
        .iter()
        .zip(data.responses())
        .map(|((fit, _), y)| (y - fit).powi(2))
        .sum::<f64>()
        / n;
    let trace: f64 = parts.iter().map(|(_, c)| c).sum();
    let denom = (1.0 - trace / n).powi(2);
    (denom > 0.0 && trace < n).then(|| rss / denom)
}

/// Minimizes the GCV score over `grid` with kernel `ko`.
pub fn gcv_select(data: &Dataset, ko: &SmoothingKernel, grid: &[f64]) -> Result<GcvSelection> {
    validate_grid(grid)?;
    let scores: Vec<f64> = grid
        .iter()
        .map(|&h| gcv_score(data, h, ko).unwrap_or(f64::INFINITY))
        .collect();
    let scale = 1.0 + data.responses().iter().map(|y| y * y).sum::<f64>() / data.n() as f64;
    let best = argmin_with_ties(&scores, scale).ok_or(Error::AllInfeasible {
        largest: *grid.last().expect("validated nonempty"),
    })?;
    Ok(GcvSelection {
        h: grid[best],
        grid: grid.to_vec(),
        scores,
    })
}
