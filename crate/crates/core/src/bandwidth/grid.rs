//! Data-driven candidate bandwidth grids.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{Reach, SmoothingKernel};

/// Default number of grid points.
pub const GRID_POINTS: usize = 30;
/// Fraction of design points that must have enough neighbors at `h_min`.
pub const COVERAGE: f64 = 0.99;

const SCAN_POINTS: usize = 400;

/// Sorted neighbor distances of every design point, shared by grid builders.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    dim: usize,
    radial: Vec<Vec<f64>>,
    chebyshev: Vec<Vec<f64>>,
    diameter: f64,
}

impl NeighborIndex {
    pub fn new(data: &Dataset) -> Self {
        let n = data.n();
        let dim = data.dim();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = data.point(i);
                let mut off = vec![0.0; dim];
                let mut rad = Vec::with_capacity(n - 1);
                let mut cheb = Vec::with_capacity(n - 1);
                for j in (0..n).filter(|&j| j != i) {
                    let p = data.point(j);
                    rad.push(data.distance(x, p));
                    data.offset(x, p, &mut off);
                    cheb.push(off.iter().fold(0.0f64, |a, v| a.max(v.abs())));
                }
                rad.sort_by(f64::total_cmp);
                cheb.sort_by(f64::total_cmp);
                (rad, cheb)
            })
            .collect();
        let diameter = rows
            .iter()
            .filter_map(|(r, _)| r.last().copied())
            .fold(0.0, f64::max);
        let (radial, chebyshev) = rows.into_iter().unzip();
        Self {
            dim,
            radial,
            chebyshev,
            diameter,
        }
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Number of other points receiving positive weight at bandwidth `h`.
    pub fn positive_neighbors(&self, i: usize, reach: Reach, h: f64) -> usize {
        match reach {
            Reach::Radial { inner, outer } => {
                let d = &self.radial[i];
                let hi = d.partition_point(|&v| v < outer * h);
                let lo = if inner > 0.0 {
                    d.partition_point(|&v| v <= inner * h)
                } else {
                    0
                };
                hi.saturating_sub(lo)
            }
            Reach::Box { half_width } => self.chebyshev[i].partition_point(|&v| v < half_width * h),
        }
    }

    fn coverage(&self, reach: Reach, h: f64, need: usize) -> f64 {
        let ok = (0..self.radial.len())
            .filter(|&i| self.positive_neighbors(i, reach, h) >= need)
            .count();
        ok as f64 / self.radial.len() as f64
    }

    fn smallest_positive(&self, reach: Reach) -> f64 {
        let rows = match reach {
            Reach::Radial { .. } => &self.radial,
            Reach::Box { .. } => &self.chebyshev,
        };
        rows.iter()
            .filter_map(|r| r.iter().copied().find(|&d| d > 0.0))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// `(h_min, h_max)` for a kernel.
///
/// `h_min` is the smallest bandwidth at which 99% of the design points have
/// at least `2(D+1)` positive-weight neighbors. `h_max` is half the diameter
/// of the point cloud divided by the kernel's inner radius (outer radius for
/// kernels positive at the origin), so the annulus reaches across the domain.
pub fn bandwidth_range(index: &NeighborIndex, kernel: &SmoothingKernel) -> Result<(f64, f64)> {
    let reach = kernel.reach();
    let need = 2 * (index.dim + 1);
    let half = 0.5 * index.diameter;
    let (h_max, outer) = match reach {
        Reach::Radial { inner, outer } if inner > 0.0 => (half / inner, outer),
        Reach::Radial { outer, .. } => (half / outer, outer),
        Reach::Box { half_width } => (half / half_width, half_width),
    };
    let lo = index.smallest_positive(reach) / outer;
    if !(lo > 0.0) || !lo.is_finite() || !(h_max > 0.0) {
        return Err(Error::invalid("design points are all coincident"));
    }
    let scan_hi = h_max.max(lo * 2.0);
    let h_min = log_spaced(lo, scan_hi, SCAN_POINTS)
        .into_iter()
        .find(|&h| index.coverage(reach, h, need) >= COVERAGE)
        .ok_or(Error::AllInfeasible { largest: scan_hi })?;
    Ok((h_min, h_max.max(1.5 * h_min)))
}

/// The default 30-point log-spaced grid between `h_min` and `h_max`.
pub fn default_grid(index: &NeighborIndex, kernel: &SmoothingKernel) -> Result<Vec<f64>> {
    let (lo, hi) = bandwidth_range(index, kernel)?;
    Ok(log_spaced(lo, hi, GRID_POINTS))
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("bandwidth grid is empty"));
    }
    if grid.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
        return Err(Error::invalid("bandwidth grid must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("bandwidth grid must be strictly increasing"));
    }
    Ok(())
}
