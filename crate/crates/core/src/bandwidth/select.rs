use rayon::prelude::*;

use crate::bandwidth::grid::validate_grid;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{Kernel, RadialAnnulusKernel, SmoothingKernel};
use crate::locfit::{fit_all, rss};

/// Outcome of RSS minimization with a zero-annulus kernel and its factor
/// conversion to the final regression kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSelection {
    pub h_z: f64,
    /// `h_z * factor_ratio`; equals `h_z` until converted.
    pub h_o: f64,
    pub factor_ratio: f64,
    pub grid: Vec<f64>,
    /// RSS per grid point, `f64::INFINITY` where the fit was singular.
    pub rss_trace: Vec<f64>,
    /// Whether `h_z` is the first feasible or the last grid point.
    pub at_grid_edge: bool,
}

impl BandwidthSelection {
    /// Applies the factor method to fill `h_o` and `factor_ratio`.
    pub fn converted<A: Kernel + ?Sized, B: Kernel + ?Sized>(
        mut self,
        kz: &A,
        ko: &B,
    ) -> Result<Self> {
        self.factor_ratio = factor_ratio(kz, ko)?;
        self.h_o = self.h_z * self.factor_ratio;
        Ok(self)
    }
}

/// RSS at every grid bandwidth; singular fits give `+inf`.
pub fn rss_trace(data: &Dataset, k: &SmoothingKernel, grid: &[f64]) -> Vec<f64> {
    grid.par_iter()
        .map(|&h| rss(&fit_all(data, h, k)).unwrap_or(f64::INFINITY))
        .collect()
}

/// Index of the smallest finite value; near-ties go to the smaller index.
pub(crate) fn argmin_with_ties(values: &[f64], scale: f64) -> Option<usize> {
    let min = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .min_by(f64::total_cmp)?;
    let tol = 1e-10 * min.abs() + 1e-24 * scale;
    values.iter().position(|&v| v.is_finite() && v <= min + tol)
}

/// Minimizes RSS over `grid` for any regression kernel.
pub fn select_by_rss(
    data: &Dataset,
    k: &SmoothingKernel,
    grid: &[f64],
) -> Result<BandwidthSelection> {
    validate_grid(grid)?;
    let trace = rss_trace(data, k, grid);
    let scale = 1.0 + data.responses().iter().map(|y| y * y).sum::<f64>() / data.n() as f64;
    let best = argmin_with_ties(&trace, scale).ok_or(Error::AllInfeasible {
        largest: *grid.last().expect("validated nonempty"),
    })?;
    let first_feasible = trace.iter().position(|v| v.is_finite()).unwrap_or(0);
    let at_grid_edge = best == first_feasible || best == grid.len() - 1;
    if at_grid_edge {
        log::warn!(
            "{}: RSS minimum at grid edge (h = {}); consider widening the grid",
            k.label(),
            grid[best]
        );
    }
    Ok(BandwidthSelection {
        h_z: grid[best],
        h_o: grid[best],
        factor_ratio: 1.0,
        grid: grid.to_vec(),
        rss_trace: trace,
        at_grid_edge,
    })
}

/// Step 1 of the procedure: the RSS-minimizing bandwidth for `K_z`.
pub fn select_h_z(
    data: &Dataset,
    kz: &RadialAnnulusKernel,
    grid: &[f64],
) -> Result<BandwidthSelection> {
    select_by_rss(data, &SmoothingKernel::Annulus(kz.clone()), grid)
}

/// `(mu(Ko^2) mu2(Kz)^2 / (mu2(Ko)^2 mu(Kz^2)))^(1/(D+4))`.
pub fn factor_ratio<A: Kernel + ?Sized, B: Kernel + ?Sized>(kz: &A, ko: &B) -> Result<f64> {
    if kz.dim() != ko.dim() {
        return Err(Error::invalid(format!(
            "kernel dimensions differ ({} vs {})",
            kz.dim(),
            ko.dim()
        )));
    }
    let mz = kz.moments()?;
    let mo = ko.moments()?;
    let num = mo.mu_k2 * mz.mu2 * mz.mu2;
    let den = mo.mu2 * mo.mu2 * mz.mu_k2;
    if !(num > 0.0 && den > 0.0) {
        return Err(Error::invalid("kernel moments must be positive"));
    }
    // identical kernels convert exactly
    if num == den {
        return Ok(1.0);
    }
    Ok((num / den).powf(1.0 / (kz.dim() as f64 + 4.0)))
}

/// Step 2: `h_o = h_z * factor_ratio(kz, ko)`.
pub fn factor_convert<A: Kernel + ?Sized, B: Kernel + ?Sized>(
    sel: &BandwidthSelection,
    kz: &A,
    ko: &B,
) -> Result<f64> {
    Ok(sel.h_z * factor_ratio(kz, ko)?)
}

/// Steps 1 and 2 together.
pub fn select_bandwidth(
    data: &Dataset,
    kz: &RadialAnnulusKernel,
    ko: &SmoothingKernel,
    grid: &[f64],
) -> Result<BandwidthSelection> {
    select_h_z(data, kz, grid)?.converted(kz, ko)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_to_the_smaller_bandwidth() {
        let v = [f64::INFINITY, 1e-31, 3e-31, 2e-31, 5.0];
        assert_eq!(argmin_with_ties(&v, 1.0), Some(1));
        let v = [3.0, 1.0, 2.0, 1.0];
        assert_eq!(argmin_with_ties(&v, 1.0), Some(1));
        assert_eq!(argmin_with_ties(&[f64::INFINITY; 3], 1.0), None);
    }

    #[test]
    fn identical_kernels_have_unit_ratio() {
        let k = SmoothingKernel::epanechnikov(2);
        assert_eq!(factor_ratio(&k, &k).unwrap(), 1.0);
    }
}
