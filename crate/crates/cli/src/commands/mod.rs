pub mod bench;
pub mod covariance;
pub mod elbow;
pub mod fit;
pub mod simulate;

use std::fs::File;
use std::path::Path;

use annulus_core::bandwidth::{bandwidth_range, log_spaced, BandwidthSelection};
use annulus_core::{
    build_annulus_kernel, select_bandwidth, AnnulusObjective, Dataset, Metric, NeighborIndex,
    RadialAnnulusKernel, SmoothingKernel,
};

use crate::error::{CliError, CliResult, Context};
use crate::output::{num, OutputDir, Report};

pub fn parse<T: std::str::FromStr<Err = annulus_core::Error>>(
    value: &str,
    what: &str,
) -> CliResult<T> {
    value.parse().context(what)
}

pub fn load_dataset(path: &Path, dim: Option<usize>, metric: &str) -> CliResult<Dataset> {
    let metric: Metric = parse(metric, "metric")?;
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Dataset::from_csv(file, dim, metric).context(&format!("reading {}", path.display()))
}

/// The annulus kernel, the regression kernel and the bandwidth grid for a fit.
pub struct FitSetup {
    pub kz: RadialAnnulusKernel,
    pub ko: SmoothingKernel,
    pub grid: Vec<f64>,
}

pub struct KernelChoice<'a> {
    pub c1: f64,
    pub c2: Option<f64>,
    pub c2_offset: f64,
    pub objective: &'a str,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_points: usize,
}

impl KernelChoice<'_> {
    pub fn setup(&self, data: &Dataset) -> CliResult<FitSetup> {
        let objective: AnnulusObjective = parse(self.objective, "objective")?;
        let c2 = self.c2.unwrap_or(self.c1 + self.c2_offset);
        let kz = build_annulus_kernel(self.c1, c2, data.dim(), objective)
            .context("building the annulus kernel")?;
        let ko = SmoothingKernel::epanechnikov(data.dim());
        if self.grid_points == 0 {
            return Err(CliError::usage("grid_points must be positive"));
        }
        let (lo, hi) = match (self.grid_min, self.grid_max) {
            (Some(lo), Some(hi)) => (lo, hi),
            (lo, hi) => {
                let (a, b) = bandwidth_range(
                    &NeighborIndex::new(data),
                    &SmoothingKernel::Annulus(kz.clone()),
                )
                .context("bandwidth grid")?;
                (lo.unwrap_or(a), hi.unwrap_or(b))
            }
        };
        if !(lo > 0.0 && hi >= lo) || (hi == lo && self.grid_points > 1) {
            return Err(CliError::usage(format!(
                "invalid bandwidth grid [{lo}, {hi}]"
            )));
        }
        Ok(FitSetup {
            kz,
            ko,
            grid: log_spaced(lo, hi, self.grid_points),
        })
    }
}

impl FitSetup {
    pub fn select(&self, data: &Dataset) -> CliResult<BandwidthSelection> {
        select_bandwidth(data, &self.kz, &self.ko, &self.grid).context("selecting the bandwidth")
    }
}

/// Writes the RSS trace and adds the selection summary to the report.
pub fn record_selection(
    out: &OutputDir,
    report: &mut Report,
    setup: &FitSetup,
    sel: &BandwidthSelection,
) -> CliResult<()> {
    out.csv(
        "rss_trace.csv",
        &["h", "rss"],
        sel.grid
            .iter()
            .zip(&sel.rss_trace)
            .map(|(h, r)| [num(*h), num(*r)]),
    )?;
    report.field(
        "annulus kernel",
        format!("c1={} c2={}", setup.kz.c1(), setup.kz.c2()),
    );
    let [a, b, c, d] = setup.kz.coeffs();
    report.field("cubic coefficients", format!("A={a} B={b} C={c} D={d}"));
    report.field(
        "bandwidth grid",
        format!(
            "{} points in [{}, {}]",
            sel.grid.len(),
            sel.grid[0],
            sel.grid[sel.grid.len() - 1]
        ),
    );
    let infeasible = sel.rss_trace.iter().filter(|v| !v.is_finite()).count();
    report.field("infeasible grid points", infeasible);
    report.field("h_z", sel.h_z);
    report.field("factor ratio", sel.factor_ratio);
    report.field("h_o", sel.h_o);
    if sel.at_grid_edge {
        report.warn("h_z lies at the edge of the feasible grid; widen the grid");
    }
    Ok(())
}
