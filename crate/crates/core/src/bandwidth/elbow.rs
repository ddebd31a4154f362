//! Choosing the inner radius `c1` from the stability of `C-bar` across candidates.

use rayon::prelude::*;

use crate::bandwidth::grid::{default_grid, NeighborIndex};
use crate::bandwidth::select::select_h_z;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{build_annulus_kernel, AnnulusObjective, Kernel, RadialAnnulusKernel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElbowConfig {
    /// Largest relative change of `C-bar` counted as stable.
    pub tolerance: f64,
    /// Consecutive stable steps required.
    pub run: usize,
    /// `c2 = c1 + c2_offset`.
    pub c2_offset: f64,
    pub objective: AnnulusObjective,
}

impl Default for ElbowConfig {
    fn default() -> Self {
        Self {
            tolerance: 0.10,
            run: 2,
            c2_offset: 0.5,
            objective: AnnulusObjective::MinAmise,
        }
    }
}

/// One candidate's record; failures leave `cbar` empty and keep the message.
#[derive(Debug, Clone)]
pub struct ElbowEntry {
    pub c1: f64,
    pub c2: f64,
    pub kernel: Option<RadialAnnulusKernel>,
    pub h_z: Option<f64>,
    pub cbar: Option<f64>,
    pub error: Option<String>,
}

impl ElbowEntry {
    pub fn feasible(&self) -> bool {
        self.cbar.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct ElbowDiagnostic {
    pub entries: Vec<ElbowEntry>,
    pub chosen_c1: f64,
}

impl ElbowDiagnostic {
    pub fn c1_list(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.c1).collect()
    }

    pub fn cbar_list(&self) -> Vec<Option<f64>> {
        self.entries.iter().map(|e| e.cbar).collect()
    }
}

/// `(mu(Kz^2) / mu2(Kz)^2)^(1/(D+4)) / h_z`.
pub fn cbar<K: Kernel + ?Sized>(kz: &K, h_z: f64) -> Result<f64> {
    let m = kz.moments()?;
    Ok((m.mu_k2 / (m.mu2 * m.mu2)).powf(1.0 / (kz.dim() as f64 + 4.0)) / h_z)
}

/// First `c1[k+1]` such that the `run` steps starting at `k` all change
/// `C-bar` by less than `tolerance` relative to the earlier value. A step
/// touching a gap is unstable.
pub fn pick_elbow(c1: &[f64], cbar: &[Option<f64>], tolerance: f64, run: usize) -> Result<f64> {
    if c1.len() != cbar.len() {
        return Err(Error::invalid("c1 and C-bar lists differ in length"));
    }
    let run = run.max(1);
    if c1.len() < run + 1 {
        return Err(Error::invalid(format!(
            "need ≥ {} candidates for stability detection",
            run + 1
        )));
    }
    let stable: Vec<bool> = cbar
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) if a != 0.0 => ((b - a) / a).abs() < tolerance,
            _ => false,
        })
        .collect();
    stable
        .windows(run)
        .position(|w| w.iter().all(|&s| s))
        .map(|k| c1[k + 1])
        .ok_or(Error::NoElbow { tolerance, run })
}

fn scan_one(data: &Dataset, index: &NeighborIndex, c1: f64, cfg: &ElbowConfig) -> ElbowEntry {
    let c2 = c1 + cfg.c2_offset;
    let mut entry = ElbowEntry {
        c1,
        c2,
        kernel: None,
        h_z: None,
        cbar: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let kz = build_annulus_kernel(c1, c2, data.dim(), cfg.objective)?;
        entry.kernel = Some(kz.clone());
        let grid = default_grid(index, &kz.clone().into())?;
        let sel = select_h_z(data, &kz, &grid)?;
        entry.h_z = Some(sel.h_z);
        entry.cbar = Some(cbar(&kz, sel.h_z)?);
        Ok(())
    })();
    if let Err(e) = outcome {
        log::warn!("elbow scan: c1 = {c1} skipped: {e}");
        entry.error = Some(e.to_string());
    }
    entry
}

/// Runs the elbow scan with default thresholds and the given objective.
pub fn elbow_scan(
    data: &Dataset,
    c1_list: &[f64],
    dim: usize,
    objective: AnnulusObjective,
) -> Result<ElbowDiagnostic> {
    if dim != data.dim() {
        return Err(Error::invalid(format!(
            "dimension {dim} does not match data dimension {}",
            data.dim()
        )));
    }
    let cfg = ElbowConfig {
        objective,
        ..ElbowConfig::default()
    };
    elbow_scan_with(data, c1_list, &cfg)
}

pub fn elbow_scan_with(
    data: &Dataset,
    c1_list: &[f64],
    cfg: &ElbowConfig,
) -> Result<ElbowDiagnostic> {
    let entries = elbow_entries(data, c1_list, cfg)?;
    let cb: Vec<Option<f64>> = entries.iter().map(|e| e.cbar).collect();
    let chosen_c1 = pick_elbow(c1_list, &cb, cfg.tolerance, cfg.run.max(1))?;
    Ok(ElbowDiagnostic { entries, chosen_c1 })
}

/// Per-candidate records without the elbow pick, so the table survives a
/// trace that never stabilizes.
pub fn elbow_entries(
    data: &Dataset,
    c1_list: &[f64],
    cfg: &ElbowConfig,
) -> Result<Vec<ElbowEntry>> {
    let run = cfg.run.max(1);
    if c1_list.len() < run + 1 {
        return Err(Error::invalid(format!(
            "need ≥ {} candidates for stability detection",
            run + 1
        )));
    }
    if c1_list.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err(Error::invalid(
            "c1 candidates must be finite and nonnegative",
        ));
    }
    if c1_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("c1 candidates must be strictly increasing"));
    }
    if !(cfg.c2_offset > 0.0) {
        return Err(Error::invalid("c2 offset must be positive"));
    }
    let index = NeighborIndex::new(data);
    let entries: Vec<ElbowEntry> = c1_list
        .par_iter()
        .map(|&c1| scan_one(data, &index, c1, cfg))
        .collect();
    if entries.iter().all(|e| !e.feasible()) {
        let first = entries[0].error.clone().unwrap_or_default();
        return Err(Error::invalid(format!(
            "every c1 candidate failed (first: {first})"
        )));
    }
    Ok(entries)
}
