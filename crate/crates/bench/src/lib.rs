//! Shared fixtures for the pipeline benchmarks.

use annulus_core::simulate::{generate, Simulated};
use annulus_core::{CorrelationFamily, CorrelationModel, MeanFunction, Result, SimScenario};

/// One spherical-error sample on the unit square, the workload every stage is timed on.
pub fn spherical_sample(n: usize, seed: u64) -> Result<Simulated> {
    let model = CorrelationModel::new(CorrelationFamily::Spherical, 2.0, 1.0, 2, 0.1)?;
    generate(&SimScenario::new(MeanFunction::Mu2D, n, model, seed, 1)?, 0)
}

/// Sample sizes the benchmarks sweep over.
pub const SIZES: [usize; 3] = [200, 500, 1000];
