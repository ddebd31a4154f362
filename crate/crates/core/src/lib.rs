//! Local linear regression with bandwidth selection that is robust to
//! correlated errors.
//!
//! Bandwidths are chosen by minimizing the residual sum of squares with a
//! kernel that is zero on a disk around the origin ("zero-annulus"), which
//! removes the short-range error correlation from the criterion. The result
//! is converted to a conventional kernel by the factor method. Residuals
//! then feed a kernel estimator of the error covariance as a function of
//! distance, with its smoothing bandwidth chosen by variance calibration.

// `!(x > 0.0)` is the NaN-rejecting check used throughout; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bandwidth;
pub mod covariance;
pub mod data;
pub mod error;
pub mod kernels;
pub mod locfit;
pub mod optim;
pub mod quadrature;
pub mod simulate;

pub use bandwidth::{
    default_grid, elbow_scan, factor_convert, gcv_select, oracle_bandwidth, select_bandwidth,
    select_h_z, BandwidthSelection, ElbowDiagnostic, NeighborIndex,
};
pub use covariance::{
    analyze_residuals, calibrate_b, covariance_curve, estimate_correlation, estimate_covariance,
    sigma2_rss, variance_bandwidth, CalibrationTrace, CorrelationMode, CovarianceEstimate,
    CovarianceEstimator,
};
pub use data::{pairwise_distances, CondensedDistances, Dataset, Metric};
pub use error::{Error, Result};
pub use kernels::{
    build_annulus_kernel, kernel_moments, AnnulusObjective, BoundaryKernel, Kernel, KernelMoments,
    ProductEpanechnikovKernel, RadialAnnulusKernel, SmoothingKernel,
};
pub use locfit::{fit_all, fit_at, hat_coefficients, rss, FitResult};
pub use simulate::{
    correlation_value, CorrelationFamily, CorrelationModel, MeanFunction, Method, SimScenario,
};
