//! Bandwidth selection: RSS minimization with a zero-annulus kernel, the
//! factor conversion to the regression kernel, the elbow diagnostic for
//! `c1`, a GCV baseline and the model-based oracle.

mod elbow;
mod gcv;
mod grid;
mod oracle;
mod select;

pub use elbow::{
    cbar, elbow_entries, elbow_scan, elbow_scan_with, pick_elbow, ElbowConfig, ElbowDiagnostic,
    ElbowEntry,
};
pub use gcv::{gcv_score, gcv_select, GcvSelection};
pub use grid::{bandwidth_range, default_grid, log_spaced, NeighborIndex, COVERAGE, GRID_POINTS};
pub use oracle::{bias_integrals, laplacian, oracle_bandwidth, OracleForm};
pub use select::{
    factor_convert, factor_ratio, rss_trace, select_bandwidth, select_by_rss, select_h_z,
    BandwidthSelection,
};
