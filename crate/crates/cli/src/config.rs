//! Per-command options. Every option can come from a flag or from a flat
//! TOML file passed with `--config`; flags win. After merging, defaults are
//! filled in and the complete set is echoed to `config.toml` in the output
//! directory, which can be fed back with `--config` to repeat the run.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_OUTPUT: &str = "annulus-out";

/// Reads a flat TOML table of options, or the empty set without a path.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(format!("missing --{flag} (flag or config key)")))
}

macro_rules! options {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Args, Deserialize, Serialize, Debug, Clone, Default, PartialEq)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fmeta])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            /// Takes each option missing here from `file`.
            pub fn overlay(mut self, file: Self) -> Self {
                $( if self.$field.is_none() { self.$field = file.$field; } )*
                self
            }

            /// Fills unset options that have a default.
            pub fn with_defaults(mut self) -> Self {
                $( if self.$field.is_none() { self.$field = $default; } )*
                self
            }
        }
    };
}

fn elbow_c1_default() -> Vec<f64> {
    (0..=24).map(|k| 0.25 * k as f64).collect()
}

options! {
    /// Bandwidth selection and local linear fit.
    FitOpts {
        /// CSV with a header row, columns x1..xD and y.
        input: PathBuf = None,
        /// Number of coordinate columns (default: count of x1, x2, ... present).
        dim: usize = None,
        /// euclidean or haversine (x1 = latitude, x2 = longitude, km).
        metric: String = Some("euclidean".into()),
        output: PathBuf = Some(DEFAULT_OUTPUT.into()),
        /// Inner radius of the zero-annulus kernel.
        c1: f64 = Some(1.0),
        /// Outer radius (default c1 + c2_offset).
        c2: f64 = None,
        c2_offset: f64 = Some(0.5),
        /// min-product, min-amise or min-variance.
        objective: String = Some("min-product".into()),
        /// Smallest grid bandwidth (default: coverage rule).
        grid_min: f64 = None,
        /// Largest grid bandwidth (default: half the diameter over c1).
        grid_max: f64 = None,
        grid_points: usize = Some(30),
        /// Surface evaluation points per axis.
        eval_points: usize = Some(25),
    }
}

options! {
    /// Elbow diagnostic for the inner radius.
    ElbowOpts {
        input: PathBuf = None,
        dim: usize = None,
        metric: String = Some("euclidean".into()),
        output: PathBuf = Some(DEFAULT_OUTPUT.into()),
        /// Comma-separated, strictly increasing inner radii.
        #[arg(value_delimiter = ',', num_args = 1..)]
        c1_list: Vec<f64> = Some(elbow_c1_default()),
        c2_offset: f64 = Some(0.5),
        objective: String = Some("min-amise".into()),
        /// Largest relative change of C-bar counted as stable.
        tolerance: f64 = Some(0.10),
        /// Consecutive stable steps required.
        run: usize = Some(2),
    }
}

options! {
    /// Fit, variance calibration and covariance/correlation estimation.
    CovarianceOpts {
        input: PathBuf = None,
        dim: usize = None,
        metric: String = Some("euclidean".into()),
        output: PathBuf = Some(DEFAULT_OUTPUT.into()),
        c1: f64 = Some(1.0),
        c2: f64 = None,
        c2_offset: f64 = Some(0.5),
        objective: String = Some("min-product".into()),
        grid_min: f64 = None,
        grid_max: f64 = None,
        grid_points: usize = Some(30),
        /// Comma-separated covariance bandwidths (default: 25 log-spaced).
        #[arg(value_delimiter = ',', num_args = 1..)]
        b_candidates: Vec<f64> = None,
        /// Calibration tolerance on |C_hat(0) - sigma2_hat|.
        delta: f64 = Some(2e-4),
        /// Lag grid size for the covariance curve.
        n_star: usize = Some(200),
        /// Lag beyond which the covariance is set to zero (default: pilot rule).
        truncation: f64 = None,
        /// by-chat0 or by-sigma2-hat.
        mode: String = Some("by-chat0".into()),
    }
}

options! {
    /// Seeded simulation tables.
    SimulateOpts {
        /// Scenario file (default: the bundled D = 2 SP/EXP/INVQ set).
        scenarios: PathBuf = None,
        output: PathBuf = Some(DEFAULT_OUTPUT.into()),
        /// Overrides the trial count of every scenario.
        trials: usize = None,
        /// Overrides the seed of every scenario.
        seed: u64 = None,
        /// Overrides the method list, e.g. "ZA(1,1.5),GCV,minEpan,Raw".
        methods: String = None,
        /// Correlation threshold for SSE_cor.
        zeta: f64 = Some(0.02),
        delta: f64 = Some(2e-4),
        n_star: usize = Some(200),
        objective: String = Some("min-product".into()),
    }
}

options! {
    /// Timing of the pipeline stages on one simulated sample.
    BenchOpts {
        output: PathBuf = Some(DEFAULT_OUTPUT.into()),
        n: usize = Some(500),
        seed: u64 = Some(1),
        /// Repetitions per stage; the median is reported.
        reps: usize = Some(3),
    }
}
