//! Simulation study: correlated-error data generation, accuracy metrics and
//! the seeded trial harness.

mod config;
mod generate;
mod harness;
mod metrics;
mod model;

pub use config::{parse_method_list, parse_scenarios, ScenarioSpec};
pub use generate::{
    covariance_matrix, factor_covariance, generate, trial_rng, SimScenario, Simulated, JITTER,
    JITTER_RETRY,
};
pub use harness::{
    run_scenario, run_table, run_trial, write_table_csv, HarnessOptions, Measure, Method,
    MethodOutcome, Prepared, ScenarioResult, TableRow, TrialOutcome,
};
pub use metrics::{correlation_penalty, mean_sd, mse_prac, mse_sigma2, sse_cor, DEFAULT_ZETA};
pub use model::{correlation_value, CorrelationFamily, CorrelationModel, MeanFunction};
