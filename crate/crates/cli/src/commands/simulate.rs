use std::fs;

use annulus_core::covariance::CovarianceOptions;
use annulus_core::simulate::{
    parse_method_list, parse_scenarios, run_scenario, write_table_csv, HarnessOptions, ScenarioSpec,
};
use annulus_core::{AnnulusObjective, Method, SimScenario};

use super::parse;
use crate::config::{required, SimulateOpts};
use crate::error::{CliError, CliResult, Context};
use crate::output::{OutputDir, Report};

pub const BUNDLED_SCENARIOS: &str = include_str!("../../data/scenarios_d2.txt");

pub fn run(opts: SimulateOpts) -> CliResult<()> {
    let output = required(opts.output.clone(), "output")?;
    let (source, text) = match &opts.scenarios {
        Some(path) => (
            path.display().to_string(),
            fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        ),
        None => (
            "bundled D = 2 scenarios".to_string(),
            BUNDLED_SCENARIOS.to_string(),
        ),
    };
    let specs = parse_scenarios(&text).context(&format!("scenario file {source}"))?;
    let methods_override: Option<Vec<Method>> = opts
        .methods
        .as_deref()
        .map(parse_method_list)
        .transpose()
        .context("methods")?;
    let objective: AnnulusObjective =
        parse(opts.objective.as_deref().unwrap_or_default(), "objective")?;
    let harness = HarnessOptions {
        zeta: required(opts.zeta, "zeta")?,
        covariance: CovarianceOptions {
            delta_n: required(opts.delta, "delta")?,
            n_star: required(opts.n_star, "n-star")?,
            ..CovarianceOptions::default()
        },
        objective,
    };

    let out = OutputDir::create(&output)?;
    out.echo_config("simulate", &opts)?;
    let mut report = Report::new("annulus simulate");
    report.field("scenarios", &source);
    report.field("scenario count", specs.len());
    let mut rows = Vec::new();
    for ScenarioSpec {
        scenario,
        methods,
        line,
    } in specs
    {
        let scn = SimScenario::new(
            scenario.mean,
            scenario.n,
            scenario.model,
            opts.seed.unwrap_or(scenario.seed),
            opts.trials.unwrap_or(scenario.trials),
        )
        .context(&format!("scenario on line {line}"))?;
        let methods = methods_override.clone().unwrap_or(methods);
        let result =
            run_scenario(&scn, &methods, &harness).context(&format!("scenario on line {line}"))?;
        report.line("");
        report.field(
            &format!("line {line}"),
            format!(
                "{} c={} D={} n={} seed={} trials={}",
                scn.model.family,
                scn.model.c,
                scn.dim(),
                scn.n,
                scn.seed,
                scn.trials
            ),
        );
        if result.generation_failures > 0 {
            report.warn(&format!(
                "{} trials failed during data generation",
                result.generation_failures
            ));
        }
        for row in &result.rows {
            report.field(
                &format!("  {} {}", row.method, row.measure.label()),
                format!(
                    "{:.4e} (sd {:.4e}) over {} trials",
                    row.mean, row.sd, row.trials
                ),
            );
            if row.failures > 0 {
                report.warn(&format!("{}: {} trials failed", row.method, row.failures));
            }
        }
        let fallbacks = result.rows.iter().map(|r| r.fallbacks).max().unwrap_or(0);
        if fallbacks > 0 {
            report.warn(&format!(
                "variance calibration fell back in {fallbacks} trials"
            ));
        }
        rows.extend(result.rows);
    }
    let path = out.path("table.csv");
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    write_table_csv(&rows, file).context("writing table.csv")?;
    out.text("report.txt", &report.finish())
}
