use annulus_core::covariance::CovarianceOptions;
use annulus_core::{
    analyze_residuals, fit_all, pairwise_distances, sigma2_rss, variance_bandwidth, CorrelationMode,
};

use super::{load_dataset, record_selection, KernelChoice};
use crate::config::{required, CovarianceOpts};
use crate::error::{CliError, CliResult, Context};
use crate::output::{num, OutputDir, Report};

fn parse_mode(s: &str) -> CliResult<CorrelationMode> {
    match s.to_ascii_lowercase().replace('_', "-").as_str() {
        "by-chat0" | "chat0" => Ok(CorrelationMode::ByChat0),
        "by-sigma2-hat" | "sigma2-hat" => Ok(CorrelationMode::BySigma2Hat),
        _ => Err(CliError::usage(format!(
            "unknown mode `{s}` (expected by-chat0 or by-sigma2-hat)"
        ))),
    }
}

pub fn run(opts: CovarianceOpts) -> CliResult<()> {
    let input = required(opts.input.clone(), "input")?;
    let output = required(opts.output.clone(), "output")?;
    let data = load_dataset(&input, opts.dim, opts.metric.as_deref().unwrap_or_default())?;
    let mode = parse_mode(opts.mode.as_deref().unwrap_or_default())?;
    let choice = KernelChoice {
        c1: required(opts.c1, "c1")?,
        c2: opts.c2,
        c2_offset: required(opts.c2_offset, "c2-offset")?,
        objective: opts.objective.as_deref().unwrap_or_default(),
        grid_min: opts.grid_min,
        grid_max: opts.grid_max,
        grid_points: required(opts.grid_points, "grid-points")?,
    };
    let setup = choice.setup(&data)?;
    let sel = setup.select(&data)?;

    let fit = fit_all(&data, sel.h_o, &setup.ko);
    if fit.singular_count() > 0 {
        return Err(CliError::core(
            "residual fit",
            annulus_core::Error::SingularPoints {
                count: fit.singular_count(),
            },
        ));
    }
    let h_t = variance_bandwidth(sel.h_o, data.n(), data.dim());
    let sigma2_hat = sigma2_rss(&data, h_t, &setup.ko).context("variance estimate")?;
    let cov_opts = CovarianceOptions {
        delta_n: required(opts.delta, "delta")?,
        n_star: required(opts.n_star, "n-star")?,
        truncation_t: opts.truncation,
        b_candidates: opts.b_candidates.clone(),
        mode,
    };
    let dist = pairwise_distances(&data);
    let analysis = analyze_residuals(&fit.residuals, &dist, sigma2_hat, &cov_opts)
        .context("covariance estimate")?;
    let cal = &analysis.calibration;
    let curve = &analysis.curve;
    let rho = &analysis.correlation;

    let out = OutputDir::create(&output)?;
    out.echo_config("covariance", &opts)?;
    let mut report = Report::new("annulus covariance");
    report.field("input", input.display());
    report.field("points", data.n());
    report.field("metric", data.metric());
    record_selection(&out, &mut report, &setup, &sel)?;
    report.field("h_T", h_t);
    report.field("sigma2_hat", sigma2_hat);
    report.field("b candidates", cal.b_candidates.len());
    report.field(
        "refined candidates",
        cal.refined.iter().filter(|&&r| r).count(),
    );
    report.field("chosen b", cal.chosen_b);
    report.field("C_hat(0)", curve.sigma2_tilde);
    report.field("|C_hat(0) - sigma2_hat|", cal.discrepancy[cal.chosen_index]);
    report.field("delta_n", cal.delta_n);
    if cal.fallback {
        report.field("calibration fallback", "yes");
        report.warn(&format!(
            "no b within delta_n = {}; the argmin b = {} was used",
            cal.delta_n, cal.chosen_b
        ));
    } else {
        report.field("calibration fallback", "no");
    }
    report.field("truncation lag", curve.truncation_t);
    report.field("correlation mode", opts.mode.as_deref().unwrap_or_default());
    if !curve.dropped.is_empty() {
        report.warn(&format!(
            "{} lags had no pairs and were dropped",
            curve.dropped.len()
        ));
    }
    if curve.any_flagged() {
        report.warn("covariance exceeds 1.5 C_hat(0) at some lags");
    }
    if rho.clamped {
        report.warn("correlation estimate clamped to [-1, 1]");
    }

    out.csv(
        "calibration.csv",
        &["b", "sigma2_tilde", "discrepancy", "refined", "chosen"],
        (0..cal.b_candidates.len()).map(|k| {
            [
                num(cal.b_candidates[k]),
                num(cal.sigma2_tilde[k]),
                num(cal.discrepancy[k]),
                cal.refined[k].to_string(),
                (k == cal.chosen_index).to_string(),
            ]
        }),
    )?;
    out.csv(
        "covariance.csv",
        &["t", "c_hat", "rho_hat", "flagged"],
        (0..curve.t_grid.len()).map(|k| {
            [
                num(curve.t_grid[k]),
                num(curve.c_hat[k]),
                num(rho.rho[k]),
                curve.sanity_flags[k].to_string(),
            ]
        }),
    )?;
    out.text("report.txt", &report.finish())
}
