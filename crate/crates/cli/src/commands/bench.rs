use std::time::Instant;

use annulus_core::covariance::CovarianceOptions;
use annulus_core::simulate::generate;
use annulus_core::{
    analyze_residuals, build_annulus_kernel, default_grid, fit_all, pairwise_distances,
    select_bandwidth, AnnulusObjective, CorrelationFamily, CorrelationModel, MeanFunction,
    NeighborIndex, SimScenario, SmoothingKernel,
};

use crate::config::{required, BenchOpts};
use crate::error::{CliError, CliResult, Context};
use crate::output::{num, OutputDir, Report};

/// Runs `f` `reps` times and returns the median and minimum wall time in seconds.
fn time<T>(reps: usize, mut f: impl FnMut() -> CliResult<T>) -> CliResult<(f64, f64)> {
    let mut secs = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        std::hint::black_box(f()?);
        secs.push(start.elapsed().as_secs_f64());
    }
    secs.sort_by(f64::total_cmp);
    Ok((secs[secs.len() / 2], secs[0]))
}

pub fn run(opts: BenchOpts) -> CliResult<()> {
    let output = required(opts.output.clone(), "output")?;
    let n = required(opts.n, "n")?;
    let reps = required(opts.reps, "reps")?;
    if reps == 0 {
        return Err(CliError::usage("reps must be positive"));
    }
    let model =
        CorrelationModel::new(CorrelationFamily::Spherical, 2.0, 1.0, 2, 0.1).context("model")?;
    let scn = SimScenario::new(
        MeanFunction::Mu2D,
        n,
        model,
        required(opts.seed, "seed")?,
        1,
    )
    .context("scenario")?;
    let kz = build_annulus_kernel(1.0, 1.5, 2, AnnulusObjective::MinProduct).context("kernel")?;
    let ko = SmoothingKernel::epanechnikov(2);
    let sim = generate(&scn, 0).context("generate")?;
    let grid = default_grid(
        &NeighborIndex::new(&sim.data),
        &SmoothingKernel::Annulus(kz.clone()),
    )
    .context("grid")?;
    let sel = select_bandwidth(&sim.data, &kz, &ko, &grid).context("selection")?;
    let fit = fit_all(&sim.data, sel.h_o, &ko);
    let dist = pairwise_distances(&sim.data);
    let s2 = sim.errors.iter().map(|e| e * e).sum::<f64>() / n as f64;

    let mut stages: Vec<(&str, (f64, f64))> = Vec::new();
    stages.push((
        "build_annulus_kernel",
        time(reps, || {
            build_annulus_kernel(1.0, 1.5, 2, AnnulusObjective::MinProduct).context("kernel")
        })?,
    ));
    stages.push((
        "generate",
        time(reps, || generate(&scn, 0).context("generate"))?,
    ));
    stages.push((
        "select_bandwidth",
        time(reps, || {
            select_bandwidth(&sim.data, &kz, &ko, &grid).context("selection")
        })?,
    ));
    stages.push((
        "fit_all",
        time(reps, || Ok(fit_all(&sim.data, sel.h_o, &ko)))?,
    ));
    stages.push((
        "analyze_residuals",
        time(reps, || {
            analyze_residuals(&fit.residuals, &dist, s2, &CovarianceOptions::default())
                .context("covariance")
        })?,
    ));

    let out = OutputDir::create(&output)?;
    out.echo_config("bench", &opts)?;
    out.csv(
        "bench.csv",
        &["stage", "n", "reps", "median_s", "min_s"],
        stages.iter().map(|(name, (med, min))| {
            [
                name.to_string(),
                n.to_string(),
                reps.to_string(),
                num(*med),
                num(*min),
            ]
        }),
    )?;
    let mut report = Report::new("annulus bench");
    report.field("points", n);
    report.field("repetitions", reps);
    report.field("threads", rayon::current_num_threads());
    for (name, (med, _)) in &stages {
        report.field(name, format!("{med:.4} s"));
    }
    out.text("report.txt", &report.finish())
}
