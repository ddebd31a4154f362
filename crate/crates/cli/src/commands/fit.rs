use annulus_core::locfit::fit_points;
use annulus_core::{fit_all, rss};

use super::{load_dataset, record_selection, KernelChoice};
use crate::config::{required, FitOpts};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt, OutputDir, Report};

pub fn run(opts: FitOpts) -> CliResult<()> {
    let input = required(opts.input.clone(), "input")?;
    let output = required(opts.output.clone(), "output")?;
    let metric = required(opts.metric.clone(), "metric")?;
    let data = load_dataset(&input, opts.dim, &metric)?;
    let choice = KernelChoice {
        c1: required(opts.c1, "c1")?,
        c2: opts.c2,
        c2_offset: required(opts.c2_offset, "c2-offset")?,
        objective: opts.objective.as_deref().unwrap_or_default(),
        grid_min: opts.grid_min,
        grid_max: opts.grid_max,
        grid_points: required(opts.grid_points, "grid-points")?,
    };
    let eval_points = required(opts.eval_points, "eval-points")?;
    if eval_points < 2 {
        return Err(CliError::usage("eval_points must be at least 2"));
    }
    let setup = choice.setup(&data)?;
    let sel = setup.select(&data)?;

    let out = OutputDir::create(&output)?;
    out.echo_config("fit", &opts)?;
    let mut report = Report::new("annulus fit");
    report.field("input", input.display());
    report.field("points", data.n());
    report.field("dimension", data.dim());
    report.field("metric", data.metric());
    record_selection(&out, &mut report, &setup, &sel)?;

    let fit = fit_all(&data, sel.h_o, &setup.ko);
    report.field("singular fits", fit.singular_count());
    match rss(&fit) {
        Ok(v) => report.field("RSS at h_o", v),
        Err(e) => report.warn(&format!("RSS at h_o undefined: {e}")),
    }
    let dim = data.dim();
    let mut header: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    header.extend(["y", "fitted", "residual"].map(String::from));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv(
        "fitted.csv",
        &header_refs,
        (0..data.n()).map(|i| {
            let mut row: Vec<String> = data.point(i).iter().map(|v| num(*v)).collect();
            row.extend([
                num(data.responses()[i]),
                num(fit.fitted[i]),
                num(fit.residuals[i]),
            ]);
            row
        }),
    )?;

    let targets = surface_grid(&data.bounds(), eval_points);
    let surface = fit_points(&data, &targets, sel.h_o, &setup.ko);
    let missing = surface.iter().filter(|v| v.is_none()).count();
    report.field("surface points", surface.len());
    if missing > 0 {
        report.warn(&format!(
            "{missing} surface points have a singular local fit (left empty)"
        ));
    }
    let mut header: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    header.push("mu_hat".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv(
        "surface.csv",
        &header_refs,
        targets.chunks(dim).zip(&surface).map(|(x, v)| {
            let mut row: Vec<String> = x.iter().map(|c| num(*c)).collect();
            row.push(opt(*v));
            row
        }),
    )?;
    out.text("report.txt", &report.finish())?;
    Ok(())
}

/// Regular grid spanning the bounding box, `per_axis` points per coordinate,
/// last coordinate varying fastest.
fn surface_grid(bounds: &[(f64, f64)], per_axis: usize) -> Vec<f64> {
    let dim = bounds.len();
    let total = per_axis.pow(dim as u32);
    let mut out = Vec::with_capacity(total * dim);
    for idx in 0..total {
        let mut rest = idx;
        let mut point = vec![0.0; dim];
        for d in (0..dim).rev() {
            let k = rest % per_axis;
            rest /= per_axis;
            let (lo, hi) = bounds[d];
            point[d] = lo + (hi - lo) * k as f64 / (per_axis - 1) as f64;
        }
        out.extend(point);
    }
    out
}
