use annulus_core::bandwidth::{elbow_entries, pick_elbow, ElbowConfig};
use annulus_core::AnnulusObjective;

use super::{load_dataset, parse};
use crate::config::{required, ElbowOpts};
use crate::error::{CliResult, Context};
use crate::output::{opt, OutputDir, Report};

pub fn run(opts: ElbowOpts) -> CliResult<()> {
    let input = required(opts.input.clone(), "input")?;
    let output = required(opts.output.clone(), "output")?;
    let data = load_dataset(&input, opts.dim, opts.metric.as_deref().unwrap_or_default())?;
    let objective: AnnulusObjective =
        parse(opts.objective.as_deref().unwrap_or_default(), "objective")?;
    let cfg = ElbowConfig {
        tolerance: required(opts.tolerance, "tolerance")?,
        run: required(opts.run, "run")?,
        c2_offset: required(opts.c2_offset, "c2-offset")?,
        objective,
    };
    let c1_list = required(opts.c1_list.clone(), "c1-list")?;
    let entries = elbow_entries(&data, &c1_list, &cfg).context("elbow scan")?;

    let out = OutputDir::create(&output)?;
    out.echo_config("elbow", &opts)?;
    out.csv(
        "elbow.csv",
        &["c1", "c2", "h_z", "cbar", "error"],
        entries.iter().map(|e| {
            [
                e.c1.to_string(),
                e.c2.to_string(),
                opt(e.h_z),
                opt(e.cbar),
                e.error.clone().unwrap_or_default(),
            ]
        }),
    )?;
    let mut report = Report::new("annulus elbow");
    report.field("input", input.display());
    report.field("points", data.n());
    report.field("candidates", c1_list.len());
    report.field("objective", objective);
    report.field("stability tolerance", cfg.tolerance);
    report.field("stable steps required", cfg.run);
    let gaps = entries.iter().filter(|e| !e.feasible()).count();
    if gaps > 0 {
        report.warn(&format!("{gaps} candidates failed and count as unstable"));
    }
    let cbar: Vec<Option<f64>> = entries.iter().map(|e| e.cbar).collect();
    let picked = pick_elbow(&c1_list, &cbar, cfg.tolerance, cfg.run);
    match &picked {
        Ok(c1) => report.field("chosen c1", c1),
        Err(e) => report.warn(&e.to_string()),
    }
    out.text("report.txt", &report.finish())?;
    picked.map(|_| ()).context("elbow scan")
}
