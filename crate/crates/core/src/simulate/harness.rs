//! Seeded Monte Carlo trials comparing bandwidth selectors.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bandwidth::{default_grid, gcv_select, select_bandwidth, NeighborIndex};
use crate::covariance::{analyze_residuals, sigma2_rss, variance_bandwidth, CovarianceOptions};
use crate::data::pairwise_distances;
use crate::error::{Error, Result};
use crate::kernels::{
    build_annulus_kernel, AnnulusObjective, RadialAnnulusKernel, SmoothingKernel,
};
use crate::locfit::fit_all;
use crate::simulate::generate::{generate, SimScenario, Simulated};
use crate::simulate::metrics::{mean_sd, mse_prac, sse_cor, DEFAULT_ZETA};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Zero-annulus selection then factor conversion to product Epanechnikov.
    Za { c1: f64, c2: f64 },
    /// GCV with product Epanechnikov.
    Gcv,
    /// Best achievable MSE over the Epanechnikov grid and every method's bandwidth.
    MinEpan,
    /// Covariance estimation from the true errors.
    Raw,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Za { c1, c2 } => write!(f, "ZA({c1},{c2})"),
            Self::Gcv => f.write_str("GCV"),
            Self::MinEpan => f.write_str("minEpan"),
            Self::Raw => f.write_str("Raw"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "gcv" => return Ok(Self::Gcv),
            "minepan" => return Ok(Self::MinEpan),
            "raw" => return Ok(Self::Raw),
            _ => {}
        }
        let inner = t
            .strip_prefix("ZA(")
            .or_else(|| t.strip_prefix("za("))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::invalid(format!("unknown method '{t}'")))?;
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| Error::invalid(format!("method '{t}' needs ZA(c1,c2)")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad radius '{v}' in '{t}'")))
        };
        Ok(Self::Za {
            c1: parse(a)?,
            c2: parse(b)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessOptions {
    pub zeta: f64,
    pub covariance: CovarianceOptions,
    /// Coefficient objective for the `ZA` kernels.
    pub objective: AnnulusObjective,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            zeta: DEFAULT_ZETA,
            covariance: CovarianceOptions::default(),
            objective: AnnulusObjective::MinProduct,
        }
    }
}

/// Per-trial results of one method; metrics a method does not produce stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    pub h: Option<f64>,
    pub mse_prac: Option<f64>,
    pub sigma2_hat: Option<f64>,
    pub sse_cor: Option<f64>,
    pub calibration_fallback: bool,
    pub error: Option<String>,
}

impl MethodOutcome {
    fn empty(method: Method) -> Self {
        Self {
            method,
            h: None,
            mse_prac: None,
            sigma2_hat: None,
            sse_cor: None,
            calibration_fallback: false,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: u64,
    pub methods: Vec<MethodOutcome>,
}

/// Kernels and options shared by every trial of a scenario.
#[derive(Debug, Clone)]
pub struct Prepared {
    methods: Vec<Method>,
    za: Vec<Option<RadialAnnulusKernel>>,
    ko: SmoothingKernel,
    opts: HarnessOptions,
}

impl Prepared {
    pub fn new(dim: usize, methods: &[Method], opts: &HarnessOptions) -> Result<Self> {
        if methods.is_empty() {
            return Err(Error::invalid("no methods requested"));
        }
        let za = methods
            .iter()
            .map(|m| match *m {
                Method::Za { c1, c2 } => {
                    build_annulus_kernel(c1, c2, dim, opts.objective).map(Some)
                }
                _ => Ok(None),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            methods: methods.to_vec(),
            za,
            ko: SmoothingKernel::epanechnikov(dim),
            opts: opts.clone(),
        })
    }
}

fn fit_mse(sim: &Simulated, h: f64, ko: &SmoothingKernel) -> Result<(f64, Vec<f64>)> {
    let fit = fit_all(&sim.data, h, ko);
    if fit.singular_count() > 0 {
        return Err(Error::SingularPoints {
            count: fit.singular_count(),
        });
    }
    Ok((mse_prac(&fit.fitted, &sim.truth)?, fit.residuals))
}

/// Runs every method on trial `trial` of `scn`.
pub fn run_trial(scn: &SimScenario, trial: u64, prep: &Prepared) -> Result<TrialOutcome> {
    let sim = generate(scn, trial)?;
    let data = &sim.data;
    let n = data.n();
    let dim = data.dim();
    let index = NeighborIndex::new(data);
    let needs_distances = prep
        .methods
        .iter()
        .any(|m| matches!(m, Method::Za { .. } | Method::Raw));
    let distances = needs_distances.then(|| pairwise_distances(data));
    let ko = &prep.ko;
    let opts = &prep.opts;
    let ko_grid = default_grid(&index, ko);

    let mut outcomes: Vec<MethodOutcome> = Vec::with_capacity(prep.methods.len());
    for (method, kz) in prep.methods.iter().zip(&prep.za) {
        let mut out = MethodOutcome::empty(*method);
        let result = (|| -> Result<()> {
            match method {
                Method::Za { .. } => {
                    let kz = kz.as_ref().expect("prepared with the method list");
                    let grid = default_grid(&index, &kz.clone().into())?;
                    let sel = select_bandwidth(data, kz, ko, &grid)?;
                    out.h = Some(sel.h_o);
                    let (mse, residuals) = fit_mse(&sim, sel.h_o, ko)?;
                    out.mse_prac = Some(mse);
                    let s2 = sigma2_rss(data, variance_bandwidth(sel.h_o, n, dim), ko)?;
                    out.sigma2_hat = Some(s2);
                    let dist = distances.as_ref().expect("computed for ZA");
                    let cov = analyze_residuals(&residuals, dist, s2, &opts.covariance)?;
                    out.calibration_fallback = cov.calibration.fallback;
                    out.sse_cor = Some(sse_cor(
                        |t| cov.correlation.value_at(t),
                        &scn.model,
                        dist,
                        opts.zeta,
                    )?);
                }
                Method::Gcv => {
                    let grid = ko_grid
                        .as_ref()
                        .map_err(|e| Error::invalid(e.to_string()))?;
                    let h = gcv_select(data, ko, grid)?.h;
                    out.h = Some(h);
                    out.mse_prac = Some(fit_mse(&sim, h, ko)?.0);
                }
                Method::Raw => {
                    let s2 = sim.errors.iter().map(|e| e * e).sum::<f64>() / n as f64;
                    out.sigma2_hat = Some(s2);
                    let dist = distances.as_ref().expect("computed for Raw");
                    let cov = analyze_residuals(&sim.errors, dist, s2, &opts.covariance)?;
                    out.calibration_fallback = cov.calibration.fallback;
                    out.sse_cor = Some(sse_cor(
                        |t| cov.correlation.value_at(t),
                        &scn.model,
                        dist,
                        opts.zeta,
                    )?);
                }
                Method::MinEpan => {}
            }
            Ok(())
        })();
        if let Err(e) = result {
            out.error = Some(e.to_string());
        }
        outcomes.push(out);
    }

    // minEpan scans the shared grid plus every bandwidth chosen above.
    if let Some(k) = prep.methods.iter().position(|m| *m == Method::MinEpan) {
        let mut candidates: Vec<f64> = ko_grid.as_ref().map(|g| g.clone()).unwrap_or_default();
        candidates.extend(outcomes.iter().filter_map(|o| o.h));
        let scored: Vec<(f64, f64)> = candidates
            .par_iter()
            .filter_map(|&h| fit_mse(&sim, h, ko).ok().map(|(m, _)| (h, m)))
            .collect();
        match scored.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)) {
            Some((h, m)) => {
                outcomes[k].h = Some(h);
                outcomes[k].mse_prac = Some(m);
            }
            None => outcomes[k].error = Some("no feasible bandwidth on the scan".into()),
        }
    }
    Ok(TrialOutcome {
        trial,
        methods: outcomes,
    })
}

/// Which per-trial value a table row summarizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    MsePrac,
    MseSigma2,
    SseCor,
}

impl Measure {
    pub fn label(self) -> &'static str {
        match self {
            Self::MsePrac => "mse_prac",
            Self::MseSigma2 => "mse_sigma2",
            Self::SseCor => "sse_cor",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub model: String,
    pub c: f64,
    pub dim: usize,
    pub n: usize,
    pub method: Method,
    pub measure: Measure,
    pub mean: f64,
    pub sd: f64,
    /// Trials contributing a value.
    pub trials: usize,
    /// Trials excluded after a failure.
    pub failures: usize,
    /// Trials whose variance calibration fell back to the argmin.
    pub fallbacks: usize,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub scenario: SimScenario,
    pub trials: Vec<TrialOutcome>,
    /// Trials whose data generation failed.
    pub generation_failures: usize,
    pub rows: Vec<TableRow>,
}

impl ScenarioResult {
    /// Values of `measure` for `method` over the successful trials.
    pub fn values(&self, method: Method, measure: Measure) -> Vec<f64> {
        let sigma2 = self.scenario.model.sigma2;
        self.trials
            .iter()
            .filter_map(|t| t.methods.iter().find(|o| o.method == method))
            .filter_map(|o| match measure {
                Measure::MsePrac => o.mse_prac,
                Measure::MseSigma2 => o.sigma2_hat.map(|s| (s - sigma2).powi(2)),
                Measure::SseCor => o.sse_cor,
            })
            .collect()
    }

    pub fn outcomes(&self, method: Method) -> impl Iterator<Item = &MethodOutcome> + '_ {
        self.trials
            .iter()
            .filter_map(move |t| t.methods.iter().find(|o| o.method == method))
    }
}

fn measures(method: Method) -> &'static [Measure] {
    match method {
        Method::Za { .. } => &[Measure::MsePrac, Measure::MseSigma2, Measure::SseCor],
        Method::Gcv | Method::MinEpan => &[Measure::MsePrac],
        Method::Raw => &[Measure::MseSigma2, Measure::SseCor],
    }
}

/// All trials of one scenario, run in parallel, summarized per method and measure.
pub fn run_scenario(
    scn: &SimScenario,
    methods: &[Method],
    opts: &HarnessOptions,
) -> Result<ScenarioResult> {
    let prep = Prepared::new(scn.dim(), methods, opts)?;
    let results: Vec<Result<TrialOutcome>> = (0..scn.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(scn, t, &prep))
        .collect();
    let mut trials = Vec::new();
    let mut generation_failures = 0;
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => trials.push(o),
            Err(e) => {
                log::warn!("trial {t} excluded: {e}");
                generation_failures += 1;
            }
        }
    }
    let mut result = ScenarioResult {
        scenario: *scn,
        trials,
        generation_failures,
        rows: Vec::new(),
    };
    for &method in methods {
        let failures = result
            .outcomes(method)
            .filter(|o| o.error.is_some())
            .count()
            + generation_failures;
        let fallbacks = result
            .outcomes(method)
            .filter(|o| o.calibration_fallback)
            .count();
        for &measure in measures(method) {
            let values = result.values(method, measure);
            let (mean, sd) = mean_sd(&values);
            result.rows.push(TableRow {
                model: scn.model.family.label().to_string(),
                c: scn.model.c,
                dim: scn.dim(),
                n: scn.n,
                method,
                measure,
                mean,
                sd,
                trials: values.len(),
                failures,
                fallbacks,
            });
        }
    }
    Ok(result)
}

/// Runs every scenario with the same method list.
pub fn run_table(
    scenarios: &[SimScenario],
    methods: &[Method],
    opts: &HarnessOptions,
) -> Result<Vec<ScenarioResult>> {
    scenarios
        .iter()
        .map(|s| run_scenario(s, methods, opts))
        .collect()
}

/// Writes rows as CSV: model, c, D, n, method, measure, mean, sd, trials, failures, fallbacks.
pub fn write_table_csv<W: Write>(rows: &[TableRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "model",
        "c",
        "D",
        "n",
        "method",
        "measure",
        "mean",
        "sd",
        "trials",
        "failures",
        "fallbacks",
    ])?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.c.to_string(),
            r.dim.to_string(),
            r.n.to_string(),
            r.method.to_string(),
            r.measure.label().to_string(),
            format!("{:e}", r.mean),
            format!("{:e}", r.sd),
            r.trials.to_string(),
            r.failures.to_string(),
            r.fallbacks.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
