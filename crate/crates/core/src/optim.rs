//! Derivative-free Nelder-Mead simplex minimization.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Converged when the spread of objective values across the simplex
    /// falls below `f_tol * (1 + |f_best|)`.
    pub f_tol: f64,
    /// ...and every vertex lies within `x_tol` (max-norm) of the best vertex.
    pub x_tol: f64,
    /// Number of restarts from the incumbent with a fresh simplex.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            f_tol: 1e-14,
            x_tol: 1e-10,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes `f` starting from `x0` with initial simplex edge lengths `steps`.
pub fn nelder_mead<F>(f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(steps.len(), n);
    let mut best = Minimum {
        x: x0.to_vec(),
        value: f(x0),
        iterations: 0,
    };
    let mut total = 0;
    let mut converged = false;
    for round in 0..=opts.restarts {
        // shrink the restart simplex so later rounds polish the incumbent
        let scale = 0.5f64.powi(round as i32);
        let s: Vec<f64> = steps.iter().map(|v| v * scale).collect();
        let (m, ok) = run(&f, &best.x, &s, opts);
        total += m.iterations;
        converged = ok;
        if m.value <= best.value {
            best = m;
        }
    }
    let mut m = best;
    if !converged {
        let (spread, size) = simplex_residuals(&f, &m.x, steps);
        return Err(Error::NonConvergence {
            iterations: total,
            spread,
            size,
        });
    }
    m.iterations = total;
    Ok(m)
}

fn simplex_residuals<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], steps: &[f64]) -> (f64, f64) {
    let f0 = f(x);
    let mut spread: f64 = 0.0;
    for (i, s) in steps.iter().enumerate() {
        let mut y = x.to_vec();
        y[i] += s;
        spread = spread.max((f(&y) - f0).abs());
    }
    (spread, steps.iter().fold(0.0f64, |a, b| a.max(b.abs())))
}

fn run<F>(f: &F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> (Minimum, bool)
where
    F: Fn(&[f64]) -> f64,
{
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if spread.is_finite()
            && spread <= opts.f_tol * (1.0 + values[0].abs())
            && size <= opts.x_tol
        {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(ALPHA);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(GAMMA);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(RHO);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-RHO);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].clone();
        for i in 1..=n {
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + SIGMA * (*x - b);
            }
            values[i] = f(&simplex[i]);
        }
    }
    let (ib, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty simplex");
    (
        Minimum {
            x: simplex[ib].clone(),
            value: values[ib],
            iterations,
        },
        converged,
    )
}
