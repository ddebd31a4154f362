//! MISE-optimal bandwidth for a known simulation model on the unit cube.

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::quadrature::GaussLegendre;
use crate::simulate::{CorrelationModel, MeanFunction};

/// Which bias constant enters the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleForm {
    /// Exact minimizer of `h^4 B mu2^2 / 4 + V mu(K^2) / (n h^D)` with
    /// `B = integral of f (sum_d d^2 mu / dx_d^2)^2`.
    #[default]
    LeadingTerm,
    /// The closed form with constant 4 and the squared signed integral
    /// `(integral of f sum_d d^2 mu / dx_d^2)^2` in place of `B`.
    AsPrinted,
}

const DIFF_STEP: f64 = 1e-4;
const NODES_PER_AXIS: usize = 16;

/// `sum_d d^2 mu / dx_d^2` at `x` by central differences.
pub fn laplacian(mean: MeanFunction, x: &[f64]) -> f64 {
    let mut p = x.to_vec();
    let f0 = mean.eval(x);
    let mut total = 0.0;
    for d in 0..x.len() {
        p[d] = x[d] + DIFF_STEP;
        let fp = mean.eval(&p);
        p[d] = x[d] - DIFF_STEP;
        let fm = mean.eval(&p);
        p[d] = x[d];
        total += (fp - 2.0 * f0 + fm) / (DIFF_STEP * DIFF_STEP);
    }
    total
}

/// `(integral of L, integral of L^2)` over the unit cube with uniform design
/// density, `L` the Laplacian of the mean.
pub fn bias_integrals(mean: MeanFunction) -> (f64, f64) {
    let dim = mean.dim();
    let nodes = GaussLegendre::new(NODES_PER_AXIS).nodes_on(0.0, 1.0);
    let m = nodes.len();
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let (mut first, mut second) = (0.0, 0.0);
    loop {
        let mut w = 1.0;
        for d in 0..dim {
            x[d] = nodes[idx[d]].0;
            w *= nodes[idx[d]].1;
        }
        let l = laplacian(mean, &x);
        first += w * l;
        second += w * l * l;
        let mut d = 0;
        while d < dim {
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == dim {
            break;
        }
    }
    (first, second)
}

/// Oracle bandwidth for kernel `ko` under `model`, with design uniform on
/// the unit cube (`m(X) = 1`).
pub fn oracle_bandwidth<K: Kernel + ?Sized>(
    model: &CorrelationModel,
    mean: MeanFunction,
    n: usize,
    ko: &K,
    form: OracleForm,
) -> Result<f64> {
    if !(model.alpha > 0.0 && model.alpha <= 1.0) {
        return Err(Error::invalid(format!(
            "alpha = {} outside (0, 1]",
            model.alpha
        )));
    }
    if !(model.sigma2 > 0.0) {
        return Err(Error::DegenerateNoise);
    }
    let dim = mean.dim();
    if model.dim != dim || ko.dim() != dim {
        return Err(Error::invalid("model, mean and kernel dimensions differ"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let c_rho = model.integrated_correlation()?;
    let volume = 1.0;
    let dependence = if model.alpha == 1.0 {
        c_rho + volume
    } else {
        c_rho
    };
    let (signed, squared) = bias_integrals(mean);
    let (constant, bias) = match form {
        OracleForm::LeadingTerm => (dim as f64, squared),
        OracleForm::AsPrinted => (4.0, signed * signed),
    };
    if !(bias > 0.0) {
        return Err(Error::invalid(
            "mean function has zero curvature; bias term vanishes",
        ));
    }
    let m = ko.moments()?;
    let p = 1.0 / (dim as f64 + 4.0);
    let base = constant * model.sigma2 * dependence / bias * m.mu_k2 / (m.mu2 * m.mu2);
    Ok(base.powf(p) * (n as f64).powf(-model.alpha * p))
}
