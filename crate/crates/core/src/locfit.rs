//! Multivariate local linear regression.
//!
//! At a target `x` the estimate is the intercept of a weighted least-squares
//! fit of `Y` on `(1, (X_i - x)/h)` with weights `K((X_i - x)/h)`. Scaling the
//! slope columns by `1/h` reparametrizes the slope and leaves the intercept
//! unchanged, and the kernel's `1/h` normalization cancels, so weights are the
//! raw kernel values.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::SmoothingKernel;

/// A pivot smaller than this fraction of the largest matrix entry is singular.
pub const PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// `mu_hat(X_i)`; NaN where the local system was singular.
    pub fitted: Vec<f64>,
    /// `Y_i - mu_hat(X_i)`; NaN where singular.
    pub residuals: Vec<f64>,
    pub h: f64,
    pub kernel: String,
    /// Indices of design points whose local fit was singular.
    pub singular: Vec<usize>,
}

impl FitResult {
    pub fn singular_count(&self) -> usize {
        self.singular.len()
    }
}

/// LU factorization with partial pivoting of a small dense matrix.
struct Lu {
    m: Vec<f64>,
    perm: Vec<usize>,
    size: usize,
}

impl Lu {
    fn factor(mut m: Vec<f64>, size: usize) -> Option<Self> {
        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(scale > 0.0) || !scale.is_finite() {
            return None;
        }
        let mut perm: Vec<usize> = (0..size).collect();
        for col in 0..size {
            let (piv, pval) = (col..size)
                .map(|r| (r, m[r * size + col].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty column");
            if pval < PIVOT_RATIO * scale {
                return None;
            }
            if piv != col {
                for k in 0..size {
                    m.swap(piv * size + k, col * size + k);
                }
                perm.swap(piv, col);
            }
            let d = m[col * size + col];
            for r in col + 1..size {
                let f = m[r * size + col] / d;
                m[r * size + col] = f;
                for k in col + 1..size {
                    m[r * size + k] -= f * m[col * size + k];
                }
            }
        }
        Some(Self { m, perm, size })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.size;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for k in 0..r {
                x[r] -= self.m[r * n + k] * x[k];
            }
        }
        for r in (0..n).rev() {
            for k in r + 1..n {
                x[r] -= self.m[r * n + k] * x[k];
            }
            x[r] /= self.m[r * n + r];
        }
        x
    }
}

/// Weighted local linear intercept from explicit local coordinates.
///
/// `design` is row-major `m x dim` of offsets (already scaled), `weights`
/// and `y` have length `m`. Returns `None` when the normal matrix is singular.
pub fn weighted_local_linear(
    design: &[f64],
    dim: usize,
    weights: &[f64],
    y: &[f64],
) -> Option<f64> {
    let sys = LocalSystem::assemble(design, dim, weights);
    let lu = Lu::factor(sys.normal, dim + 1)?;
    let mut rhs = vec![0.0; dim + 1];
    for (k, (&w, &yk)) in weights.iter().zip(y).enumerate() {
        let wy = w * yk;
        rhs[0] += wy;
        for d in 0..dim {
            rhs[d + 1] += wy * design[k * dim + d];
        }
    }
    Some(lu.solve(&rhs)[0])
}

struct LocalSystem {
    normal: Vec<f64>,
}

impl LocalSystem {
    fn assemble(design: &[f64], dim: usize, weights: &[f64]) -> Self {
        let p = dim + 1;
        let mut normal = vec![0.0; p * p];
        let mut z = vec![0.0; p];
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            z[0] = 1.0;
            z[1..].copy_from_slice(&design[k * dim..(k + 1) * dim]);
            for a in 0..p {
                let wa = w * z[a];
                for b in a..p {
                    normal[a * p + b] += wa * z[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                normal[a * p + b] = normal[b * p + a];
            }
        }
        Self { normal }
    }
}

/// Positive-weight neighborhood of a target point.
struct Neighborhood {
    index: Vec<usize>,
    weight: Vec<f64>,
    design: Vec<f64>,
}

fn neighborhood(data: &Dataset, x: &[f64], h: f64, k: &SmoothingKernel) -> Neighborhood {
    let dim = data.dim();
    let mut off = vec![0.0; dim];
    let mut nb = Neighborhood {
        index: Vec::new(),
        weight: Vec::new(),
        design: Vec::new(),
    };
    let radial = k.is_radial();
    for i in 0..data.n() {
        let p = data.point(i);
        data.offset(x, p, &mut off);
        for o in off.iter_mut() {
            *o /= h;
        }
        let norm = if radial { data.distance(x, p) / h } else { 0.0 };
        let w = k.weight(&off, norm);
        if w != 0.0 {
            nb.index.push(i);
            nb.weight.push(w);
            nb.design.extend_from_slice(&off);
        }
    }
    nb
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!(
            "bandwidth must be positive and finite, got {h}"
        )));
    }
    Ok(())
}

/// Local linear estimate `mu_hat(x)`.
pub fn fit_at(data: &Dataset, x: &[f64], h: f64, k: &SmoothingKernel) -> Result<f64> {
    check_h(h)?;
    if x.len() != data.dim() {
        return Err(Error::invalid("target dimension does not match data"));
    }
    let nb = neighborhood(data, x, h, k);
    let y: Vec<f64> = nb.index.iter().map(|&i| data.responses()[i]).collect();
    weighted_local_linear(&nb.design, data.dim(), &nb.weight, &y)
        .ok_or_else(|| Error::SingularFit { x: x.to_vec() })
}

/// Fit value and the smoother's diagonal weight `c_ii` at design point `i`.
pub(crate) fn fit_with_leverage(
    data: &Dataset,
    i: usize,
    h: f64,
    k: &SmoothingKernel,
) -> Option<(f64, f64)> {
    let x = data.point(i);
    let nb = neighborhood(data, x, h, k);
    let dim = data.dim();
    let sys = LocalSystem::assemble(&nb.design, dim, &nb.weight);
    let lu = Lu::factor(sys.normal, dim + 1)?;
    let mut e1 = vec![0.0; dim + 1];
    e1[0] = 1.0;
    let v = lu.solve(&e1);
    let mut value = 0.0;
    let mut leverage = 0.0;
    for (k, (&s, &w)) in nb.index.iter().zip(&nb.weight).enumerate() {
        let z = &nb.design[k * dim..(k + 1) * dim];
        let c = w * (v[0] + z.iter().zip(&v[1..]).map(|(a, b)| a * b).sum::<f64>());
        value += c * data.responses()[s];
        if s == i {
            leverage = c;
        }
    }
    Some((value, leverage))
}

/// In-sample fits at every design point; singular points are recorded.
pub fn fit_all(data: &Dataset, h: f64, k: &SmoothingKernel) -> FitResult {
    let fits: Vec<Option<f64>> = (0..data.n())
        .into_par_iter()
        .map(|i| {
            if !(h > 0.0) {
                return None;
            }
            fit_at(data, data.point(i), h, k).ok()
        })
        .collect();
    assemble_fit(data, fits, h, k)
}

pub(crate) fn assemble_fit(
    data: &Dataset,
    fits: Vec<Option<f64>>,
    h: f64,
    k: &SmoothingKernel,
) -> FitResult {
    let mut singular = Vec::new();
    let mut fitted = Vec::with_capacity(fits.len());
    let mut residuals = Vec::with_capacity(fits.len());
    for (i, f) in fits.into_iter().enumerate() {
        match f {
            Some(v) => {
                fitted.push(v);
                residuals.push(data.responses()[i] - v);
            }
            None => {
                singular.push(i);
                fitted.push(f64::NAN);
                residuals.push(f64::NAN);
            }
        }
    }
    FitResult {
        fitted,
        residuals,
        h,
        kernel: k.label(),
        singular,
    }
}

/// Smoother weights `c_i1..c_in` with `mu_hat(X_i) = sum_s c_is Y_s`.
pub fn hat_coefficients(data: &Dataset, i: usize, h: f64, k: &SmoothingKernel) -> Result<Vec<f64>> {
    check_h(h)?;
    if i >= data.n() {
        return Err(Error::invalid(format!("index {i} out of range")));
    }
    let x = data.point(i);
    let nb = neighborhood(data, x, h, k);
    let dim = data.dim();
    let sys = LocalSystem::assemble(&nb.design, dim, &nb.weight);
    let lu = Lu::factor(sys.normal, dim + 1).ok_or_else(|| Error::SingularFit { x: x.to_vec() })?;
    let mut e1 = vec![0.0; dim + 1];
    e1[0] = 1.0;
    let v = lu.solve(&e1);
    let mut c = vec![0.0; data.n()];
    for (k, (&s, &w)) in nb.index.iter().zip(&nb.weight).enumerate() {
        let z = &nb.design[k * dim..(k + 1) * dim];
        c[s] = w * (v[0] + z.iter().zip(&v[1..]).map(|(a, b)| a * b).sum::<f64>());
    }
    Ok(c)
}

/// `(1/n) sum residual_i^2`.
pub fn rss(fit: &FitResult) -> Result<f64> {
    if fit.singular_count() > 0 {
        return Err(Error::SingularPoints {
            count: fit.singular_count(),
        });
    }
    let n = fit.residuals.len();
    if n == 0 {
        return Err(Error::invalid("empty fit"));
    }
    Ok(fit.residuals.iter().map(|r| r * r).sum::<f64>() / n as f64)
}

/// Local linear estimates at arbitrary targets (row-major), `None` where singular.
pub fn fit_points(
    data: &Dataset,
    targets: &[f64],
    h: f64,
    k: &SmoothingKernel,
) -> Vec<Option<f64>> {
    let dim = data.dim();
    targets
        .par_chunks(dim)
        .map(|x| fit_at(data, x, h, k).ok())
        .collect()
}
