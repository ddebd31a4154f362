use crate::error::Result;
use crate::kernels::{Kernel, KernelMoments};

#[inline]
fn epan(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// `K(u) = prod_d (3/4)(1 - u_d^2) 1{|u_d| <= 1}`, one bandwidth for every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductEpanechnikovKernel {
    dim: usize,
}

impl ProductEpanechnikovKernel {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self { dim }
    }

    #[inline]
    pub fn eval(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        let mut w = 1.0;
        for &x in u {
            if x.abs() > 1.0 {
                return 0.0;
            }
            w *= 0.75 * (1.0 - x * x);
        }
        w
    }
}

impl Kernel for ProductEpanechnikovKernel {
    fn dim(&self) -> usize {
        self.dim
    }

    /// `mu2 = 1/5` (other axes integrate to one), `mu(K^2) = (3/5)^D`.
    fn moments(&self) -> Result<KernelMoments> {
        Ok(KernelMoments {
            mu2: 0.2,
            mu_k2: 0.6f64.powi(self.dim as i32),
        })
    }
}

/// 1-D Epanechnikov kernel on `(-1, 1)` used to smooth products of residuals
/// over pair distances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CovarianceKernel1D;

impl CovarianceKernel1D {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        epan(u)
    }

    /// `∫ u^k K(u) du`.
    pub fn moment(&self, k: u32) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        // (3/4) * 2 * (1/(k+1) - 1/(k+3))
        let k = k as f64;
        1.5 * (1.0 / (k + 1.0) - 1.0 / (k + 3.0))
    }
}

impl Kernel for CovarianceKernel1D {
    fn dim(&self) -> usize {
        1
    }

    fn moments(&self) -> Result<KernelMoments> {
        Ok(KernelMoments {
            mu2: 0.2,
            mu_k2: 0.6,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_weights() {
        let k = ProductEpanechnikovKernel::new(2);
        assert_eq!(k.eval(&[0.0, 0.0]), 0.5625);
        assert_eq!(k.eval(&[0.5, 1.01]), 0.0);
        assert!((k.eval(&[0.5, -0.5]) - 0.5625 * 0.75 * 0.75).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_moments() {
        let k = CovarianceKernel1D;
        assert_eq!(k.eval(2.0), 0.0);
        assert_eq!(k.eval(0.0), 0.75);
        assert!((k.moment(0) - 1.0).abs() < 1e-15);
        assert_eq!(k.moment(1), 0.0);
        assert!((k.moment(2) - 0.2).abs() < 1e-15);
    }
}
