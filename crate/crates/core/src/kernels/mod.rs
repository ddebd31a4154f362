//! Kernel functions and their moment functionals.
//!
//! Two families are used for regression weights: the zero-annulus radial
//! cubic ([`RadialAnnulusKernel`]) and the product Epanechnikov kernel
//! ([`ProductEpanechnikovKernel`]). Covariance smoothing uses the 1-D
//! Epanechnikov kernel ([`CovarianceKernel1D`]) away from lag zero and the
//! [`BoundaryKernel`] near it.
//!
//! Every kernel returns exactly `0.0` outside its support.

mod annulus;
mod boundary;
mod epanechnikov;

use std::fmt;
use std::str::FromStr;

pub use annulus::{
    build_annulus_kernel, AnnulusObjective, RadialAnnulusKernel, POSITIVITY_GRID,
    POSITIVITY_THRESHOLD,
};
pub use boundary::BoundaryKernel;
pub use epanechnikov::{CovarianceKernel1D, ProductEpanechnikovKernel};

use crate::error::{Error, Result};
use crate::quadrature::{unit_sphere_area, GaussLegendre};

/// Second moment `mu2 = ∫ u_1^2 K(u) du` and roughness `mu_k2 = ∫ K(u)^2 du`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoments {
    pub mu2: f64,
    pub mu_k2: f64,
}

/// A kernel with bounded support whose moment functionals can be computed.
pub trait Kernel {
    fn dim(&self) -> usize;
    fn moments(&self) -> Result<KernelMoments>;
}

/// Moment functionals of any kernel.
pub fn kernel_moments<K: Kernel + ?Sized>(k: &K) -> Result<KernelMoments> {
    k.moments()
}

/// A radial kernel `K(‖u‖) = profile(‖u‖)` given by an arbitrary closure.
///
/// Moments are reduced to 1-D radial integrals over `[0, support]`; a
/// non-finite support is rejected.
pub struct RadialProfile<F> {
    pub profile: F,
    pub support: f64,
    pub dim: usize,
}

impl<F: Fn(f64) -> f64> Kernel for RadialProfile<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn moments(&self) -> Result<KernelMoments> {
        if !self.support.is_finite() || self.support <= 0.0 {
            return Err(Error::UnboundedSupport);
        }
        let d = self.dim as i32;
        let area = unit_sphere_area(self.dim);
        let rule = GaussLegendre::new(20);
        let panels = 64;
        let mu2 = area / self.dim as f64
            * rule.integrate_composite(0.0, self.support, panels, |r| {
                r.powi(d + 1) * (self.profile)(r)
            });
        let mu_k2 = area
            * rule.integrate_composite(0.0, self.support, panels, |r| {
                let k = (self.profile)(r);
                r.powi(d - 1) * k * k
            });
        Ok(KernelMoments { mu2, mu_k2 })
    }
}

/// Where a regression kernel puts positive weight, in scaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reach {
    /// Radial kernel positive for `inner < ‖u‖ < outer`.
    Radial { inner: f64, outer: f64 },
    /// Product kernel positive for `max_d |u_d| < half_width`.
    Box { half_width: f64 },
}

/// A kernel usable as local regression weights.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothingKernel {
    Annulus(RadialAnnulusKernel),
    Epanechnikov(ProductEpanechnikovKernel),
}

impl SmoothingKernel {
    pub fn epanechnikov(dim: usize) -> Self {
        SmoothingKernel::Epanechnikov(ProductEpanechnikovKernel::new(dim))
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, SmoothingKernel::Annulus(_))
    }

    /// Weight at scaled offset `u`; `norm` must equal `‖u‖` (or the metric
    /// distance divided by `h`) and is used by radial kernels.
    #[inline]
    pub fn weight(&self, u: &[f64], norm: f64) -> f64 {
        match self {
            SmoothingKernel::Annulus(k) => k.eval_radius(norm),
            SmoothingKernel::Epanechnikov(k) => k.eval(u),
        }
    }

    pub fn reach(&self) -> Reach {
        match self {
            SmoothingKernel::Annulus(k) => Reach::Radial {
                inner: k.c1(),
                outer: k.c2(),
            },
            SmoothingKernel::Epanechnikov(_) => Reach::Box { half_width: 1.0 },
        }
    }

    /// Short label, e.g. `ZA(1,1.5)` or `Epan`.
    pub fn label(&self) -> String {
        match self {
            SmoothingKernel::Annulus(k) => format!("ZA({},{})", k.c1(), k.c2()),
            SmoothingKernel::Epanechnikov(_) => "Epan".to_string(),
        }
    }
}

impl Kernel for SmoothingKernel {
    fn dim(&self) -> usize {
        match self {
            SmoothingKernel::Annulus(k) => k.dim(),
            SmoothingKernel::Epanechnikov(k) => k.dim(),
        }
    }

    fn moments(&self) -> Result<KernelMoments> {
        match self {
            SmoothingKernel::Annulus(k) => k.moments(),
            SmoothingKernel::Epanechnikov(k) => k.moments(),
        }
    }
}

impl From<RadialAnnulusKernel> for SmoothingKernel {
    fn from(k: RadialAnnulusKernel) -> Self {
        SmoothingKernel::Annulus(k)
    }
}

impl From<ProductEpanechnikovKernel> for SmoothingKernel {
    fn from(k: ProductEpanechnikovKernel) -> Self {
        SmoothingKernel::Epanechnikov(k)
    }
}

/// Plain-text record, one line:
///
/// ```text
/// annulus c1=1 c2=1.5 dim=2 A=... B=... C=... D=...
/// epanechnikov dim=2
/// ```
///
/// Floats are written in shortest round-trip form, so parsing a record
/// reproduces the kernel bit for bit.
impl fmt::Display for SmoothingKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothingKernel::Annulus(k) => {
                let [a, b, c, d] = k.coeffs();
                write!(
                    f,
                    "annulus c1={} c2={} dim={} A={a:?} B={b:?} C={c:?} D={d:?}",
                    k.c1(),
                    k.c2(),
                    k.dim()
                )
            }
            SmoothingKernel::Epanechnikov(k) => write!(f, "epanechnikov dim={}", k.dim()),
        }
    }
}

impl FromStr for SmoothingKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let kind = tokens
            .next()
            .ok_or_else(|| Error::invalid("empty kernel record"))?;
        let mut fields = std::collections::HashMap::new();
        for tok in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("malformed kernel field `{tok}`")))?;
            fields.insert(k, v);
        }
        let num = |key: &str| -> Result<f64> {
            fields
                .get(key)
                .ok_or_else(|| Error::invalid(format!("kernel record missing `{key}`")))?
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("kernel field `{key}`: {e}")))
        };
        let dim = fields
            .get("dim")
            .ok_or_else(|| Error::invalid("kernel record missing `dim`"))?
            .parse::<usize>()
            .map_err(|e| Error::invalid(format!("kernel field `dim`: {e}")))?;
        match kind {
            "annulus" => Ok(SmoothingKernel::Annulus(RadialAnnulusKernel::from_parts(
                num("c1")?,
                num("c2")?,
                [num("A")?, num("B")?, num("C")?, num("D")?],
                dim,
            )?)),
            "epanechnikov" => {
                if dim == 0 {
                    return Err(Error::invalid("dim must be positive"));
                }
                Ok(SmoothingKernel::epanechnikov(dim))
            }
            other => Err(Error::invalid(format!("unknown kernel kind `{other}`"))),
        }
    }
}
