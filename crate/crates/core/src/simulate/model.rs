use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::{unit_sphere_area, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelationFamily {
    Spherical,
    Exponential,
    InverseQuadratic,
}

impl CorrelationFamily {
    /// Short table label (`SP`, `EXP`, `INVQ`).
    pub fn label(self) -> &'static str {
        match self {
            Self::Spherical => "SP",
            Self::Exponential => "EXP",
            Self::InverseQuadratic => "INVQ",
        }
    }
}

impl fmt::Display for CorrelationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CorrelationFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sp" | "spherical" => Ok(Self::Spherical),
            "exp" | "exponential" => Ok(Self::Exponential),
            "invq" | "inverse-quadratic" | "inverse_quadratic" => Ok(Self::InverseQuadratic),
            _ => Err(Error::invalid(format!(
                "unknown correlation family '{}'",
                s.trim()
            ))),
        }
    }
}

/// Stationary isotropic error correlation whose range shrinks as `n^(-alpha/D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationModel {
    pub family: CorrelationFamily,
    pub c: f64,
    pub alpha: f64,
    pub dim: usize,
    pub sigma2: f64,
}

impl CorrelationModel {
    pub fn new(
        family: CorrelationFamily,
        c: f64,
        alpha: f64,
        dim: usize,
        sigma2: f64,
    ) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid("correlation parameter c must be positive"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha = {alpha} outside (0, 1]")));
        }
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::invalid("sigma2 must be nonnegative"));
        }
        Ok(Self {
            family,
            c,
            alpha,
            dim,
            sigma2,
        })
    }

    /// Correlation at the rescaled lag `s = n^(alpha/D) t`.
    pub fn base(&self, s: f64) -> f64 {
        let c = self.c;
        match self.family {
            CorrelationFamily::Spherical => {
                if s <= c {
                    let z = s / c;
                    1.0 - 1.5 * z + 0.5 * z * z * z
                } else {
                    0.0
                }
            }
            CorrelationFamily::Exponential => (-c * s).exp(),
            CorrelationFamily::InverseQuadratic => 1.0 / (1.0 + c * s * s),
        }
    }

    /// `n^(alpha/D)`.
    pub fn scale(&self, n: usize) -> f64 {
        (n as f64).powf(self.alpha / self.dim as f64)
    }

    /// `rho_n(t)`.
    pub fn correlation(&self, t: f64, n: usize) -> f64 {
        self.base(t * self.scale(n))
    }

    /// `C_n(t) = sigma2 rho_n(t)`.
    pub fn covariance(&self, t: f64, n: usize) -> f64 {
        self.sigma2 * self.correlation(t, n)
    }

    /// Lag beyond which the correlation is exactly zero, if any.
    pub fn range(&self, n: usize) -> Option<f64> {
        match self.family {
            CorrelationFamily::Spherical => Some(self.c / self.scale(n)),
            _ => None,
        }
    }

    /// `C_rho = integral over R^D of rho(|u|) du` in rescaled units, so that
    /// `n^alpha * integral rho_n = C_rho` for every `n`.
    pub fn integrated_correlation(&self) -> Result<f64> {
        let d = self.dim as i32;
        let area = unit_sphere_area(self.dim);
        let c = self.c;
        let rule = GaussLegendre::new(20);
        match self.family {
            CorrelationFamily::Spherical => {
                Ok(area * rule.integrate_composite(0.0, c, 8, |r| r.powi(d - 1) * self.base(r)))
            }
            CorrelationFamily::Exponential => {
                // tail beyond 60/c is below e^-60 times a polynomial
                let upper = 60.0 / c;
                Ok(area
                    * rule.integrate_composite(0.0, upper, 64, |r| r.powi(d - 1) * self.base(r)))
            }
            CorrelationFamily::InverseQuadratic if self.dim == 1 => Ok(PI / c.sqrt()),
            CorrelationFamily::InverseQuadratic => Err(Error::invalid(format!(
                "inverse-quadratic correlation is not integrable in {} dimensions",
                self.dim
            ))),
        }
    }
}

/// `rho_n(t)` for `model`.
pub fn correlation_value(model: &CorrelationModel, t: f64, n: usize) -> f64 {
    model.correlation(t, n)
}

/// Known regression functions of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeanFunction {
    /// `2 x1^2 + 2 cos(pi x2)`
    Mu2D,
    /// `x1 + sin(pi x2) + 2 x3^2`
    Mu3D,
}

impl MeanFunction {
    pub fn dim(self) -> usize {
        match self {
            Self::Mu2D => 2,
            Self::Mu3D => 3,
        }
    }

    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Self::Mu2D),
            3 => Ok(Self::Mu3D),
            d => Err(Error::invalid(format!(
                "no simulation mean function for D = {d}"
            ))),
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Self::Mu2D => 2.0 * x[0] * x[0] + 2.0 * (PI * x[1]).cos(),
            Self::Mu3D => x[0] + (PI * x[1]).sin() + 2.0 * x[2] * x[2],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(c: f64) -> CorrelationModel {
        CorrelationModel::new(CorrelationFamily::Spherical, c, 1.0, 2, 0.1).unwrap()
    }

    #[test]
    fn spherical_vanishes_at_range() {
        let m = sp(2.0);
        let t = 2.0 / 500f64.sqrt();
        assert!(m.correlation(t, 500).abs() < 1e-15);
        assert_eq!(m.correlation(t * 1.0001, 500), 0.0);
        assert_eq!(m.correlation(0.0, 500), 1.0);
    }

    #[test]
    fn inverse_quadratic_half_point() {
        let m =
            CorrelationModel::new(CorrelationFamily::InverseQuadratic, 3.0, 1.0, 2, 0.1).unwrap();
        let t = 1.0 / (500f64.sqrt() * 3f64.sqrt());
        assert!((m.correlation(t, 500) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn spherical_integral_is_pi_c2_over_5() {
        for c in [1.0, 2.0, 3.0] {
            let v = sp(c).integrated_correlation().unwrap();
            assert!((v - PI * c * c / 5.0).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn exponential_integral_matches_closed_form() {
        // 2 pi / c^2 in two dimensions
        let m = CorrelationModel::new(CorrelationFamily::Exponential, 4.0, 1.0, 2, 0.1).unwrap();
        let v = m.integrated_correlation().unwrap();
        assert!((v - 2.0 * PI / 16.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn inverse_quadratic_is_not_integrable_in_the_plane() {
        let m =
            CorrelationModel::new(CorrelationFamily::InverseQuadratic, 1.0, 1.0, 2, 0.1).unwrap();
        assert!(m.integrated_correlation().is_err());
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(CorrelationModel::new(CorrelationFamily::Spherical, 1.0, 0.0, 2, 0.1).is_err());
        assert!(CorrelationModel::new(CorrelationFamily::Spherical, 1.0, 1.5, 2, 0.1).is_err());
    }

    #[test]
    fn family_names() {
        assert_eq!(
            "SP".parse::<CorrelationFamily>().unwrap(),
            CorrelationFamily::Spherical
        );
        assert_eq!(
            "invq".parse::<CorrelationFamily>().unwrap(),
            CorrelationFamily::InverseQuadratic
        );
        assert!("gauss".parse::<CorrelationFamily>().is_err());
    }
}
