//! Zero-annulus radial cubic kernel.
//!
//! `K(u) = A r^3 + B r^2 + C r + D` for `r = ‖u‖ ∈ [c1, c2]`, zero elsewhere.
//! The kernel vanishes on the disk `r < c1`, so a local fit at `X_i` gives
//! no weight to observations closer than `c1 h`.

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelMoments};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::quadrature::{unit_sphere_area, GaussLegendre};

/// Number of interior points used to check positivity on `(c1, c2)`.
pub const POSITIVITY_GRID: usize = 512;
/// Grid values must exceed this.
pub const POSITIVITY_THRESHOLD: f64 = 1e-12;

const NORMALIZATION_TOL: f64 = 1e-10;
// exact for r^(D-1) p(r)^2 up to D = 17
const RULE_POINTS: usize = 12;

/// Which functional the cubic coefficients minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnnulusObjective {
    /// `mu(K^2)`
    MinVariance,
    /// `mu(K^2)^2 * mu2^D`, the kernel-dependent factor of the optimal AMISE.
    MinAmise,
    /// `mu(K^2) * mu2`
    MinProduct,
}

impl std::str::FromStr for AnnulusObjective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "minvariance" | "variance" => Ok(Self::MinVariance),
            "minamise" | "amise" => Ok(Self::MinAmise),
            "minproduct" | "product" => Ok(Self::MinProduct),
            _ => Err(Error::invalid(format!(
                "unknown objective `{s}` (expected min-variance, min-amise or min-product)"
            ))),
        }
    }
}

impl std::fmt::Display for AnnulusObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::MinVariance => "min-variance",
            Self::MinAmise => "min-amise",
            Self::MinProduct => "min-product",
        })
    }
}

impl AnnulusObjective {
    pub fn value(self, m: KernelMoments, dim: usize) -> f64 {
        match self {
            Self::MinVariance => m.mu_k2,
            Self::MinAmise => m.mu_k2 * m.mu_k2 * m.mu2.powi(dim as i32),
            Self::MinProduct => m.mu_k2 * m.mu2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialAnnulusKernel {
    c1: f64,
    c2: f64,
    coeffs: [f64; 4],
    dim: usize,
}

impl RadialAnnulusKernel {
    /// Assembles a kernel from stored parts and re-checks its invariants.
    pub fn from_parts(c1: f64, c2: f64, coeffs: [f64; 4], dim: usize) -> Result<Self> {
        check_geometry(c1, c2, dim)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("kernel coefficients must be finite"));
        }
        let k = Self {
            c1,
            c2,
            coeffs,
            dim,
        };
        k.verify()?;
        Ok(k)
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// `(A, B, C, D)`
    pub fn coeffs(&self) -> [f64; 4] {
        self.coeffs
    }

    /// Cubic value at radius `r`, exactly zero outside `[c1, c2]`.
    #[inline]
    pub fn eval_radius(&self, r: f64) -> f64 {
        if r < self.c1 || r > self.c2 {
            return 0.0;
        }
        let [a, b, c, d] = self.coeffs;
        ((a * r + b) * r + c) * r + d
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.eval_radius(u.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    /// `∫ K(‖u‖) du` over R^dim.
    pub fn integral(&self) -> f64 {
        let area = unit_sphere_area(self.dim);
        let d = self.dim as i32;
        area * GaussLegendre::new(RULE_POINTS)
            .integrate(self.c1, self.c2, |r| r.powi(d - 1) * self.eval_radius(r))
    }

    /// Smallest value on the interior positivity grid.
    pub fn grid_min(&self) -> f64 {
        let w = self.c2 - self.c1;
        (1..=POSITIVITY_GRID)
            .map(|k| self.eval_radius(self.c1 + w * k as f64 / (POSITIVITY_GRID + 1) as f64))
            .fold(f64::INFINITY, f64::min)
    }

    fn verify(&self) -> Result<()> {
        let gm = self.grid_min();
        if gm <= POSITIVITY_THRESHOLD {
            return Err(Error::InfeasibleKernel {
                c1: self.c1,
                c2: self.c2,
                reason: format!("kernel not positive on the annulus (grid minimum {gm:e})"),
            });
        }
        let total = self.integral();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InfeasibleKernel {
                c1: self.c1,
                c2: self.c2,
                reason: format!("kernel integrates to {total}, not 1"),
            });
        }
        Ok(())
    }
}

impl Kernel for RadialAnnulusKernel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn moments(&self) -> Result<KernelMoments> {
        let area = unit_sphere_area(self.dim);
        let d = self.dim as i32;
        let rule = GaussLegendre::new(RULE_POINTS);
        let mu2 = area / self.dim as f64
            * rule.integrate(self.c1, self.c2, |r| r.powi(d + 1) * self.eval_radius(r));
        let mu_k2 = area
            * rule.integrate(self.c1, self.c2, |r| {
                let k = self.eval_radius(r);
                r.powi(d - 1) * k * k
            });
        Ok(KernelMoments { mu2, mu_k2 })
    }
}

fn check_geometry(c1: f64, c2: f64, dim: usize) -> Result<()> {
    if !c1.is_finite() || !c2.is_finite() {
        return Err(Error::invalid("annulus radii must be finite"));
    }
    if c1 < 0.0 {
        return Err(Error::invalid("c1 must be non-negative"));
    }
    if c2 <= c1 {
        return Err(Error::invalid("c2 must exceed c1"));
    }
    if dim == 0 {
        return Err(Error::invalid("dim must be at least 1"));
    }
    Ok(())
}

/// Cubic in the normalized radius `s = (r - c1) / (c2 - c1) ∈ [0, 1]`.
/// Working in `s` keeps the search well scaled for large `c1`.
struct Problem {
    c1: f64,
    width: f64,
    dim: usize,
    area: f64,
    // normalization weights g_k = area * w * ∫ (c1 + w s)^(D-1) s^k ds
    g: [f64; 4],
    nodes: Vec<(f64, f64)>,
}

impl Problem {
    fn new(c1: f64, c2: f64, dim: usize) -> Self {
        let width = c2 - c1;
        let area = unit_sphere_area(dim);
        let rule = GaussLegendre::new(RULE_POINTS);
        let d = dim as i32;
        let mut g = [0.0; 4];
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = area
                * width
                * rule.integrate(0.0, 1.0, |s| {
                    (c1 + width * s).powi(d - 1) * s.powi(k as i32)
                });
        }
        let nodes = rule.nodes_on(0.0, 1.0);
        Self {
            c1,
            width,
            dim,
            area,
            g,
            nodes,
        }
    }

    /// Full coefficient vector `(a0, a1, a2, a3)` with `a0` fixed by ∫K = 1.
    fn complete(&self, free: &[f64]) -> [f64; 4] {
        let a0 =
            (1.0 - free[0] * self.g[1] - free[1] * self.g[2] - free[2] * self.g[3]) / self.g[0];
        [a0, free[0], free[1], free[2]]
    }

    fn poly(a: &[f64; 4], s: f64) -> f64 {
        ((a[3] * s + a[2]) * s + a[1]) * s + a[0]
    }

    fn moments(&self, a: &[f64; 4]) -> KernelMoments {
        let d = self.dim as i32;
        let mut m2 = 0.0;
        let mut mk2 = 0.0;
        for &(s, w) in &self.nodes {
            let r = self.c1 + self.width * s;
            let p = Self::poly(a, s);
            let rd = r.powi(d - 1);
            m2 += w * rd * r * r * p;
            mk2 += w * rd * p * p;
        }
        KernelMoments {
            mu2: self.area / self.dim as f64 * self.width * m2,
            mu_k2: self.area * self.width * mk2,
        }
    }

    /// Exact minimum of the cubic over `s ∈ [0, 1]`.
    fn exact_min(a: &[f64; 4]) -> f64 {
        let mut m = Self::poly(a, 0.0).min(Self::poly(a, 1.0));
        // p'(s) = a1 + 2 a2 s + 3 a3 s^2
        let (qa, qb, qc) = (3.0 * a[3], 2.0 * a[2], a[1]);
        let mut roots = Vec::with_capacity(2);
        if qa.abs() > 1e-300 {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                roots.push((-qb + sq) / (2.0 * qa));
                roots.push((-qb - sq) / (2.0 * qa));
            }
        } else if qb.abs() > 1e-300 {
            roots.push(-qc / qb);
        }
        for s in roots {
            if (0.0..=1.0).contains(&s) {
                m = m.min(Self::poly(a, s));
            }
        }
        m
    }

    fn grid_min(a: &[f64; 4]) -> f64 {
        (1..=POSITIVITY_GRID)
            .map(|k| Self::poly(a, k as f64 / (POSITIVITY_GRID + 1) as f64))
            .fold(f64::INFINITY, f64::min)
    }

    fn penalized(&self, free: &[f64], objective: AnnulusObjective) -> f64 {
        let a = self.complete(free);
        let violation = (-Self::exact_min(&a)).max(0.0)
            + (2.0 * POSITIVITY_THRESHOLD - Self::grid_min(&a)).max(0.0);
        if violation > 0.0 {
            return 1e10 * (1.0 + violation);
        }
        objective.value(self.moments(&a), self.dim)
    }

    /// Monomial coefficients in `r`: expands `sum_k a_k ((r - c1)/w)^k`.
    fn to_monomial(&self, a: &[f64; 4]) -> [f64; 4] {
        // out[j] multiplies r^j
        let mut out = [0.0; 4];
        for (k, &ak) in a.iter().enumerate() {
            let scale = ak / self.width.powi(k as i32);
            for j in 0..=k {
                out[j] += scale * binom(k, j) * (-self.c1).powi((k - j) as i32);
            }
        }
        [out[3], out[2], out[1], out[0]]
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Constructs the zero-annulus cubic kernel on `[c1, c2]` in `dim` dimensions.
///
/// The normalization `∫K = 1` is eliminated analytically (it fixes the
/// constant term), the objective is minimized over the remaining three
/// coefficients by a Nelder-Mead search started from the constant kernel,
/// and positivity is enforced by a penalty on the exact minimum of the cubic
/// and on a 512-point interior grid. The constant kernel is the closed-form
/// minimizer of `mu(K^2)` under normalization alone.
pub fn build_annulus_kernel(
    c1: f64,
    c2: f64,
    dim: usize,
    objective: AnnulusObjective,
) -> Result<RadialAnnulusKernel> {
    check_geometry(c1, c2, dim)?;
    let problem = Problem::new(c1, c2, dim);
    let a0 = 1.0 / problem.g[0];
    let start = [0.0; 3];
    let step = 0.25 * a0;
    let best = nelder_mead(
        |x| problem.penalized(x, objective),
        &start,
        &[step, step, step],
        &NelderMeadOptions::default(),
    )?;
    if best.value >= 1e10 {
        return Err(Error::InfeasibleKernel {
            c1,
            c2,
            reason: "no positive normalized cubic found".into(),
        });
    }
    let a = problem.complete(&best.x);
    let mut coeffs = problem.to_monomial(&a);

    // Re-impose the normalization in monomial form to remove expansion rounding.
    let d = dim as i32;
    let area = unit_sphere_area(dim);
    let rule = GaussLegendre::new(RULE_POINTS);
    let shell = area * rule.integrate(c1, c2, |r| r.powi(d - 1));
    let probe = RadialAnnulusKernel {
        c1,
        c2,
        coeffs,
        dim,
    };
    coeffs[3] += (1.0 - probe.integral()) / shell;

    let kernel = RadialAnnulusKernel {
        c1,
        c2,
        coeffs,
        dim,
    };
    kernel.verify()?;
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_radii() {
        let err = build_annulus_kernel(1.5, 1.0, 2, AnnulusObjective::MinAmise).unwrap_err();
        assert!(err.to_string().contains("c2 must exceed c1"), "{err}");
    }

    #[test]
    fn min_variance_is_the_constant_kernel() {
        let k = build_annulus_kernel(2.0, 2.5, 2, AnnulusObjective::MinVariance).unwrap();
        // constant 1/area minimizes the integral of K^2, with value 1/area
        let area = std::f64::consts::PI * (2.5f64.powi(2) - 4.0);
        let mu_k2 = k.moments().unwrap().mu_k2;
        assert!((mu_k2 * area - 1.0).abs() < 1e-9, "{mu_k2}");
        for &r in &[2.0, 2.1, 2.25, 2.4, 2.5] {
            assert!(
                (k.eval_radius(r) * area - 1.0).abs() < 1e-4,
                "{:?}",
                k.coeffs()
            );
        }
    }

    #[test]
    fn zero_inside_and_outside() {
        let k = build_annulus_kernel(1.0, 1.5, 2, AnnulusObjective::MinAmise).unwrap();
        assert_eq!(k.eval(&[0.5, 0.0]), 0.0);
        assert_eq!(k.eval_radius(0.0), 0.0);
        assert_eq!(k.eval_radius(1.0 - 1e-12), 0.0);
        assert_eq!(k.eval_radius(1.5 + 1e-12), 0.0);
        assert!(k.eval_radius(1.25) > 0.0);
    }

    #[test]
    fn monomial_expansion_matches_normalized_form() {
        let p = Problem::new(3.0, 3.5, 2);
        let a = [0.3, -0.1, 0.05, 0.02];
        let m = p.to_monomial(&a);
        for &r in &[3.0, 3.1, 3.33, 3.5] {
            let s = (r - 3.0) / 0.5;
            let direct = Problem::poly(&a, s);
            let mono = ((m[0] * r + m[1]) * r + m[2]) * r + m[3];
            assert!((direct - mono).abs() < 1e-12, "{direct} vs {mono}");
        }
    }

    #[test]
    fn from_parts_rejects_negative_cubic() {
        // constant normalizer but flipped sign
        let bad = RadialAnnulusKernel::from_parts(1.0, 1.5, [0.0, 0.0, 0.0, -0.5], 2);
        assert!(matches!(bad, Err(Error::InfeasibleKernel { .. })));
    }

    #[test]
    fn objective_parsing() {
        assert_eq!(
            "min-amise".parse::<AnnulusObjective>().unwrap(),
            AnnulusObjective::MinAmise
        );
        assert_eq!(
            "MinProduct".parse::<AnnulusObjective>().unwrap(),
            AnnulusObjective::MinProduct
        );
        assert!("best".parse::<AnnulusObjective>().is_err());
    }
}
