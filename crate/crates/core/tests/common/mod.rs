//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use annulus_core::{Dataset, Metric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

/// Surface area of the unit sphere in R^dim, by the recurrence
/// `S_{d+2} = 2 pi S_d / d`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        d => 2.0 * PI * sphere_area(d - 2) / (d - 2) as f64,
    }
}

/// `S_{D-1} * integral_a^b r^(D-1) g(r) dr`.
pub fn radial_integral(dim: usize, g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let d = dim as i32;
    sphere_area(dim) * adaptive_simpson(&|r| r.powi(d - 1) * g(r), a, b, 1e-13)
}

/// `n` uniform points in `[0, 1]^dim`, seeded.
pub fn uniform_points(n: usize, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * dim).map(|_| rng.random::<f64>()).collect()
}

/// Noiseless affine responses `a + b . x`.
pub fn affine_dataset(n: usize, dim: usize, seed: u64) -> (Dataset, Vec<f64>, f64) {
    let points = uniform_points(n, dim, seed);
    let slopes: Vec<f64> = (0..dim).map(|d| 0.7 - 0.9 * d as f64).collect();
    let intercept = 1.25;
    let y: Vec<f64> = points
        .chunks(dim)
        .map(|x| intercept + x.iter().zip(&slopes).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    (
        Dataset::new(points, dim, y, Metric::Euclidean).unwrap(),
        slopes,
        intercept,
    )
}
