use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, Metric};
use crate::error::{Error, Result};
use crate::simulate::model::{CorrelationModel, MeanFunction};

/// Diagonal jitter, relative to `sigma2`, for the first factorization attempt.
pub const JITTER: f64 = 1e-10;
/// Jitter for the single retry.
pub const JITTER_RETRY: f64 = 1e-8;

const EIGEN_TOL: f64 = 1e-12;
const EIGEN_MAX_SWEEPS: usize = 10_000;
// Relative eigenvalue below which the matrix is treated as not semidefinite.
const NEGATIVE_TOL: f64 = 1e-6;

/// One simulation setting: design, mean, error model, seed and trial count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimScenario {
    pub mean: MeanFunction,
    pub n: usize,
    pub model: CorrelationModel,
    pub seed: u64,
    pub trials: usize,
}

impl SimScenario {
    pub fn new(
        mean: MeanFunction,
        n: usize,
        model: CorrelationModel,
        seed: u64,
        trials: usize,
    ) -> Result<Self> {
        if mean.dim() != model.dim {
            return Err(Error::invalid(format!(
                "mean function needs D = {} but the model has D = {}",
                mean.dim(),
                model.dim
            )));
        }
        if n < mean.dim() + 2 {
            return Err(Error::invalid(format!("n = {n} is too small")));
        }
        if trials == 0 {
            return Err(Error::invalid("trials must be positive"));
        }
        Ok(Self {
            mean,
            n,
            model,
            seed,
            trials,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }
}

/// A generated sample with its true errors and mean values.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub data: Dataset,
    pub errors: Vec<f64>,
    pub truth: Vec<f64>,
}

/// Generator for trial `trial`: ChaCha20 seeded from the master seed, on the
/// stream numbered by the trial index.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `n x n` matrix `sigma2 rho_n(|Xi - Xj|)`.
pub fn covariance_matrix(points: &[f64], dim: usize, model: &CorrelationModel) -> DMatrix<f64> {
    let n = points.len() / dim;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = model.sigma2;
        let a = &points[i * dim..(i + 1) * dim];
        for j in i + 1..n {
            let b = &points[j * dim..(j + 1) * dim];
            let d = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            let v = model.covariance(d, n);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Symmetric square-root factor `L` with `L L^T ~ Sigma`: eigendecomposition
/// after diagonal jitter, negative eigenvalues clipped to zero.
pub fn factor_covariance(sigma: &DMatrix<f64>, sigma2: f64) -> Result<DMatrix<f64>> {
    let mut last = String::new();
    for jitter in [JITTER, JITTER_RETRY] {
        let mut m = sigma.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter * sigma2;
        }
        let Some(eig) = m.try_symmetric_eigen(EIGEN_TOL, EIGEN_MAX_SWEEPS) else {
            last = format!("eigendecomposition did not converge (jitter {jitter:e})");
            continue;
        };
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -NEGATIVE_TOL * sigma2 {
            last = format!("smallest eigenvalue {min:e} (jitter {jitter:e})");
            continue;
        }
        let mut v = eig.eigenvectors;
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            let s = lambda.max(0.0).sqrt();
            v.column_mut(k).scale_mut(s);
        }
        return Ok(v);
    }
    Err(Error::Factorization(last))
}

/// Draws one dataset for trial `trial` of `scn`.
pub fn generate(scn: &SimScenario, trial: u64) -> Result<Simulated> {
    let mut rng = trial_rng(scn.seed, trial);
    let dim = scn.dim();
    let n = scn.n;
    let points: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    let truth: Vec<f64> = points.chunks(dim).map(|x| scn.mean.eval(x)).collect();
    let errors = if scn.model.sigma2 == 0.0 {
        vec![0.0; n]
    } else {
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let sigma = covariance_matrix(&points, dim, &scn.model);
        let l = factor_covariance(&sigma, scn.model.sigma2)?;
        (&l * nalgebra::DVector::from_vec(z))
            .iter()
            .copied()
            .collect()
    };
    let y: Vec<f64> = truth.iter().zip(&errors).map(|(m, e)| m + e).collect();
    let data = Dataset::new(points, dim, y, Metric::Euclidean)?;
    Ok(Simulated {
        data,
        errors,
        truth,
    })
}
