/// Boundary-corrected kernel for smoothing near lag zero.
///
/// With `q = t/b` the kernel is
/// `K(u) = 12 (u + 1) / (1 + q)^4 * (u (1 - 2q) + (3q^2 - 2q + 1) / 2)` on
/// `[-1, q]` and zero elsewhere. Its zeroth and first moments over `[-1, q]`
/// are 1 and 0 for every `q`, and at `q = 1` it is the Epanechnikov kernel.
/// It takes negative values near `u = -1` when `q < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryKernel {
    q: f64,
    scale: f64,
    slope: f64,
    offset: f64,
}

impl BoundaryKernel {
    /// `q` is clamped into `(0, 1]`; `q <= 0` maps to the smallest positive float.
    pub fn new(q: f64) -> Self {
        let q = if q.is_nan() || q <= 0.0 {
            f64::MIN_POSITIVE
        } else {
            q.min(1.0)
        };
        Self {
            q,
            scale: 12.0 / (1.0 + q).powi(4),
            slope: 1.0 - 2.0 * q,
            offset: 0.5 * (3.0 * q * q - 2.0 * q + 1.0),
        }
    }

    /// Kernel for estimating at lag `t` with bandwidth `b`.
    pub fn for_lag(t: f64, b: f64) -> Self {
        Self::new(t / b)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if u < -1.0 || u > self.q {
            return 0.0;
        }
        self.scale * (u + 1.0) * (u * self.slope + self.offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_epanechnikov_at_q_one() {
        let k = BoundaryKernel::new(1.0);
        assert_eq!(k.eval(0.0), 0.75);
        for i in 0..=20 {
            let u = -1.0 + 0.1 * i as f64;
            assert!((k.eval(u) - 0.75 * (1.0 - u * u)).abs() < 1e-15);
        }
    }

    #[test]
    fn clamps_q() {
        assert_eq!(BoundaryKernel::new(0.0).q(), f64::MIN_POSITIVE);
        assert_eq!(BoundaryKernel::new(3.0).q(), 1.0);
        assert_eq!(BoundaryKernel::for_lag(0.5, 1.0).q(), 0.5);
    }

    #[test]
    fn zero_outside_support() {
        let k = BoundaryKernel::new(0.3);
        assert_eq!(k.eval(0.31), 0.0);
        assert_eq!(k.eval(-1.01), 0.0);
    }
}
