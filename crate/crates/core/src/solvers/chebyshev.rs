use crate::linalg::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevConfig {
    /// Polynomial degree; one operator application per degree.
    pub degree: usize,
    /// Lower bound of the smoothing window is `λ_max / smoothing_range`.
    pub smoothing_range: f64,
    /// Factor applied to the Lanczos estimate of `λ_max`.
    pub safety: f64,
    pub lanczos_iterations: usize,
    pub seed: u64,
}

impl Default for ChebyshevConfig {
    fn default() -> Self {
        Self { degree: 3, smoothing_range: 30.0, safety: 1.1, lanczos_iterations: 12, seed: super::LANCZOS_SEED }
    }
}

/// Chebyshev iteration preconditioned by point Jacobi, targeting the
/// eigenvalues of `D⁻¹A` in `[λ_min, λ_max]`.
#[derive(Debug, Clone)]
pub struct ChebyshevJacobi {
    inv_diag: Vec<f64>,
    degree: usize,
    lambda_min: f64,
    lambda_max: f64,
    estimate: f64,
}

impl ChebyshevJacobi {
    /// Builds the smoother from the operator diagonal, estimating `λ_max`
    /// with Lanczos on the DoFs not masked by `skip`.
    pub fn new(op: &dyn LinearOperator, diag: &[f64], skip: Option<&[bool]>, cfg: &ChebyshevConfig) -> Self {
        let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
        let est = super::estimate_eigenvalues(op, &inv_diag, skip, cfg.lanczos_iterations, cfg.seed);
        Self::with_estimate(inv_diag, est.max, cfg)
    }

    pub fn with_estimate(inv_diag: Vec<f64>, estimate: f64, cfg: &ChebyshevConfig) -> Self {
        let lambda_max = cfg.safety * estimate;
        Self { inv_diag, degree: cfg.degree, lambda_min: lambda_max / cfg.smoothing_range, lambda_max, estimate }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Raw Lanczos estimate before the safety factor.
    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn window(&self) -> (f64, f64) {
        (self.lambda_min, self.lambda_max)
    }

    pub fn inv_diag(&self) -> &[f64] {
        &self.inv_diag
    }

    /// `m` sweeps of the degree-`k` iteration on `A x = b`, updating `x`.
    /// With `zero_guess` the initial `x` is taken as zero and the first
    /// residual evaluation is skipped.
    pub fn smooth(&self, op: &dyn LinearOperator, b: &[f64], x: &mut [f64], m: usize, zero_guess: bool) {
        let n = b.len();
        let theta = 0.5 * (self.lambda_max + self.lambda_min);
        let delta = 0.5 * (self.lambda_max - self.lambda_min);
        let sigma = theta / delta;
        let mut r = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut ax = vec![0.0; n];
        let mut first_zero = zero_guess;
        if zero_guess {
            x.fill(0.0);
        }
        for _ in 0..m {
            let mut rho = 1.0 / sigma;
            for k in 0..self.degree {
                if first_zero {
                    r.copy_from_slice(b);
                    first_zero = false;
                } else {
                    op.apply(x, &mut ax);
                    for i in 0..n {
                        r[i] = b[i] - ax[i];
                    }
                }
                if k == 0 {
                    for i in 0..n {
                        d[i] = self.inv_diag[i] * r[i] / theta;
                    }
                } else {
                    let rho_new = 1.0 / (2.0 * sigma - rho);
                    let (c1, c2) = (rho_new * rho, 2.0 * rho_new / delta);
                    for i in 0..n {
                        d[i] = c1 * d[i] + c2 * self.inv_diag[i] * r[i];
                    }
                    rho = rho_new;
                }
                for i in 0..n {
                    x[i] += d[i];
                }
            }
        }
    }
}
