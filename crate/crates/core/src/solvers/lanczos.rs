use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{axpy, dot, norm, LinearOperator};

pub const LANCZOS_SEED: u64 = 0x5eed;

/// Extreme Ritz values of `D⁻¹A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenEstimate {
    pub max: f64,
    pub min: f64,
    pub iterations: usize,
}

/// Runs `n_iter` Lanczos steps on `D^{-1/2} A D^{-1/2}` from a seeded random
/// start vector that vanishes on `skip` entries (usually constrained DoFs).
/// Stops early on breakdown and reports the Ritz values reached so far.
pub fn estimate_eigenvalues(
    op: &dyn LinearOperator,
    inv_diag: &[f64],
    skip: Option<&[bool]>,
    n_iter: usize,
    seed: u64,
) -> EigenEstimate {
    let n = op.n();
    let sqrt_inv: Vec<f64> = inv_diag.iter().map(|d| d.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n)
        .map(|i| if skip.is_some_and(|s| s[i]) { 0.0 } else { rng.gen_range(-1.0..1.0) })
        .collect();
    let nv = norm(&v);
    if nv == 0.0 {
        return EigenEstimate { max: 1.0, min: 1.0, iterations: 0 };
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n_iter);
    let mut alpha = Vec::with_capacity(n_iter);
    let mut beta: Vec<f64> = Vec::with_capacity(n_iter);
    let mut tmp = vec![0.0; n];
    let mut w = vec![0.0; n];
    for _ in 0..n_iter.min(n) {
        for i in 0..n {
            tmp[i] = sqrt_inv[i] * v[i];
        }
        op.apply(&tmp, &mut w);
        for i in 0..n {
            w[i] *= sqrt_inv[i];
        }
        let a = dot(&w, &v);
        axpy(-a, &v, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        // full reorthogonalization; the basis is tiny
        for q in &basis {
            let c = dot(&w, q);
            axpy(-c, q, &mut w);
        }
        let c = dot(&w, &v);
        axpy(-c, &v, &mut w);
        alpha.push(a);
        basis.push(v.clone());
        let b = norm(&w);
        if b <= 1e-12 * a.abs().max(1e-300) {
            break;
        }
        beta.push(b);
        v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / b);
    }
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t).eigenvalues;
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    EigenEstimate { max, min, iterations: k }
}
