//! Two-level intergrid transfer operators.
//!
//! Prolongation maps coarse coefficients to fine coefficients; restriction is
//! its transpose. Constrained DoFs of both levels are masked out, so the
//! operators act between the free subspaces and the transpose identity holds
//! exactly (up to rounding) on constrained configurations.

mod embedding;
mod nonnested;

use std::time::Duration;

pub use embedding::EmbeddingTransfer;
pub use nonnested::{NonNestedTransfer, TransferPoint};

/// Timing split of one prolongation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProlongationTiming {
    pub gather_scatter: Duration,
    pub evaluation: Duration,
}

pub trait Transfer: Send + Sync {
    fn n_coarse(&self) -> usize;
    fn n_fine(&self) -> usize;
    /// Overwrites `fine` with the prolongation of `coarse`.
    fn prolongate(&self, coarse: &[f64], fine: &mut [f64]);
    /// Overwrites `coarse` with the transpose action on `fine`.
    fn restrict(&self, fine: &[f64], coarse: &mut [f64]);
    /// Prolongation with separate timing of data movement and evaluation.
    fn profile_prolongate(&self, coarse: &[f64], fine: &mut [f64]) -> ProlongationTiming {
        let t = std::time::Instant::now();
        self.prolongate(coarse, fine);
        ProlongationTiming { gather_scatter: Duration::ZERO, evaluation: t.elapsed() }
    }
    fn name(&self) -> &'static str;
}

/// Contracts the local tensor `u` (extent `n` per direction, first direction
/// fastest) with one 1D weight vector per direction.
pub(crate) fn eval_tensor(u: &[f64], n: usize, dim: usize, tabs: &[&[f64]], tmp: &mut [f64]) -> f64 {
    match dim {
        2 => {
            let (wx, wy) = (tabs[0], tabs[1]);
            let mut s = 0.0;
            for j in 0..n {
                let row = &u[j * n..(j + 1) * n];
                let t: f64 = row.iter().zip(wx).map(|(a, b)| a * b).sum();
                s += t * wy[j];
            }
            s
        }
        _ => {
            let (wx, wy, wz) = (tabs[0], tabs[1], tabs[2]);
            for jk in 0..n * n {
                let row = &u[jk * n..(jk + 1) * n];
                tmp[jk] = row.iter().zip(wx).map(|(a, b)| a * b).sum();
            }
            let mut s = 0.0;
            for k in 0..n {
                let t: f64 = (0..n).map(|j| tmp[j + n * k] * wy[j]).sum();
                s += t * wz[k];
            }
            s
        }
    }
}

/// Adds `v ⊗ tabs` into the local tensor `out`.
pub(crate) fn spread_tensor(v: f64, n: usize, dim: usize, tabs: &[&[f64]], out: &mut [f64]) {
    match dim {
        2 => {
            for j in 0..n {
                let vy = v * tabs[1][j];
                for (o, wx) in out[j * n..(j + 1) * n].iter_mut().zip(tabs[0]) {
                    *o += vy * wx;
                }
            }
        }
        _ => {
            for k in 0..n {
                let vz = v * tabs[2][k];
                for j in 0..n {
                    let vy = vz * tabs[1][j];
                    let base = (j + n * k) * n;
                    for (o, wx) in out[base..base + n].iter_mut().zip(tabs[0]) {
                        *o += vy * wx;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests;
