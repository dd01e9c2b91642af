//! Sum-factorized cell kernel.

use super::{Physics, QData};
use crate::fespace::{contract, Shape1D};

#[derive(Debug, Clone)]
pub(crate) struct CellKernel {
    dim: usize,
    nc: usize,
    n: usize,
    nq: usize,
    // nq × n, row-major
    val: Vec<f64>,
    der: Vec<f64>,
    weights: Vec<f64>,
    physics: Physics,
}

pub(crate) struct Scratch {
    pub input: Vec<f64>,
    // [component][direction] blocks of nq^d values
    grad: Vec<f64>,
    t0: Vec<f64>,
    t1: Vec<f64>,
}

impl CellKernel {
    pub fn new(shape: &Shape1D, dim: usize, nc: usize, qp: &[f64], qw: &[f64], physics: Physics) -> Self {
        let nq = qp.len();
        let weights = (0..nq.pow(dim as u32))
            .map(|q| (0..dim).map(|k| qw[(q / nq.pow(k as u32)) % nq]).product())
            .collect();
        Self {
            dim,
            nc,
            n: shape.n(),
            nq,
            val: shape.value_matrix(qp),
            der: shape.derivative_matrix(qp),
            weights,
            physics,
        }
    }

    pub fn n_q(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, q: usize) -> f64 {
        self.weights[q]
    }

    pub fn scratch(&self) -> Scratch {
        let nd = self.n.pow(self.dim as u32);
        let nqd = self.n_q();
        let big = self.n.max(self.nq).pow(self.dim as u32);
        Scratch {
            input: vec![0.0; nd * self.nc],
            grad: vec![0.0; nqd * self.dim * self.nc],
            t0: vec![0.0; big],
            t1: vec![0.0; big],
        }
    }

    /// Reference gradient of one component block, direction `k`, into `out`.
    fn gradient(&self, input: &[f64], k: usize, t0: &mut [f64], t1: &mut [f64], out: &mut [f64]) {
        let mut dims = [1, 1, 1];
        dims[..self.dim].fill(self.n);
        let mat = |a: usize| if a == k { &self.der } else { &self.val };
        contract(input, dims, 0, mat(0), self.nq, false, t0);
        dims[0] = self.nq;
        for a in 1..self.dim {
            let (src, dst) = if a % 2 == 1 { (&*t0, &mut *t1) } else { (&*t1, &mut *t0) };
            let dst = if a + 1 == self.dim { &mut *out } else { dst };
            contract(src, dims, a, mat(a), self.nq, false, dst);
            dims[a] = self.nq;
        }
    }

    /// Integrates `flux` (quadrature values) against the derivative in
    /// direction `k` of all basis functions and adds the result to `out`.
    fn integrate(&self, flux: &[f64], k: usize, t0: &mut [f64], t1: &mut [f64], out: &mut [f64]) {
        let mut dims = [1, 1, 1];
        dims[..self.dim].fill(self.nq);
        let nd = self.n.pow(self.dim as u32);
        let mat = |a: usize| if a == k { &self.der } else { &self.val };
        contract(flux, dims, 0, mat(0), self.nq, true, t0);
        dims[0] = self.n;
        for a in 1..self.dim {
            let (src, dst) = if a % 2 == 1 { (&*t0, &mut *t1) } else { (&*t1, &mut *t0) };
            contract(src, dims, a, mat(a), self.nq, true, dst);
            dims[a] = self.n;
        }
        let res = if self.dim % 2 == 1 { &*t0 } else { &*t1 };
        for (o, s) in out.iter_mut().zip(&res[..nd]) {
            *o += s;
        }
    }

    /// Local operator: `scratch.input` (component-major) to `out`.
    pub fn apply(&self, s: &mut Scratch, qdata: &[QData], out: &mut [f64]) {
        let dim = self.dim;
        let nc = self.nc;
        let nd = self.n.pow(dim as u32);
        let nqd = self.n_q();
        for c in 0..nc {
            for k in 0..dim {
                let block = (c * dim + k) * nqd;
                self.gradient(&s.input[c * nd..(c + 1) * nd], k, &mut s.t0, &mut s.t1, &mut s.grad[block..block + nqd]);
            }
        }
        for (q, qd) in qdata.iter().enumerate() {
            // physical gradient G[c][i] = Σ_k ĝ[c][k] Jinv[k][i]
            let mut g = [[0.0; 3]; 3];
            for c in 0..nc {
                for i in 0..dim {
                    g[c][i] = (0..dim).map(|k| s.grad[(c * dim + k) * nqd + q] * qd.jinv[k][i]).sum();
                }
            }
            let f = match self.physics {
                Physics::Laplace => g,
                Physics::Elasticity { lambda, mu } => {
                    let tr: f64 = (0..dim).map(|i| g[i][i]).sum();
                    let mut f = [[0.0; 3]; 3];
                    for i in 0..dim {
                        for j in 0..dim {
                            f[i][j] = mu * (g[i][j] + g[j][i]);
                        }
                        f[i][i] += lambda * tr;
                    }
                    f
                }
            };
            // reference flux: JxW Σ_i Jinv[k][i] F[c][i]
            for c in 0..nc {
                for k in 0..dim {
                    let v: f64 = (0..dim).map(|i| qd.jinv[k][i] * f[c][i]).sum();
                    s.grad[(c * dim + k) * nqd + q] = qd.jxw * v;
                }
            }
        }
        out.fill(0.0);
        for c in 0..nc {
            for k in 0..dim {
                let flux = &s.grad[(c * dim + k) * nqd..(c * dim + k + 1) * nqd];
                self.integrate(flux, k, &mut s.t0, &mut s.t1, &mut out[c * nd..(c + 1) * nd]);
            }
        }
    }
}
