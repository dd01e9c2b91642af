//! One-dimensional Lagrange bases on Gauss–Lobatto nodes and Gauss quadrature,
//! all on the unit interval.

/// Legendre polynomial `P_n` and its derivative at `x ∈ [-1, 1]`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit of n(P_{n-1} - x P_n)/(1 - x²)
        let s = if x > 0.0 { 1.0 } else if n.is_multiple_of(2) { -1.0 } else { 1.0 };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// Gauss–Legendre rule with `n` points on `[0, 1]`, points ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut pts = vec![0.0; n];
    let mut wts = vec![0.0; n];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        pts[i] = 0.5 * (x + 1.0);
        wts[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (pts, wts)
}

/// Gauss–Lobatto points of degree `p` (that is, `p + 1` points) on `[0, 1]`.
pub fn gauss_lobatto_points(p: usize) -> Vec<f64> {
    assert!(p >= 1);
    let mut pts = vec![0.0; p + 1];
    pts[p] = 1.0;
    // interior points are the roots of P'_p; Newton on P'_p with
    // P''_p = (2x P'_p - p(p+1) P_p) / (1 - x²)
    for i in 1..p {
        let mut x = -(std::f64::consts::PI * i as f64 / p as f64).cos();
        for _ in 0..100 {
            let (lp, dp) = legendre(p, x);
            let ddp = (2.0 * x * dp - (p * (p + 1)) as f64 * lp) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        pts[i] = 0.5 * (x + 1.0);
    }
    pts
}

/// Lagrange basis of degree `p` on the Gauss–Lobatto nodes of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape1D {
    degree: usize,
    nodes: Vec<f64>,
    // barycentric weights
    weights: Vec<f64>,
}

impl Shape1D {
    pub fn new(degree: usize) -> Self {
        let nodes = gauss_lobatto_points(degree);
        let weights = (0..=degree)
            .map(|j| {
                let prod: f64 = (0..=degree).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
                1.0 / prod
            })
            .collect();
        Self { degree, nodes, weights }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n(&self) -> usize {
        self.degree + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Basis values at `t`; `t` may lie outside `[0, 1]`.
    pub fn values(&self, t: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.n()];
        self.values_into(t, &mut v);
        v
    }

    pub fn values_into(&self, t: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n()) {
            let mut prod = self.weights[i];
            for (k, &xk) in self.nodes.iter().enumerate() {
                if k != i {
                    prod *= t - xk;
                }
            }
            *o = prod;
        }
    }

    /// Basis derivatives at `t`.
    pub fn derivatives(&self, t: f64) -> Vec<f64> {
        let n = self.n();
        let mut d = vec![0.0; n];
        for (i, di) in d.iter_mut().enumerate() {
            let mut sum = 0.0;
            for m in 0..n {
                if m == i {
                    continue;
                }
                let mut prod = self.weights[i];
                for (k, &xk) in self.nodes.iter().enumerate() {
                    if k != i && k != m {
                        prod *= t - xk;
                    }
                }
                sum += prod;
            }
            *di = sum;
        }
        d
    }

    /// Row-major `points.len() × n` matrix of values.
    pub fn value_matrix(&self, points: &[f64]) -> Vec<f64> {
        points.iter().flat_map(|&t| self.values(t)).collect()
    }

    /// Row-major `points.len() × n` matrix of derivatives.
    pub fn derivative_matrix(&self, points: &[f64]) -> Vec<f64> {
        points.iter().flat_map(|&t| self.derivatives(t)).collect()
    }
}

/// Values and derivatives of the degree-`p` basis at `t`.
pub fn eval_shape_1d(p: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let s = Shape1D::new(p);
    (s.values(t), s.derivatives(t))
}

/// Applies the row-major `m × n` matrix `a` along `axis` of a tensor whose
/// extents are `dims` (axis 0 fastest). The extent along `axis` changes from
/// `n` to `m`. With `transpose` the matrix is applied as `aᵀ` (`n × m`).
pub(crate) fn contract(
    input: &[f64],
    dims: [usize; 3],
    axis: usize,
    a: &[f64],
    m: usize,
    transpose: bool,
    out: &mut [f64],
) {
    let n_in = dims[axis];
    let stride: usize = dims[..axis].iter().product();
    let outer: usize = dims[axis + 1..].iter().product();
    let (rows, cols) = if transpose { (a.len() / m, m) } else { (m, n_in) };
    debug_assert_eq!(cols, n_in);
    for o in 0..outer {
        let in_base = o * n_in * stride;
        let out_base = o * rows * stride;
        for r in 0..rows {
            let dst = &mut out[out_base + r * stride..out_base + (r + 1) * stride];
            dst.fill(0.0);
            for c in 0..cols {
                let w = if transpose { a[c * rows + r] } else { a[r * cols + c] };
                if w == 0.0 {
                    continue;
                }
                let src = &input[in_base + c * stride..in_base + (c + 1) * stride];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
}
