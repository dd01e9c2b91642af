use super::Point;
use crate::error::{Error, Result};

const MAX_NEWTON_ITERATIONS: usize = 30;

/// The multilinear map `F_K` from the unit cell `[0,1]^d` to a physical cell.
///
/// Stored in monomial form `F(x̂) = Σ_m c_m Π_{k∈m} x̂_k` over subsets `m` of the
/// reference axes, which makes both the map and its Jacobian cheap.
#[derive(Debug, Clone)]
pub struct CellMapping {
    cell: usize,
    dim: usize,
    vertices: [Point; 8],
    coeffs: [Point; 8],
    affine: bool,
    diameter: f64,
}

impl CellMapping {
    pub fn new(cell: usize, dim: usize, vertices: [Point; 8]) -> Self {
        let n = 1usize << dim;
        let mut coeffs = [[0.0; 3]; 8];
        for (m, c) in coeffs.iter_mut().enumerate().take(n) {
            // inclusion-exclusion over the subsets of m
            let mut v = m;
            loop {
                let sign = if (m.count_ones() - v.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                for k in 0..3 {
                    c[k] += sign * vertices[v][k];
                }
                if v == 0 {
                    break;
                }
                v = (v - 1) & m;
            }
        }
        let mut diameter: f64 = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                diameter = diameter.max(super::dist(&vertices[a], &vertices[b]));
            }
        }
        let mut affine = true;
        for (m, c) in coeffs.iter().enumerate().take(n) {
            if m.count_ones() >= 2 && c.iter().any(|x| x.abs() > 1e-13 * diameter) {
                affine = false;
            }
        }
        Self { cell, dim, vertices, coeffs, affine, diameter }
    }

    pub fn cell(&self) -> usize {
        self.cell
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the twist coefficients vanish, i.e. the Jacobian is constant.
    pub fn is_affine(&self) -> bool {
        self.affine
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices[..1 << self.dim]
    }

    pub fn map_to_real(&self, xh: &Point) -> Point {
        let mut x = [0.0; 3];
        for m in 0..1usize << self.dim {
            let mut w = 1.0;
            for k in 0..self.dim {
                if (m >> k) & 1 == 1 {
                    w *= xh[k];
                }
            }
            for i in 0..3 {
                x[i] += w * self.coeffs[m][i];
            }
        }
        x
    }

    /// `J[i][k] = ∂x_i/∂x̂_k`; in 2D the third row and column are the identity.
    pub fn jacobian(&self, xh: &Point) -> [[f64; 3]; 3] {
        let mut j = [[0.0; 3]; 3];
        for k in 0..self.dim {
            for m in 0..1usize << self.dim {
                if (m >> k) & 1 == 0 {
                    continue;
                }
                let mut w = 1.0;
                for l in 0..self.dim {
                    if l != k && (m >> l) & 1 == 1 {
                        w *= xh[l];
                    }
                }
                for i in 0..self.dim {
                    j[i][k] += w * self.coeffs[m][i];
                }
            }
        }
        if self.dim == 2 {
            j[2][2] = 1.0;
        }
        j
    }

    pub fn jacobian_det(&self, xh: &Point) -> f64 {
        det3(&self.jacobian(xh))
    }

    /// Reference coordinates of `x`, with `‖F(x̂) − x‖ ≤ tol` on success.
    ///
    /// Affine cells are inverted in closed form. Otherwise Newton's method
    /// starts from the cell center and halves the step while the residual
    /// grows. The result may lie outside the unit cell.
    pub fn invert_mapping(&self, x: &Point, tol: f64) -> Result<Point> {
        if self.affine {
            let j = self.jacobian(&[0.0; 3]);
            let jinv = inv3(&j).ok_or(Error::NewtonNoConvergence { iterations: 0, residual: f64::INFINITY })?;
            let mut rhs = [0.0; 3];
            for i in 0..self.dim {
                rhs[i] = x[i] - self.coeffs[0][i];
            }
            let mut xh = [0.0; 3];
            for k in 0..self.dim {
                xh[k] = (0..self.dim).map(|i| jinv[k][i] * rhs[i]).sum();
            }
            return Ok(xh);
        }
        let mut xh = [0.0; 3];
        for k in 0..self.dim {
            xh[k] = 0.5;
        }
        let residual = |xh: &Point| -> (Point, f64) {
            let f = self.map_to_real(xh);
            let mut r = [0.0; 3];
            for i in 0..self.dim {
                r[i] = x[i] - f[i];
            }
            let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            (r, n)
        };
        let (mut r, mut rnorm) = residual(&xh);
        for it in 0..MAX_NEWTON_ITERATIONS {
            if rnorm <= tol {
                return Ok(xh);
            }
            let jinv = inv3(&self.jacobian(&xh))
                .ok_or(Error::NewtonNoConvergence { iterations: it, residual: rnorm })?;
            let mut step = [0.0; 3];
            for k in 0..self.dim {
                step[k] = (0..self.dim).map(|i| jinv[k][i] * r[i]).sum();
            }
            let mut alpha = 1.0;
            loop {
                let mut trial = xh;
                for k in 0..self.dim {
                    trial[k] += alpha * step[k];
                }
                let (rt, nt) = residual(&trial);
                if nt < rnorm || alpha < 1e-3 {
                    xh = trial;
                    r = rt;
                    rnorm = nt;
                    break;
                }
                alpha *= 0.5;
            }
            if !xh.iter().all(|v| v.is_finite()) || xh.iter().any(|v| v.abs() > 1e3) {
                break;
            }
        }
        if rnorm <= tol {
            Ok(xh)
        } else {
            Err(Error::NewtonNoConvergence { iterations: MAX_NEWTON_ITERATIONS, residual: rnorm })
        }
    }

    /// Default inversion tolerance: `1e-12` times the cell diameter.
    pub fn default_tolerance(&self) -> f64 {
        1e-12 * self.diameter
    }
}

pub(crate) fn det3(j: &[[f64; 3]; 3]) -> f64 {
    j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
}

pub(crate) fn inv3(j: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = det3(j);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let d = 1.0 / det;
    Some([
        [
            (j[1][1] * j[2][2] - j[1][2] * j[2][1]) * d,
            (j[0][2] * j[2][1] - j[0][1] * j[2][2]) * d,
            (j[0][1] * j[1][2] - j[0][2] * j[1][1]) * d,
        ],
        [
            (j[1][2] * j[2][0] - j[1][0] * j[2][2]) * d,
            (j[0][0] * j[2][2] - j[0][2] * j[2][0]) * d,
            (j[0][2] * j[1][0] - j[0][0] * j[1][2]) * d,
        ],
        [
            (j[1][0] * j[2][1] - j[1][1] * j[2][0]) * d,
            (j[0][1] * j[2][0] - j[0][0] * j[2][1]) * d,
            (j[0][0] * j[1][1] - j[0][1] * j[1][0]) * d,
        ],
    ])
}
