//! Continuous Lagrange `Q^p` spaces on quad/hex meshes.
//!
//! Local nodes of a cell are numbered lexicographically with the first
//! reference direction fastest. Vector-valued spaces interleave components:
//! global DoF `node * n_components + c`.

mod basis;
mod constraints;

use std::collections::HashMap;
use std::sync::Arc;

pub use basis::{eval_shape_1d, gauss_legendre, gauss_lobatto_points, Shape1D};
pub(crate) use basis::contract;
pub use constraints::{dirichlet_constraints, Constraints};

use crate::mesh::{Mesh, Point};

#[derive(Debug, Clone)]
pub struct FESpace {
    mesh: Arc<Mesh>,
    shape: Shape1D,
    n_components: usize,
    // flat, (p+1)^d node indices per cell
    cell_nodes: Vec<usize>,
    support_points: Vec<Point>,
}

/// Reference coordinates of the local node with lexicographic index `idx`.
pub fn local_node_ref(nodes_1d: &[f64], dim: usize, idx: usize) -> Point {
    let n = nodes_1d.len();
    let mut x = [0.0; 3];
    let mut rest = idx;
    for xk in x.iter_mut().take(dim) {
        *xk = nodes_1d[rest % n];
        rest /= n;
    }
    x
}

impl FESpace {
    /// Enumerates DoFs; support points shared between cells are merged when they
    /// agree to `1e-10` times the smallest mesh edge.
    pub fn new(mesh: Arc<Mesh>, degree: usize, n_components: usize) -> Self {
        assert!(degree >= 1, "degree must be at least 1");
        assert!(n_components >= 1);
        let shape = Shape1D::new(degree);
        let dim = mesh.dim();
        let npc = (degree + 1).pow(dim as u32);
        let h = mesh.min_edge_length();
        let tol = 1e-10 * h;
        let bucket = 1e-8 * h;
        let refs: Vec<Point> = (0..npc).map(|i| local_node_ref(shape.nodes(), dim, i)).collect();

        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        let mut support_points = Vec::new();
        let mut cell_nodes = Vec::with_capacity(mesh.n_cells() * npc);
        for cell in 0..mesh.n_cells() {
            let map = mesh.mapping(cell);
            for xh in &refs {
                let x = map.map_to_real(xh);
                let key = x.map(|c| (c / bucket).floor() as i64);
                let mut found = None;
                'search: for dz in -1..=1i64 {
                    for dy in -1..=1i64 {
                        for dx in -1..=1i64 {
                            let k = [key[0] + dx, key[1] + dy, key[2] + dz];
                            if let Some(list) = grid.get(&k) {
                                for &node in list {
                                    if crate::mesh::dist(&support_points[node], &x) <= tol {
                                        found = Some(node);
                                        break 'search;
                                    }
                                }
                            }
                        }
                    }
                }
                let node = found.unwrap_or_else(|| {
                    let id = support_points.len();
                    support_points.push(x);
                    grid.entry(key).or_default().push(id);
                    id
                });
                cell_nodes.push(node);
            }
        }
        Self { mesh, shape, n_components, cell_nodes, support_points }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn degree(&self) -> usize {
        self.shape.degree()
    }

    pub fn shape(&self) -> &Shape1D {
        &self.shape
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_nodes(&self) -> usize {
        self.support_points.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes() * self.n_components
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn nodes_per_cell(&self) -> usize {
        (self.degree() + 1).pow(self.dim() as u32)
    }

    pub fn dofs_per_cell(&self) -> usize {
        self.nodes_per_cell() * self.n_components
    }

    pub fn cell_nodes(&self, cell: usize) -> &[usize] {
        let n = self.nodes_per_cell();
        &self.cell_nodes[cell * n..(cell + 1) * n]
    }

    /// Global DoFs of a cell, component-major: all nodes of component 0 first.
    pub fn cell_dofs(&self, cell: usize) -> Vec<usize> {
        let nc = self.n_components;
        let mut out = Vec::with_capacity(self.dofs_per_cell());
        for c in 0..nc {
            out.extend(self.cell_nodes(cell).iter().map(|&n| n * nc + c));
        }
        out
    }

    pub fn support_points(&self) -> &[Point] {
        &self.support_points
    }

    /// Support point of a DoF.
    pub fn support_point(&self, dof: usize) -> &Point {
        &self.support_points[dof / self.n_components]
    }

    /// Nodal interpolant of a scalar function; every component receives `f`.
    pub fn interpolate(&self, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        self.interpolate_components(|x, _| f(x))
    }

    pub fn interpolate_components(&self, f: impl Fn(&Point, usize) -> f64) -> Vec<f64> {
        let nc = self.n_components;
        let mut u = vec![0.0; self.n_dofs()];
        for (node, x) in self.support_points.iter().enumerate() {
            for c in 0..nc {
                u[node * nc + c] = f(x, c);
            }
        }
        u
    }

    /// Tensor-product basis values at `xh`, lexicographic local order.
    pub fn basis_values(&self, xh: &Point) -> Vec<f64> {
        let dim = self.dim();
        let n = self.shape.n();
        let v: Vec<Vec<f64>> = (0..dim).map(|k| self.shape.values(xh[k])).collect();
        (0..self.nodes_per_cell())
            .map(|idx| {
                let mut rest = idx;
                let mut prod = 1.0;
                for vk in &v {
                    prod *= vk[rest % n];
                    rest /= n;
                }
                prod
            })
            .collect()
    }

    /// Reference gradients of the tensor basis at `xh`, one `[∂0, ∂1, ∂2]` per node.
    pub fn basis_gradients(&self, xh: &Point) -> Vec<[f64; 3]> {
        let dim = self.dim();
        let n = self.shape.n();
        let v: Vec<Vec<f64>> = (0..dim).map(|k| self.shape.values(xh[k])).collect();
        let d: Vec<Vec<f64>> = (0..dim).map(|k| self.shape.derivatives(xh[k])).collect();
        (0..self.nodes_per_cell())
            .map(|idx| {
                let mut ijk = [0; 3];
                let mut rest = idx;
                for i in ijk.iter_mut().take(dim) {
                    *i = rest % n;
                    rest /= n;
                }
                let mut g = [0.0; 3];
                for (k, gk) in g.iter_mut().enumerate().take(dim) {
                    *gk = (0..dim).map(|a| if a == k { d[a][ijk[a]] } else { v[a][ijk[a]] }).product();
                }
                g
            })
            .collect()
    }

    /// Evaluates the FE field `u` inside `cell` at reference point `xh`,
    /// returning one value per component.
    pub fn evaluate(&self, u: &[f64], cell: usize, xh: &Point) -> Vec<f64> {
        let nc = self.n_components;
        let phi = self.basis_values(xh);
        let mut out = vec![0.0; nc];
        for (&node, &w) in self.cell_nodes(cell).iter().zip(&phi) {
            for (c, o) in out.iter_mut().enumerate() {
                *o += w * u[node * nc + c];
            }
        }
        out
    }

    /// `L²` norm of `u - exact` using a Gauss rule with `p + 3` points per direction.
    pub fn l2_error(&self, u: &[f64], exact: impl Fn(&Point, usize) -> f64) -> f64 {
        let dim = self.dim();
        let nq = self.degree() + 3;
        let (qp, qw) = gauss_legendre(nq);
        let nqt = nq.pow(dim as u32);
        let mut err = 0.0;
        for cell in 0..self.n_cells() {
            let map = self.mesh.mapping(cell);
            for q in 0..nqt {
                let xh = local_node_ref(&qp, dim, q);
                let w: f64 = (0..dim).map(|k| qw[(q / nq.pow(k as u32)) % nq]).product();
                let jxw = map.jacobian_det(&xh) * w;
                let x = map.map_to_real(&xh);
                let uh = self.evaluate(u, cell, &xh);
                for (c, v) in uh.iter().enumerate() {
                    err += jxw * (v - exact(&x, c)).powi(2);
                }
            }
        }
        err.sqrt()
    }
}
