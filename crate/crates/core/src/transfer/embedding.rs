use std::collections::HashMap;
use std::sync::Arc;

use super::nonnested::check_compatible;
use super::Transfer;
use crate::error::{Error, Result};
use crate::fespace::{contract, Constraints, FESpace};
use crate::geosearch::{build_tree, locate_points, SearchConfig};
use crate::mesh::{dist, Mesh, Point};

/// Classical cell-wise embedding for nested levels: every fine cell is the
/// image of an axis-aligned sub-box `o + s·[0,1]^d` of one coarse cell, and
/// the coarse basis restricted to it is applied by 1D interpolation matrices
/// with sum factorization. Covers nested h-refinement and `p → p-1`
/// coarsening on a shared mesh.
#[derive(Debug, Clone)]
pub struct EmbeddingTransfer {
    coarse: Arc<FESpace>,
    fine: Arc<FESpace>,
    coarse_free: Vec<bool>,
    fine_free: Vec<bool>,
    // per fine cell: coarse cell and one 1D matrix id per direction
    parents: Vec<(usize, [usize; 3])>,
    // n_fine_1d × n_coarse_1d, row-major
    matrices: Vec<Vec<f64>>,
    // 1 / number of fine cells sharing each fine node
    weights: Vec<f64>,
}

impl EmbeddingTransfer {
    /// Finds the parent of every fine cell by locating its centroid; fails
    /// with `NotNested` if a fine cell is not a reference sub-box of it.
    pub fn setup_nested(
        coarse: Arc<FESpace>,
        coarse_constraints: &Constraints,
        fine: Arc<FESpace>,
        fine_constraints: &Constraints,
    ) -> Result<Self> {
        check_compatible(&coarse, coarse_constraints, &fine, fine_constraints)?;
        let cmesh = coarse.mesh().clone();
        let fmesh = fine.mesh().clone();
        let cfg = SearchConfig::default();
        let centroids: Vec<Point> = (0..fmesh.n_cells()).map(|c| fmesh.cell_centroid(c)).collect();
        let tree = build_tree(&cmesh, cfg.padding_for(&cmesh));
        let found = locate_points(&tree, &cmesh, &centroids, &cfg)?;
        let boxes = found
            .iter()
            .enumerate()
            .map(|(cell, o)| sub_box(&cmesh, o.cell, &fmesh, cell).map(|b| (o.cell, b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_boxes(coarse, coarse_constraints, fine, fine_constraints, boxes))
    }

    /// Degree coarsening on one mesh: the fine space has degree `p`, the
    /// coarse space degree `p - 1`.
    pub fn setup_polynomial(
        coarse: Arc<FESpace>,
        coarse_constraints: &Constraints,
        fine: Arc<FESpace>,
        fine_constraints: &Constraints,
    ) -> Result<Self> {
        if fine.degree() < 2 {
            return Err(Error::DegreeTooLow(fine.degree()));
        }
        check_compatible(&coarse, coarse_constraints, &fine, fine_constraints)?;
        if !Arc::ptr_eq(coarse.mesh(), fine.mesh()) && coarse.mesh() != fine.mesh() {
            return Err(Error::IncompatibleSpaces("polynomial transfer needs a shared mesh".into()));
        }
        if coarse.degree() + 1 != fine.degree() {
            return Err(Error::IncompatibleSpaces(format!(
                "coarse degree {} is not fine degree {} minus one",
                coarse.degree(),
                fine.degree()
            )));
        }
        let boxes = (0..fine.n_cells()).map(|c| (c, ([0.0; 3], [1.0; 3]))).collect();
        Ok(Self::from_boxes(coarse, coarse_constraints, fine, fine_constraints, boxes))
    }

    fn from_boxes(
        coarse: Arc<FESpace>,
        cc: &Constraints,
        fine: Arc<FESpace>,
        fc: &Constraints,
        boxes: Vec<(usize, (Point, Point))>,
    ) -> Self {
        let dim = fine.dim();
        let mut ids: HashMap<(i64, i64), usize> = HashMap::new();
        let mut matrices = Vec::new();
        let mut parents = Vec::with_capacity(boxes.len());
        for (ccell, (o, s)) in boxes {
            let mut m = [0; 3];
            for k in 0..dim {
                let key = ((o[k] * 1e9).round() as i64, (s[k] * 1e9).round() as i64);
                m[k] = *ids.entry(key).or_insert_with(|| {
                    matrices.push(
                        fine.shape().nodes().iter().flat_map(|&xi| coarse.shape().values(o[k] + s[k] * xi)).collect(),
                    );
                    matrices.len() - 1
                });
            }
            parents.push((ccell, m));
        }
        let mut count = vec![0usize; fine.n_nodes()];
        for cell in 0..fine.n_cells() {
            for &n in fine.cell_nodes(cell) {
                count[n] += 1;
            }
        }
        Self {
            coarse_free: cc.mask().iter().map(|c| !c).collect(),
            fine_free: fc.mask().iter().map(|c| !c).collect(),
            weights: count.iter().map(|&c| 1.0 / c as f64).collect(),
            coarse,
            fine,
            parents,
            matrices,
        }
    }

    pub fn coarse_space(&self) -> &Arc<FESpace> {
        &self.coarse
    }

    pub fn fine_space(&self) -> &Arc<FESpace> {
        &self.fine
    }

    /// Applies the per-direction matrices (or their transposes) to `src`.
    fn apply_1d(&self, mats: [usize; 3], src: &[f64], transpose: bool, t0: &mut [f64], t1: &mut [f64]) -> usize {
        let dim = self.fine.dim();
        let (nc1, nf1) = (self.coarse.degree() + 1, self.fine.degree() + 1);
        let (n_in, n_out) = if transpose { (nf1, nc1) } else { (nc1, nf1) };
        let mut dims = [1, 1, 1];
        dims[..dim].fill(n_in);
        // ping-pong between t0 and t1; returns which holds the result
        contract(src, dims, 0, &self.matrices[mats[0]], nf1, transpose, t0);
        dims[0] = n_out;
        for a in 1..dim {
            let (s, d) = if a % 2 == 1 { (&*t0, &mut *t1) } else { (&*t1, &mut *t0) };
            contract(s, dims, a, &self.matrices[mats[a]], nf1, transpose, d);
            dims[a] = n_out;
        }
        (dim + 1) % 2
    }
}

/// Reference sub-box `(origin, size)` of fine cell `fcell` inside coarse cell `ccell`.
fn sub_box(cmesh: &Mesh, ccell: usize, fmesh: &Mesh, fcell: usize) -> Result<(Point, Point)> {
    let map = cmesh.mapping(ccell);
    let dim = cmesh.dim();
    let tol = 1e-12 * map.diameter();
    let verts = fmesh.cell_vertices(fcell);
    let refs = verts
        .iter()
        .map(|&v| map.invert_mapping(fmesh.vertex(v), tol))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::NotNested(format!("fine cell {fcell} does not lie in coarse cell {ccell}")))?;
    let o = refs[0];
    let last = refs[refs.len() - 1];
    let mut s = [0.0; 3];
    for k in 0..dim {
        s[k] = last[k] - o[k];
    }
    for (i, r) in refs.iter().enumerate() {
        let mut expect = [0.0; 3];
        for k in 0..dim {
            expect[k] = o[k] + s[k] * ((i >> k) & 1) as f64;
        }
        let inside = (0..dim).all(|k| expect[k] > -1e-9 && expect[k] < 1.0 + 1e-9 && s[k] > 1e-9);
        if dist(&expect, r) > 1e-9 || !inside {
            return Err(Error::NotNested(format!("fine cell {fcell} is not a sub-box of coarse cell {ccell}")));
        }
    }
    Ok((o, s))
}

impl Transfer for EmbeddingTransfer {
    fn n_coarse(&self) -> usize {
        self.coarse.n_dofs()
    }

    fn n_fine(&self) -> usize {
        self.fine.n_dofs()
    }

    fn prolongate(&self, uc: &[f64], uf: &mut [f64]) {
        assert_eq!(uc.len(), self.n_coarse());
        assert_eq!(uf.len(), self.n_fine());
        let nc = self.fine.n_components();
        let big = (self.fine.degree() + 1).pow(self.fine.dim() as u32);
        let mut local = vec![0.0; self.coarse.nodes_per_cell()];
        let (mut t0, mut t1) = (vec![0.0; big], vec![0.0; big]);
        uf.fill(0.0);
        for (fcell, &(ccell, mats)) in self.parents.iter().enumerate() {
            for c in 0..nc {
                for (l, &node) in local.iter_mut().zip(self.coarse.cell_nodes(ccell)) {
                    let d = node * nc + c;
                    *l = if self.coarse_free[d] { uc[d] } else { 0.0 };
                }
                let res = if self.apply_1d(mats, &local, false, &mut t0, &mut t1) == 0 { &t0 } else { &t1 };
                for (&node, &v) in self.fine.cell_nodes(fcell).iter().zip(res.iter()) {
                    let d = node * nc + c;
                    if self.fine_free[d] {
                        uf[d] = v;
                    }
                }
            }
        }
    }

    fn restrict(&self, rf: &[f64], rc: &mut [f64]) {
        assert_eq!(rf.len(), self.n_fine());
        assert_eq!(rc.len(), self.n_coarse());
        let nc = self.fine.n_components();
        let big = (self.fine.degree() + 1).pow(self.fine.dim() as u32);
        let mut local = vec![0.0; self.fine.nodes_per_cell()];
        let (mut t0, mut t1) = (vec![0.0; big], vec![0.0; big]);
        rc.fill(0.0);
        for (fcell, &(ccell, mats)) in self.parents.iter().enumerate() {
            for c in 0..nc {
                for (l, &node) in local.iter_mut().zip(self.fine.cell_nodes(fcell)) {
                    let d = node * nc + c;
                    *l = if self.fine_free[d] { self.weights[node] * rf[d] } else { 0.0 };
                }
                let res = if self.apply_1d(mats, &local, true, &mut t0, &mut t1) == 0 { &t0 } else { &t1 };
                for (&node, &v) in self.coarse.cell_nodes(ccell).iter().zip(res.iter()) {
                    rc[node * nc + c] += v;
                }
            }
        }
        for (r, &free) in rc.iter_mut().zip(&self.coarse_free) {
            if !free {
                *r = 0.0;
            }
        }
    }

    fn name(&self) -> &'static str {
        "embedding"
    }
}
