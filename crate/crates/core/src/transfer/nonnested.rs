use std::sync::Arc;
use std::time::Instant;

use super::{eval_tensor, spread_tensor, ProlongationTiming, Transfer};
use crate::error::{Error, Result};
use crate::fespace::{Constraints, FESpace};
use crate::geosearch::{build_tree, locate_points, SearchConfig};
use crate::linalg::CsrMatrix;
use crate::mesh::Point;

/// Location of one fine support point in the coarse mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferPoint {
    pub fine_node: usize,
    pub coarse_cell: usize,
    pub reference: Point,
    pub projected: bool,
}

/// Prolongation by evaluating the coarse FE function at fine support points.
#[derive(Debug, Clone)]
pub struct NonNestedTransfer {
    coarse: Arc<FESpace>,
    fine: Arc<FESpace>,
    coarse_free: Vec<bool>,
    fine_free: Vec<bool>,
    points: Vec<TransferPoint>,
    // per point and direction, the n coarse 1D basis values
    tab: Vec<f64>,
}

impl NonNestedTransfer {
    /// Locates every fine node with at least one free component in the coarse
    /// mesh and tabulates the 1D coarse basis at its reference coordinates.
    pub fn setup(
        coarse: Arc<FESpace>,
        coarse_constraints: &Constraints,
        fine: Arc<FESpace>,
        fine_constraints: &Constraints,
        cfg: &SearchConfig,
    ) -> Result<Self> {
        check_compatible(&coarse, coarse_constraints, &fine, fine_constraints)?;
        let nc = fine.n_components();
        let fine_free: Vec<bool> = fine_constraints.mask().iter().map(|c| !c).collect();
        let coarse_free: Vec<bool> = coarse_constraints.mask().iter().map(|c| !c).collect();
        let nodes: Vec<usize> = (0..fine.n_nodes()).filter(|&n| (0..nc).any(|c| fine_free[n * nc + c])).collect();
        let pts: Vec<Point> = nodes.iter().map(|&n| fine.support_points()[n]).collect();
        let mesh = coarse.mesh();
        let tree = build_tree(mesh, cfg.padding_for(mesh));
        let found = locate_points(&tree, mesh, &pts, cfg)?;
        let dim = coarse.dim();
        let n = coarse.degree() + 1;
        let mut tab = vec![0.0; found.len() * dim * n];
        let mut points = Vec::with_capacity(found.len());
        for (o, chunk) in found.iter().zip(tab.chunks_mut(dim * n)) {
            for k in 0..dim {
                coarse.shape().values_into(o.reference[k], &mut chunk[k * n..(k + 1) * n]);
            }
            points.push(TransferPoint {
                fine_node: nodes[o.point],
                coarse_cell: o.cell,
                reference: o.reference,
                projected: o.projected,
            });
        }
        Ok(Self { coarse, fine, coarse_free, fine_free, points, tab })
    }

    pub fn points(&self) -> &[TransferPoint] {
        &self.points
    }

    pub fn coarse_space(&self) -> &Arc<FESpace> {
        &self.coarse
    }

    pub fn fine_space(&self) -> &Arc<FESpace> {
        &self.fine
    }

    pub fn n_projected(&self) -> usize {
        self.points.iter().filter(|p| p.projected).count()
    }

    /// Bytes held by the point records and tabulation.
    pub fn storage_bytes(&self) -> usize {
        self.points.len() * std::mem::size_of::<TransferPoint>() + self.tab.len() * 8
    }

    fn tabs(&self, i: usize) -> [&[f64]; 3] {
        let dim = self.coarse.dim();
        let n = self.coarse.degree() + 1;
        let t = &self.tab[i * dim * n..(i + 1) * dim * n];
        let z: &[f64] = &[];
        [&t[..n], &t[n..2 * n], if dim == 3 { &t[2 * n..] } else { z }]
    }

    fn gather(&self, i: usize, c: usize, uc: &[f64], local: &mut [f64]) {
        let nc = self.coarse.n_components();
        for (l, &node) in local.iter_mut().zip(self.coarse.cell_nodes(self.points[i].coarse_cell)) {
            let d = node * nc + c;
            *l = if self.coarse_free[d] { uc[d] } else { 0.0 };
        }
    }

    /// Explicit `n_fine × n_coarse` matrix from full tensor-basis evaluation.
    pub fn assemble_matrix(&self) -> Result<CsrMatrix> {
        let limit = crate::mfoperator::ORACLE_MAX_DOFS;
        if self.fine.n_dofs() > limit {
            return Err(Error::TooLargeForAssembly { n: self.fine.n_dofs(), limit });
        }
        let nc = self.fine.n_components();
        let mut triplets = Vec::new();
        for p in &self.points {
            let phi = self.coarse.basis_values(&p.reference);
            for c in 0..nc {
                let row = p.fine_node * nc + c;
                if !self.fine_free[row] {
                    continue;
                }
                for (&node, &v) in self.coarse.cell_nodes(p.coarse_cell).iter().zip(&phi) {
                    let col = node * nc + c;
                    if self.coarse_free[col] && v != 0.0 {
                        triplets.push((row, col, v));
                    }
                }
            }
        }
        Ok(CsrMatrix::from_triplets(self.fine.n_dofs(), self.coarse.n_dofs(), triplets))
    }
}

pub(crate) fn check_compatible(
    coarse: &FESpace,
    cc: &Constraints,
    fine: &FESpace,
    fc: &Constraints,
) -> Result<()> {
    if coarse.n_components() != fine.n_components() {
        return Err(Error::IncompatibleSpaces(format!(
            "{} coarse components vs {} fine components",
            coarse.n_components(),
            fine.n_components()
        )));
    }
    if coarse.dim() != fine.dim() {
        return Err(Error::IncompatibleSpaces("meshes differ in dimension".into()));
    }
    for (space, c) in [(coarse, cc), (fine, fc)] {
        if c.n_dofs() != space.n_dofs() {
            return Err(Error::SizeMismatch { expected: space.n_dofs(), got: c.n_dofs() });
        }
    }
    Ok(())
}

impl Transfer for NonNestedTransfer {
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
        let n = self.coarse.degree() + 1;
        let dim = self.coarse.dim();
        let mut local = vec![0.0; self.coarse.nodes_per_cell()];
        let mut tmp = vec![0.0; n * n];
        uf.fill(0.0);
        for (i, p) in self.points.iter().enumerate() {
            let tabs = self.tabs(i);
            for c in 0..nc {
                let d = p.fine_node * nc + c;
                if !self.fine_free[d] {
                    continue;
                }
                self.gather(i, c, uc, &mut local);
                uf[d] = eval_tensor(&local, n, dim, &tabs, &mut tmp);
            }
        }
    }

    fn restrict(&self, rf: &[f64], rc: &mut [f64]) {
        assert_eq!(rf.len(), self.n_fine());
        assert_eq!(rc.len(), self.n_coarse());
        let nc = self.fine.n_components();
        let n = self.coarse.degree() + 1;
        let dim = self.coarse.dim();
        let mut local = vec![0.0; self.coarse.nodes_per_cell()];
        rc.fill(0.0);
        for (i, p) in self.points.iter().enumerate() {
            let tabs = self.tabs(i);
            for c in 0..nc {
                let d = p.fine_node * nc + c;
                if !self.fine_free[d] {
                    continue;
                }
                local.fill(0.0);
                spread_tensor(rf[d], n, dim, &tabs, &mut local);
                for (&node, v) in self.coarse.cell_nodes(p.coarse_cell).iter().zip(&local) {
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

    fn profile_prolongate(&self, uc: &[f64], uf: &mut [f64]) -> ProlongationTiming {
        let nc = self.fine.n_components();
        let n = self.coarse.degree() + 1;
        let dim = self.coarse.dim();
        let npc = self.coarse.nodes_per_cell();
        let mut tmp = vec![0.0; n * n];
        let mut gathered = vec![0.0; self.points.len() * nc * npc];
        let mut values = vec![0.0; self.points.len() * nc];

        let t = Instant::now();
        for (i, block) in gathered.chunks_mut(nc * npc).enumerate() {
            for (c, local) in block.chunks_mut(npc).enumerate() {
                self.gather(i, c, uc, local);
            }
        }
        let mut gather_scatter = t.elapsed();

        let t = Instant::now();
        for (i, (block, out)) in gathered.chunks(nc * npc).zip(values.chunks_mut(nc)).enumerate() {
            let tabs = self.tabs(i);
            for (local, o) in block.chunks(npc).zip(out.iter_mut()) {
                *o = eval_tensor(local, n, dim, &tabs, &mut tmp);
            }
        }
        let evaluation = t.elapsed();

        let t = Instant::now();
        uf.fill(0.0);
        for (p, out) in self.points.iter().zip(values.chunks(nc)) {
            for (c, &v) in out.iter().enumerate() {
                let d = p.fine_node * nc + c;
                if self.fine_free[d] {
                    uf[d] = v;
                }
            }
        }
        gather_scatter += t.elapsed();
        ProlongationTiming { gather_scatter, evaluation }
    }

    fn name(&self) -> &'static str {
        "non-nested"
    }
}
