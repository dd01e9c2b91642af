use std::collections::BTreeMap;

use super::FESpace;
use crate::error::{Error, Result};
use crate::mesh::Point;

/// Dirichlet constraints: a set of DoFs with prescribed values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Constraints {
    mask: Vec<bool>,
    values: BTreeMap<usize, f64>,
}

impl Constraints {
    /// No constrained DoFs.
    pub fn none(n_dofs: usize) -> Self {
        Self { mask: vec![false; n_dofs], values: BTreeMap::new() }
    }

    pub fn n_dofs(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.mask[dof]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn n_free(&self) -> usize {
        self.mask.len() - self.values.len()
    }

    /// Constrained DoFs in ascending order with their values.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&d, &v)| (d, v))
    }

    /// Writes the prescribed values into `u`.
    pub fn distribute(&self, u: &mut [f64]) {
        for (&d, &v) in &self.values {
            u[d] = v;
        }
    }

    /// Zeroes all constrained entries of `u`.
    pub fn set_zero(&self, u: &mut [f64]) {
        for &d in self.values.keys() {
            u[d] = 0.0;
        }
    }

    /// The same DoF set with all values zero.
    pub fn homogeneous(&self) -> Self {
        Self { mask: self.mask.clone(), values: self.values.keys().map(|&d| (d, 0.0)).collect() }
    }
}

/// Constrains every DoF whose support point lies on a boundary face carrying
/// one of `boundary_ids`; component `c` of such a node is set to `g(x, c)`.
pub fn dirichlet_constraints(
    space: &FESpace,
    boundary_ids: &[u32],
    g: impl Fn(&Point, usize) -> f64,
) -> Result<Constraints> {
    let mesh = space.mesh();
    let known = mesh.boundary_ids();
    if let Some(&id) = boundary_ids.iter().find(|id| !known.contains(id)) {
        return Err(Error::UnknownBoundaryId(id));
    }
    let n = space.degree() + 1;
    let nc = space.n_components();
    let mut out = Constraints::none(space.n_dofs());
    for f in mesh.boundary_faces() {
        if !boundary_ids.contains(&f.id) {
            continue;
        }
        let axis = (f.face / 2) as usize;
        let target = if f.face % 2 == 1 { n - 1 } else { 0 };
        let stride = n.pow(axis as u32);
        for (idx, &node) in space.cell_nodes(f.cell).iter().enumerate() {
            if (idx / stride) % n != target {
                continue;
            }
            let x = &space.support_points()[node];
            for c in 0..nc {
                let dof = node * nc + c;
                out.mask[dof] = true;
                out.values.insert(dof, g(x, c));
            }
        }
    }
    Ok(out)
}
