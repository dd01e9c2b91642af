//! Explicit sparse assembly (test oracle) and right-hand sides.

use super::{MatrixFreeOperator, Physics, ORACLE_MAX_DOFS};
use crate::error::{Error, Result};
use crate::fespace::{gauss_legendre, local_node_ref, Constraints, FESpace};
use crate::linalg::CsrMatrix;
use crate::mesh::mapping::inv3;
use crate::mesh::Point;

/// Vector-valued load; scalar problems read component 0.
pub type Load<'a> = &'a dyn Fn(&Point) -> [f64; 3];

/// Assembles the constrained operator explicitly with full (non-factorized)
/// basis evaluation. Constrained rows and columns are replaced by identity.
pub fn assemble_oracle(op: &MatrixFreeOperator) -> Result<CsrMatrix> {
    let space = op.space();
    let n = space.n_dofs();
    if n > ORACLE_MAX_DOFS {
        return Err(Error::TooLargeForAssembly { n, limit: ORACLE_MAX_DOFS });
    }
    let dim = space.dim();
    let nq = space.degree() + 1;
    let (qp, qw) = gauss_legendre(nq);
    let npc = space.nodes_per_cell();
    let constraints = op.constraints();
    let mut triplets = Vec::new();
    for cell in 0..space.n_cells() {
        let map = space.mesh().mapping(cell);
        let dofs = space.cell_dofs(cell);
        let mut ke = vec![0.0; dofs.len() * dofs.len()];
        for q in 0..nq.pow(dim as u32) {
            let xh = local_node_ref(&qp, dim, q);
            let w: f64 = (0..dim).map(|k| qw[(q / nq.pow(k as u32)) % nq]).product();
            let j = map.jacobian(&xh);
            let jinv = inv3(&j).expect("valid mesh");
            let jxw = map.jacobian_det(&xh) * w;
            let grads: Vec<[f64; 3]> = space
                .basis_gradients(&xh)
                .iter()
                .map(|g| {
                    let mut p = [0.0; 3];
                    for (i, pi) in p.iter_mut().enumerate().take(dim) {
                        *pi = (0..dim).map(|k| g[k] * jinv[k][i]).sum();
                    }
                    p
                })
                .collect();
            for a in 0..dofs.len() {
                let (ca, ga) = (a / npc, &grads[a % npc]);
                for b in 0..dofs.len() {
                    let (cb, gb) = (b / npc, &grads[b % npc]);
                    let v = match op.physics() {
                        Physics::Laplace => {
                            if ca == cb {
                                (0..dim).map(|i| ga[i] * gb[i]).sum()
                            } else {
                                0.0
                            }
                        }
                        Physics::Elasticity { lambda, mu } => {
                            // λ div φa div φb + 2μ ε(φa):ε(φb) with φ = ψ e_c
                            let div = lambda * ga[ca] * gb[cb];
                            let mut eps = 0.0;
                            for i in 0..dim {
                                for jj in 0..dim {
                                    let ea = 0.5 * (if i == ca { ga[jj] } else { 0.0 } + if jj == ca { ga[i] } else { 0.0 });
                                    let eb = 0.5 * (if i == cb { gb[jj] } else { 0.0 } + if jj == cb { gb[i] } else { 0.0 });
                                    eps += ea * eb;
                                }
                            }
                            div + 2.0 * mu * eps
                        }
                    };
                    ke[a * dofs.len() + b] += jxw * v;
                }
            }
        }
        for (a, &ra) in dofs.iter().enumerate() {
            if constraints.is_constrained(ra) {
                continue;
            }
            for (b, &cb) in dofs.iter().enumerate() {
                if !constraints.is_constrained(cb) {
                    triplets.push((ra, cb, ke[a * dofs.len() + b]));
                }
            }
        }
    }
    for (d, _) in constraints.iter() {
        triplets.push((d, d, 1.0));
    }
    Ok(CsrMatrix::from_triplets(n, n, triplets))
}

/// `b_i = ∫ f·φ_i + Σ ∫_{Γ_id} g·φ_i` with Gauss–Legendre rules of `p + 1`
/// points per direction; constrained entries are zero.
pub fn assemble_rhs(
    space: &FESpace,
    constraints: &Constraints,
    body: Load,
    neumann: &[(u32, Load)],
) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let known = mesh.boundary_ids();
    if let Some((id, _)) = neumann.iter().find(|(id, _)| !known.contains(id)) {
        return Err(Error::UnknownBoundaryId(*id));
    }
    let dim = space.dim();
    let nc = space.n_components();
    let nq = space.degree() + 1;
    let (qp, qw) = gauss_legendre(nq);
    let mut b = vec![0.0; space.n_dofs()];
    for cell in 0..space.n_cells() {
        let map = mesh.mapping(cell);
        let nodes = space.cell_nodes(cell);
        for q in 0..nq.pow(dim as u32) {
            let xh = local_node_ref(&qp, dim, q);
            let w: f64 = (0..dim).map(|k| qw[(q / nq.pow(k as u32)) % nq]).product();
            let jxw = map.jacobian_det(&xh) * w;
            let f = body(&map.map_to_real(&xh));
            for (&node, phi) in nodes.iter().zip(space.basis_values(&xh)) {
                for c in 0..nc {
                    b[node * nc + c] += jxw * f[c] * phi;
                }
            }
        }
    }
    let nfq = nq.pow(dim as u32 - 1);
    for face in mesh.boundary_faces() {
        let Some((_, g)) = neumann.iter().find(|(id, _)| *id == face.id) else {
            continue;
        };
        let axis = (face.face / 2) as usize;
        let side = (face.face % 2) as f64;
        let others: Vec<usize> = (0..dim).filter(|&k| k != axis).collect();
        let map = mesh.mapping(face.cell);
        let nodes = space.cell_nodes(face.cell);
        for q in 0..nfq {
            let mut xh = [0.0; 3];
            xh[axis] = side;
            let mut w = 1.0;
            for (s, &k) in others.iter().enumerate() {
                let i = (q / nq.pow(s as u32)) % nq;
                xh[k] = qp[i];
                w *= qw[i];
            }
            let j = map.jacobian(&xh);
            let col = |k: usize| [j[0][k], j[1][k], j[2][k]];
            let area = if dim == 2 {
                let t = col(others[0]);
                (t[0] * t[0] + t[1] * t[1]).sqrt()
            } else {
                let (a, c) = (col(others[0]), col(others[1]));
                let n = [a[1] * c[2] - a[2] * c[1], a[2] * c[0] - a[0] * c[2], a[0] * c[1] - a[1] * c[0]];
                (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
            };
            let gv = g(&map.map_to_real(&xh));
            for (&node, phi) in nodes.iter().zip(space.basis_values(&xh)) {
                for c in 0..nc {
                    b[node * nc + c] += area * w * gv[c] * phi;
                }
            }
        }
    }
    constraints.set_zero(&mut b);
    Ok(b)
}
