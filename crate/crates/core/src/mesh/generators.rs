use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{cell_edges, dist, Mesh, Point};
use crate::error::{Error, Result};

/// Tensor-product mesh over the given axis coordinates, keeping only the
/// cells whose centroid satisfies `keep`.
fn structured(
    dim: usize,
    axes: &[Vec<f64>],
    keep: impl Fn(&Point) -> bool,
    boundary_id: impl Fn(&Point) -> u32,
) -> Result<Mesh> {
    let nc: Vec<usize> = (0..3).map(|k| if k < dim { axes[k].len() - 1 } else { 1 }).collect();
    let nv: Vec<usize> = (0..3).map(|k| if k < dim { axes[k].len() } else { 1 }).collect();
    let coord = |k: usize, i: usize| if k < dim { axes[k][i] } else { 0.0 };

    let mut kept = Vec::new();
    for iz in 0..nc[2] {
        for iy in 0..nc[1] {
            for ix in 0..nc[0] {
                let idx = [ix, iy, iz];
                let mut c = [0.0; 3];
                for k in 0..dim {
                    c[k] = 0.5 * (coord(k, idx[k]) + coord(k, idx[k] + 1));
                }
                if keep(&c) {
                    kept.push(idx);
                }
            }
        }
    }
    let grid_index = |i: [usize; 3]| i[0] + nv[0] * (i[1] + nv[1] * i[2]);
    let mut used = vec![false; nv[0] * nv[1] * nv[2]];
    for idx in &kept {
        for v in 0..1usize << dim {
            let mut i = *idx;
            for k in 0..dim {
                i[k] += (v >> k) & 1;
            }
            used[grid_index(i)] = true;
        }
    }
    let mut renumber = vec![usize::MAX; used.len()];
    let mut vertices = Vec::new();
    for iz in 0..nv[2] {
        for iy in 0..nv[1] {
            for ix in 0..nv[0] {
                let g = grid_index([ix, iy, iz]);
                if used[g] {
                    renumber[g] = vertices.len();
                    vertices.push([coord(0, ix), coord(1, iy), if dim == 3 { coord(2, iz) } else { 0.0 }]);
                }
            }
        }
    }
    let mut cells = Vec::with_capacity(kept.len() << dim);
    for idx in &kept {
        for v in 0..1usize << dim {
            let mut i = *idx;
            for k in 0..dim {
                i[k] += (v >> k) & 1;
            }
            cells.push(renumber[grid_index(i)]);
        }
    }
    Mesh::from_cells(dim, vertices, cells, boundary_id)
}

fn linspace(lo: f64, hi: f64, n_intervals: usize) -> Vec<f64> {
    (0..=n_intervals)
        .map(|i| if i == n_intervals { hi } else { lo + (hi - lo) * i as f64 / n_intervals as f64 })
        .collect()
}

/// Structured mesh of `[lo, hi]^dim` with `2^(dim·n_refinements)` cells.
///
/// Boundary ids are colorized: the face `x_k = lo` gets id `2k`, the face
/// `x_k = hi` gets id `2k + 1`.
pub fn generate_hypercube(dim: usize, lo: f64, hi: f64, n_refinements: usize) -> Result<Mesh> {
    let n = 1usize << n_refinements;
    let axes: Vec<Vec<f64>> = (0..dim).map(|_| linspace(lo, hi, n)).collect();
    let tol = 1e-12 * (hi - lo).abs();
    structured(dim, &axes, |_| true, |c| {
        for k in 0..dim {
            if (c[k] - lo).abs() <= tol {
                return 2 * k as u32;
            }
            if (c[k] - hi).abs() <= tol {
                return 2 * k as u32 + 1;
            }
        }
        0
    })
}

/// L-shaped domain (`dim = 2`) or Fichera corner (`dim = 3`): `[-1,1]^dim`
/// without the open positive orthant, all boundary faces with id 0.
///
/// Each of the `corner_refine_rounds` rounds bisects, along every axis, the
/// `depth` intervals on either side of the re-entrant corner coordinate. Whole
/// bands of cells are split, so the mesh stays conforming.
pub fn lshape_graded(dim: usize, n_refinements: usize, corner_refine_rounds: usize, depth: usize) -> Result<Mesh> {
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidMesh(format!("L-shape needs dim 2 or 3, got {dim}")));
    }
    let mut axis = linspace(-1.0, 1.0, 2 << n_refinements);
    for _ in 0..corner_refine_rounds {
        let zero = axis.iter().position(|&x| x == 0.0).expect("corner coordinate is a grid line");
        let lo = zero.saturating_sub(depth);
        let hi = (zero + depth).min(axis.len() - 1);
        let mut refined = Vec::with_capacity(axis.len() + 2 * depth);
        for i in 0..axis.len() {
            refined.push(axis[i]);
            if i >= lo && i < hi {
                refined.push(0.5 * (axis[i] + axis[i + 1]));
            }
        }
        axis = refined;
    }
    let axes: Vec<Vec<f64>> = (0..dim).map(|_| axis.clone()).collect();
    structured(dim, &axes, |c| !(0..dim).all(|k| c[k] > 0.0), |_| 0)
}

/// L-shape / Fichera mesh with corner refinement bands two cells deep.
pub fn generate_lshape(dim: usize, n_refinements: usize, corner_refine_rounds: usize) -> Result<Mesh> {
    lshape_graded(dim, n_refinements, corner_refine_rounds, 2)
}

/// Unstructured-style 2D quad mesh: every cell of `base` is cut into two
/// triangles (alternating diagonals) and every triangle into three quads
/// through its centroid and edge midpoints. Interior vertices get valence 3
/// or 6 as in recombined triangulations.
pub fn split_triangles_to_quads(base: &Mesh, boundary_id: impl Fn(&Point) -> u32) -> Result<Mesh> {
    if base.dim() != 2 {
        return Err(Error::InvalidMesh(format!("triangle splitting needs dim 2, got {}", base.dim())));
    }
    let mut vertices = base.vertices().to_vec();
    let mut midpoints = std::collections::HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (x, y) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]), 0.0]);
            vertices.len() - 1
        })
    };
    let mut cells = Vec::with_capacity(base.n_cells() * 24);
    for cell in 0..base.n_cells() {
        let v = base.cell_vertices(cell);
        let tris = if cell % 2 == 0 { [[v[0], v[1], v[3]], [v[0], v[3], v[2]]] } else { [[v[0], v[1], v[2]], [v[1], v[3], v[2]]] };
        for [a, b, c] in tris {
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            vertices.push([(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0, 0.0]);
            let g = vertices.len() - 1;
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            // counter-clockwise (p0, p1, p2, p3) stored as (p0, p1, p3, p2)
            for [p0, p1, p2, p3] in [[a, ab, g, ca], [b, bc, g, ab], [c, ca, g, bc]] {
                cells.extend_from_slice(&[p0, p1, p3, p2]);
            }
        }
    }
    Mesh::from_cells(2, vertices, cells, boundary_id)
}

/// Moves every interior vertex by a smooth random displacement.
///
/// The displacement of vertex `v` is `amplitude · h_v · g(x_v)`, where `h_v`
/// is the shortest edge touching `v` and `g` is a seeded sum of sine modes
/// with `|g_k| ≤ 1`. Boundary vertices stay fixed, so the domain is unchanged.
pub fn generate_perturbed(base: &Mesh, amplitude: f64, seed: u64) -> Result<Mesh> {
    if !(0.0..0.5).contains(&amplitude) {
        return Err(Error::InvalidAmplitude(amplitude));
    }
    let dim = base.dim();
    if amplitude == 0.0 {
        return Ok(base.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = base.bounding_box();
    let size: Vec<f64> = (0..3).map(|k| (hi[k] - lo[k]).max(f64::MIN_POSITIVE)).collect();
    const MODES: usize = 4;
    // (amplitude, frequency vector, phase) per component and mode
    let mut modes = vec![Vec::new(); dim];
    for comp in modes.iter_mut() {
        for _ in 0..MODES {
            let a: f64 = rng.gen_range(0.5..1.0);
            let mut f = [0.0; 3];
            for fk in f.iter_mut().take(dim) {
                *fk = rng.gen_range(-3.0..3.0);
            }
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            comp.push((a, f, phase));
        }
    }
    let field = |x: &Point, comp: usize| -> f64 {
        let mut s = 0.0;
        let mut total = 0.0;
        for &(a, f, phase) in &modes[comp] {
            let mut arg = phase;
            for k in 0..dim {
                arg += std::f64::consts::TAU * f[k] * (x[k] - lo[k]) / size[k];
            }
            s += a * arg.sin();
            total += a;
        }
        s / total
    };

    let mut local_h = vec![f64::INFINITY; base.n_vertices()];
    for cell in 0..base.n_cells() {
        let vs = base.cell_vertices(cell);
        for (a, b) in cell_edges(dim) {
            let h = dist(base.vertex(vs[a]), base.vertex(vs[b]));
            local_h[vs[a]] = local_h[vs[a]].min(h);
            local_h[vs[b]] = local_h[vs[b]].min(h);
        }
    }
    let on_boundary = base.boundary_vertex_mask();
    let vertices: Vec<Point> = base
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, x)| {
            if on_boundary[v] {
                return *x;
            }
            let mut y = *x;
            for k in 0..dim {
                y[k] += amplitude * local_h[v] * field(x, k);
            }
            y
        })
        .collect();
    Mesh::new(dim, vertices, base.cells().to_vec(), base.boundary_faces().to_vec())
        .map(|m| m.with_level_id(base.level_id()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_counts() {
        let m = generate_hypercube(2, -1.0, 1.0, 0).unwrap();
        assert_eq!((m.n_cells(), m.n_vertices()), (1, 4));
        let m = generate_hypercube(3, -1.0, 1.0, 2).unwrap();
        assert_eq!(m.n_cells(), 64);
        assert_eq!(m.n_vertices(), 125);
        assert_eq!(m.boundary_faces().len(), 6 * 16);
        assert_eq!(m.boundary_ids(), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn hypercube_cells_are_affine_with_equal_jacobians() {
        let m = generate_hypercube(3, -1.0, 1.0, 2).unwrap();
        let j0 = m.mapping(0).jacobian(&[0.5; 3]);
        for c in 0..m.n_cells() {
            let map = m.mapping(c);
            assert!(map.is_affine());
            for xh in [[0.0; 3], [1.0, 0.3, 0.7], [0.2, 0.9, 0.1]] {
                assert_eq!(map.jacobian(&xh), j0);
            }
        }
    }

    #[test]
    fn lshape_counts() {
        assert_eq!(generate_lshape(2, 1, 0).unwrap().n_cells(), 12);
        assert_eq!(generate_lshape(2, 3, 0).unwrap().n_cells(), 192);
        assert_eq!(generate_lshape(3, 0, 0).unwrap().n_cells(), 7);
    }

    #[test]
    fn corner_refinement_stays_near_corner() {
        let base = generate_lshape(3, 1, 0).unwrap();
        let m = generate_lshape(3, 1, 2).unwrap();
        assert!(m.n_cells() > base.n_cells());
        // cells of the smallest size only appear within two base bands of the corner
        let hmin = m.min_edge_length();
        for c in 0..m.n_cells() {
            let map = m.mapping(c);
            if map.diameter() < 1.01 * hmin * 3f64.sqrt() {
                let x = m.cell_centroid(c);
                assert!(x.iter().all(|v| v.abs() <= 1.0 + 1e-12));
                assert!(x.iter().any(|v| v.abs() < 0.5));
            }
        }
        let base_h = base.min_edge_length();
        assert!((hmin - base_h / 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let base = generate_lshape(2, 2, 1).unwrap();
        assert_eq!(generate_perturbed(&base, 0.0, 3).unwrap(), base);
    }

    #[test]
    fn perturbation_keeps_boundary_and_topology() {
        let base = generate_hypercube(2, 0.0, 1.0, 3).unwrap();
        let m = generate_perturbed(&base, 0.3, 5).unwrap();
        assert_eq!(m.cells(), base.cells());
        let mask = base.boundary_vertex_mask();
        let mut moved = 0;
        for v in 0..m.n_vertices() {
            if mask[v] {
                assert_eq!(m.vertex(v), base.vertex(v));
            } else if m.vertex(v) != base.vertex(v) {
                moved += 1;
            }
        }
        assert_eq!(moved, 49);
    }

    #[test]
    fn perturbation_rejects_bad_amplitude() {
        let base = generate_hypercube(2, 0.0, 1.0, 2).unwrap();
        assert!(matches!(generate_perturbed(&base, 0.5, 1), Err(Error::InvalidAmplitude(_))));
        assert!(matches!(generate_perturbed(&base, -0.1, 1), Err(Error::InvalidAmplitude(_))));
    }

    #[test]
    fn perturbation_inverting_a_sheared_mesh_is_rejected() {
        // thin sheared parallelograms: moving an interior vertex by a sizable
        // fraction of the long edge folds the cells
        let base = generate_hypercube(2, 0.0, 1.0, 3).unwrap();
        let vertices: Vec<Point> = base.vertices().iter().map(|x| [x[0] + 4.0 * x[1], 0.05 * x[1], 0.0]).collect();
        let sheared = Mesh::new(2, vertices, base.cells().to_vec(), base.boundary_faces().to_vec()).unwrap();
        let found = (0..20).any(|seed| {
            matches!(generate_perturbed(&sheared, 0.45, seed), Err(Error::NonPositiveJacobian { .. }))
        });
        assert!(found);
    }

    #[test]
    fn triangle_split_counts_and_area() {
        let base = generate_lshape(2, 1, 0).unwrap();
        let m = split_triangles_to_quads(&base, |_| 0).unwrap();
        assert_eq!(m.n_cells(), 6 * base.n_cells());
        // vertices + edges + 2 centroids per base cell
        let edges = (4 * base.n_cells() + base.boundary_faces().len()) / 2 + base.n_cells();
        assert_eq!(m.n_vertices(), base.n_vertices() + edges + 2 * base.n_cells());
        let area: f64 = (0..m.n_cells()).map(|c| m.mapping(c).jacobian_det(&[0.5; 3])).sum();
        assert!((area - 3.0).abs() < 1e-12);
        let mut valence = vec![0; m.n_vertices()];
        for &v in m.cells() {
            valence[v] += 1;
        }
        assert!(valence.contains(&3) && valence.contains(&6));
        assert!(split_triangles_to_quads(&generate_hypercube(3, 0.0, 1.0, 0).unwrap(), |_| 0).is_err());
    }
}
