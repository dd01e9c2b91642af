use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fespace::dirichlet_constraints;
use crate::linalg::{dot, norm};
use crate::mesh::{generate_hypercube, generate_lshape, generate_perturbed, Mesh, Point};

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn laplace(mesh: Mesh, p: usize, dirichlet: bool) -> MatrixFreeOperator {
    let mesh = Arc::new(mesh);
    let ids = if dirichlet { mesh.boundary_ids() } else { vec![] };
    let space = Arc::new(FESpace::new(mesh, p, 1));
    let c = dirichlet_constraints(&space, &ids, |_, _| 0.0).unwrap();
    MatrixFreeOperator::laplace(space, c).unwrap()
}

fn meshes() -> Vec<Mesh> {
    vec![
        generate_hypercube(2, -1.0, 1.0, 2).unwrap(),
        generate_perturbed(&generate_hypercube(2, -1.0, 1.0, 2).unwrap(), 0.35, 5).unwrap(),
        generate_perturbed(&generate_lshape(2, 1, 1).unwrap(), 0.3, 2).unwrap(),
        generate_perturbed(&generate_hypercube(3, 0.0, 1.0, 1).unwrap(), 0.3, 8).unwrap(),
    ]
}

#[test]
fn unit_square_element_matrix() {
    let op = laplace(generate_hypercube(2, 0.0, 1.0, 0).unwrap(), 1, false);
    let m = assemble_oracle(&op).unwrap();
    // lexicographic vertices: 0-1 and 0-2 share an edge, 0-3 are opposite
    for i in 0..4 {
        assert!((m.get(i, i) - 2.0 / 3.0).abs() < 1e-14);
        assert!((m.get(i, i ^ 1) + 1.0 / 6.0).abs() < 1e-14);
        assert!((m.get(i, i ^ 2) + 1.0 / 6.0).abs() < 1e-14);
        assert!((m.get(i, i ^ 3) + 1.0 / 3.0).abs() < 1e-14);
    }
}

#[test]
fn constants_in_neumann_kernel() {
    for mesh in meshes() {
        for p in 1..=3 {
            let op = laplace(mesh.clone(), p, false);
            let u = vec![2.5; op.n_dofs()];
            let mut v = vec![0.0; op.n_dofs()];
            op.apply(&u, &mut v);
            assert!(norm(&v) <= 1e-11 * norm(&u), "p={p}");
        }
    }
}

#[test]
fn matrix_free_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for mesh in meshes() {
        for p in 1..=3 {
            let op = laplace(mesh.clone(), p, true);
            let m = assemble_oracle(&op).unwrap();
            assert!(m.asymmetry() <= 1e-13 * m.diagonal().iter().fold(0.0f64, |a, b| a.max(b.abs())));
            let diag = op.compute_diagonal();
            for (d, e) in diag.iter().zip(m.diagonal()) {
                assert!((d - e).abs() <= 1e-12 * e.abs().max(1.0));
            }
            for _ in 0..5 {
                let u = random_vec(op.n_dofs(), &mut rng);
                let (mut a, mut b) = (vec![0.0; u.len()], vec![0.0; u.len()]);
                op.apply(&u, &mut a);
                m.mul_vec(&u, &mut b);
                let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                assert!(norm(&diff) <= 1e-12 * norm(&b));
            }
        }
    }
}

#[test]
fn column_probe_matches_oracle() {
    let op = laplace(generate_perturbed(&generate_hypercube(2, 0.0, 1.0, 1).unwrap(), 0.3, 1).unwrap(), 2, true);
    let m = assemble_oracle(&op).unwrap();
    let n = op.n_dofs();
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        for i in 0..n {
            assert!((col[i] - m.get(i, j)).abs() < 1e-12);
        }
        e[j] = 0.0;
    }
}

#[test]
fn interior_diagonal_is_uniform() {
    let op = laplace(generate_hypercube(2, -1.0, 1.0, 3).unwrap(), 1, true);
    let diag = op.compute_diagonal();
    let interior: Vec<f64> = (0..op.n_dofs()).filter(|&d| !op.constraints().is_constrained(d)).map(|d| diag[d]).collect();
    assert!(interior.iter().all(|&d| d > 0.0 && (d - interior[0]).abs() < 1e-13));
}

#[test]
fn symmetry_probe() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let op = laplace(generate_perturbed(&generate_hypercube(3, 0.0, 1.0, 2).unwrap(), 0.3, 3).unwrap(), 3, true);
    for _ in 0..5 {
        let u = random_vec(op.n_dofs(), &mut rng);
        let v = random_vec(op.n_dofs(), &mut rng);
        let (mut au, mut av) = (vec![0.0; u.len()], vec![0.0; u.len()]);
        op.apply(&u, &mut au);
        op.apply(&v, &mut av);
        assert!((dot(&au, &v) - dot(&u, &av)).abs() <= 1e-11 * norm(&au) * norm(&v));
    }
}

fn elasticity_op(mesh: Mesh, p: usize, dirichlet: &[u32]) -> MatrixFreeOperator {
    let mesh = Arc::new(mesh);
    let space = Arc::new(FESpace::new(mesh.clone(), p, mesh.dim()));
    let c = dirichlet_constraints(&space, dirichlet, |_, _| 0.0).unwrap();
    let (lambda, mu) = lame_parameters(205e9, 0.3);
    MatrixFreeOperator::elasticity(space, c, lambda, mu).unwrap()
}

fn rigid_body_modes(space: &FESpace) -> Vec<Vec<f64>> {
    let modes: [fn(&Point) -> [f64; 3]; 6] = [
        |_| [1.0, 0.0, 0.0],
        |_| [0.0, 1.0, 0.0],
        |_| [0.0, 0.0, 1.0],
        |x| [0.0, x[2], -x[1]],
        |x| [-x[2], 0.0, x[0]],
        |x| [x[1], -x[0], 0.0],
    ];
    modes.iter().map(|m| space.interpolate_components(|x, c| m(x)[c])).collect()
}

#[test]
fn lame_conversion() {
    let (lambda, mu) = lame_parameters(205e9, 0.3);
    assert!((lambda / 1.18269e11 - 1.0).abs() < 1e-5);
    assert!((mu / 7.88462e10 - 1.0).abs() < 1e-5);
}

#[test]
fn elasticity_annihilates_rigid_body_modes() {
    let mesh = generate_perturbed(&generate_hypercube(3, -1.0, 1.0, 1).unwrap(), 0.3, 4).unwrap();
    for p in 1..=2 {
        let op = elasticity_op(mesh.clone(), p, &[]);
        let m = assemble_oracle(&op).unwrap();
        let a_norm = m.diagonal().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for mode in rigid_body_modes(op.space()) {
            let mut v = vec![0.0; mode.len()];
            op.apply(&mode, &mut v);
            assert!(norm(&v) <= 1e-10 * a_norm * norm(&mode));
        }
    }
}

#[test]
fn elasticity_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cases = [
        (generate_perturbed(&generate_hypercube(3, 0.0, 1.0, 1).unwrap(), 0.3, 6).unwrap(), vec![0]),
        (generate_perturbed(&generate_hypercube(2, 0.0, 1.0, 2).unwrap(), 0.3, 6).unwrap(), vec![0, 2]),
    ];
    for (mesh, ids) in cases {
        for p in 1..=2 {
            let op = elasticity_op(mesh.clone(), p, &ids);
            let m = assemble_oracle(&op).unwrap();
            assert!(m.asymmetry() < 1e-13 * 1e11);
            let diag = op.compute_diagonal();
            for (d, e) in diag.iter().zip(m.diagonal()) {
                assert!((d - e).abs() <= 1e-12 * e.abs());
            }
            for _ in 0..3 {
                let u = random_vec(op.n_dofs(), &mut rng);
                let (mut a, mut b) = (vec![0.0; u.len()], vec![0.0; u.len()]);
                op.apply(&u, &mut a);
                m.mul_vec(&u, &mut b);
                let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                assert!(norm(&diff) <= 1e-12 * norm(&b));
            }
        }
    }
}

#[test]
fn rhs_integrals() {
    let mesh = Arc::new(generate_perturbed(&generate_hypercube(2, -1.0, 1.0, 2).unwrap(), 0.3, 1).unwrap());
    let space = FESpace::new(mesh.clone(), 1, 1);
    let none = Constraints::none(space.n_dofs());
    let b = assemble_rhs(&space, &none, &|_| [1.0, 0.0, 0.0], &[]).unwrap();
    assert!((b.iter().sum::<f64>() - 4.0).abs() < 1e-12);
    let z = assemble_rhs(&space, &none, &|_| [0.0; 3], &[(1, &|_| [0.0; 3])]).unwrap();
    assert!(z.iter().all(|&v| v == 0.0));
    // traction on face x = 1 (id 1) of length 2
    let t = assemble_rhs(&space, &none, &|_| [0.0; 3], &[(1, &|_| [3.0, 0.0, 0.0])]).unwrap();
    assert!((t.iter().sum::<f64>() - 6.0).abs() < 1e-12);
    for (node, x) in space.support_points().iter().enumerate() {
        if x[0] < 1.0 - 1e-12 {
            assert_eq!(t[node], 0.0);
        }
    }
    assert!(matches!(
        assemble_rhs(&space, &none, &|_| [0.0; 3], &[(42, &|_| [0.0; 3])]),
        Err(Error::UnknownBoundaryId(42))
    ));

    let cube = Arc::new(generate_hypercube(3, 0.0, 2.0, 1).unwrap());
    let vspace = FESpace::new(cube, 2, 3);
    let none = Constraints::none(vspace.n_dofs());
    let t = assemble_rhs(&vspace, &none, &|_| [0.0; 3], &[(5, &|_| [0.0, 0.0, -1e5])]).unwrap();
    let fz: f64 = t.iter().skip(2).step_by(3).sum();
    assert!((fz + 4e5).abs() < 1e-12 * 4e5);
}

#[test]
fn size_mismatch() {
    let op = laplace(generate_hypercube(2, 0.0, 1.0, 1).unwrap(), 1, false);
    let mut y = vec![0.0; op.n_dofs()];
    assert!(matches!(op.try_apply(&[1.0], &mut y), Err(Error::SizeMismatch { .. })));
}
