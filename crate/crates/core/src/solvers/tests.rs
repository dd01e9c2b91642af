use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::fespace::{dirichlet_constraints, FESpace};
use crate::linalg::{dot, norm, CsrMatrix, LinearOperator};
use crate::mesh::generate_hypercube;
use crate::mfoperator::{assemble_oracle, MatrixFreeOperator};

fn poisson_1d(n: usize) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0));
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
        }
    }
    CsrMatrix::from_triplets(n, n, t)
}

fn identity(n: usize) -> CsrMatrix {
    CsrMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
}

fn laplace_2d(r: usize, p: usize, dirichlet: bool) -> MatrixFreeOperator {
    let mesh = Arc::new(generate_hypercube(2, -1.0, 1.0, r).unwrap());
    let ids = if dirichlet { mesh.boundary_ids() } else { vec![] };
    let space = Arc::new(FESpace::new(mesh, p, 1));
    let c = dirichlet_constraints(&space, &ids, |_, _| 0.0).unwrap();
    MatrixFreeOperator::laplace(space, c).unwrap()
}

#[test]
fn identity_spectrum() {
    let est = estimate_eigenvalues(&identity(40), &vec![1.0; 40], None, 12, LANCZOS_SEED);
    assert!((est.max - 1.0).abs() < 0.05);
}

#[test]
fn lanczos_matches_dense_eigensolve() {
    let n = 50;
    let a = poisson_1d(n);
    let inv_diag = vec![0.5; n];
    let est = estimate_eigenvalues(&a, &inv_diag, None, 12, LANCZOS_SEED);
    let dense = DMatrix::from_row_slice(n, n, &a.to_dense()) * 0.5;
    let exact = SymmetricEigen::new(dense).eigenvalues.max();
    assert!((exact - (1.0 - (std::f64::consts::PI * 50.0 / 51.0).cos())).abs() < 1e-12);
    assert!((est.max - exact).abs() <= 0.05 * exact);
    assert!(est.max <= exact + 1e-12);
    let again = estimate_eigenvalues(&a, &inv_diag, None, 12, LANCZOS_SEED);
    assert_eq!(est, again);
}

#[test]
fn zero_rhs_gives_zero() {
    let a = poisson_1d(30);
    let s = ChebyshevJacobi::new(&a, &a.diagonal(), None, &ChebyshevConfig::default());
    let mut x = vec![0.0; 30];
    s.smooth(&a, &vec![0.0; 30], &mut x, 2, true);
    assert!(x.iter().all(|&v| v == 0.0));
}

#[test]
fn damps_highest_frequency() {
    let n = 50;
    let a = poisson_1d(n);
    let s = ChebyshevJacobi::new(&a, &a.diagonal(), None, &ChebyshevConfig::default());
    let h = 1.0 / (n as f64 + 1.0);
    let top: Vec<f64> = (1..=n).map(|i| (std::f64::consts::PI * n as f64 * i as f64 * h).sin()).collect();
    // error propagation with b = 0 starting from x = e
    let mut x = top.clone();
    s.smooth(&a, &vec![0.0; n], &mut x, 1, false);
    assert!(norm(&x) <= norm(&top) / 5.0, "factor {}", norm(&x) / norm(&top));
}

#[test]
fn smoother_is_linear_in_residual() {
    let a = poisson_1d(40);
    let s = ChebyshevJacobi::new(&a, &a.diagonal(), None, &ChebyshevConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let b: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x0: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // S(b, x0) = x0 + S(b - A x0, 0)
        let mut x = x0.clone();
        s.smooth(&a, &b, &mut x, 1, false);
        let mut ax0 = vec![0.0; 40];
        a.apply(&x0, &mut ax0);
        let r: Vec<f64> = b.iter().zip(&ax0).map(|(b, a)| b - a).collect();
        let mut y = vec![0.0; 40];
        s.smooth(&a, &r, &mut y, 1, true);
        for i in 0..40 {
            assert!((x[i] - x0[i] - y[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn cg_on_diagonal_systems() {
    let n = 10;
    let diag: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let a = CsrMatrix::from_triplets(n, n, diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect());
    let xe: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let mut b = vec![0.0; n];
    a.apply(&xe, &mut b);
    let cfg = CgConfig { reduction: 1e-12, max_iterations: 100 };
    let mut x = vec![0.0; n];
    let res = pcg(&a, &IdentityPreconditioner, &b, &mut x, &cfg).unwrap();
    assert!(res.converged && res.iterations <= n);
    let mut x = vec![0.0; n];
    let res = pcg(&a, &JacobiPreconditioner::new(&diag), &b, &mut x, &cfg).unwrap();
    assert_eq!(res.iterations, 1);
    for i in 0..n {
        assert!((x[i] - xe[i]).abs() < 1e-12);
    }
}

#[test]
fn jacobi_not_worse_than_plain_cg() {
    let op = laplace_2d(3, 2, true);
    let b = vec![1.0; op.n_dofs()];
    let mut b = b;
    op.constraints().set_zero(&mut b);
    let cfg = CgConfig::default();
    let mut x = vec![0.0; op.n_dofs()];
    let plain = pcg(&op, &IdentityPreconditioner, &b, &mut x, &cfg).unwrap();
    let mut x = vec![0.0; op.n_dofs()];
    let jac = pcg(&op, &JacobiPreconditioner::new(&op.compute_diagonal()), &b, &mut x, &cfg).unwrap();
    assert!(plain.converged && jac.converged);
    assert!(jac.iterations <= plain.iterations);
    assert!(jac.final_residual <= 1e-4 * jac.initial_residual);
}

#[test]
fn cg_detects_indefiniteness_and_iteration_limit() {
    let neg = CsrMatrix::from_triplets(3, 3, vec![(0, 0, -1.0), (1, 1, -2.0), (2, 2, -3.0)]);
    let mut x = vec![0.0; 3];
    let e = pcg(&neg, &IdentityPreconditioner, &[1.0, 1.0, 1.0], &mut x, &CgConfig::default()).unwrap_err();
    assert!(matches!(e, Error::Indefinite(_)));
    let a = poisson_1d(100);
    let mut x = vec![0.0; 100];
    let cfg = CgConfig { reduction: 1e-10, max_iterations: 3 };
    let res = pcg(&a, &IdentityPreconditioner, &vec![1.0; 100], &mut x, &cfg).unwrap();
    assert!(!res.converged);
    assert_eq!(res.iterations, 3);
}

#[test]
fn coarse_solver_paths() {
    // one free DoF: exact division
    let op = laplace_2d(1, 1, true);
    let solver = CoarseSolver::new(&op).unwrap();
    assert!(solver.is_direct());
    let mut b = vec![0.0; op.n_dofs()];
    let free = (0..op.n_dofs()).find(|&d| !op.constraints().is_constrained(d)).unwrap();
    b[free] = 3.0;
    let mut x = vec![0.0; op.n_dofs()];
    solver.solve(&op, &b, &mut x).unwrap();
    let diag = op.compute_diagonal();
    assert!((x[free] - 3.0 / diag[free]).abs() < 1e-14);

    let op = laplace_2d(2, 2, true);
    let m = assemble_oracle(&op).unwrap();
    let n = op.n_dofs();
    let dense = DMatrix::from_row_slice(n, n, &m.to_dense());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    op.constraints().set_zero(&mut b);
    let oracle = dense.lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
    let mut x = vec![0.0; n];
    CoarseSolver::new(&op).unwrap().solve(&op, &b, &mut x).unwrap();
    let scale = oracle.norm();
    for i in 0..n {
        assert!((x[i] - oracle[i]).abs() <= 1e-9 * scale);
    }
    let iterative = CoarseSolver::Iterative { diag: op.compute_diagonal(), reduction: 1e-12 };
    iterative.solve(&op, &b, &mut x).unwrap();
    for i in 0..n {
        assert!((x[i] - oracle[i]).abs() <= 1e-9 * scale);
    }
}

#[test]
fn all_neumann_is_singular() {
    let op = laplace_2d(2, 1, false);
    let e = CoarseSolver::new(&op).unwrap_err();
    assert!(matches!(e, Error::SingularMatrix { .. }));
    assert!(e.to_string().contains("nullspace"));
}

#[test]
fn preconditioned_residuals_are_unpreconditioned() {
    let op = laplace_2d(2, 1, true);
    let mut b = vec![1.0; op.n_dofs()];
    op.constraints().set_zero(&mut b);
    let mut x = vec![0.0; op.n_dofs()];
    let res = pcg(&op, &JacobiPreconditioner::new(&op.compute_diagonal()), &b, &mut x, &CgConfig::default()).unwrap();
    let mut ax = vec![0.0; op.n_dofs()];
    op.apply(&x, &mut ax);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    assert!((norm(&r) - res.final_residual).abs() <= 1e-10 * norm(&b));
    assert!((res.initial_residual - dot(&b, &b).sqrt()).abs() < 1e-14);
}
