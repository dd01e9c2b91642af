use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::fespace::{dirichlet_constraints, Constraints, FESpace};
use crate::geosearch::SearchConfig;
use crate::linalg::{dot, norm};
use crate::mesh::{generate_hypercube, generate_lshape, generate_perturbed, Mesh, Point};

struct Pair {
    coarse: Arc<FESpace>,
    fine: Arc<FESpace>,
    cc: Constraints,
    fc: Constraints,
}

fn pair(coarse: Mesh, fine: Mesh, p: usize, nc: usize, dirichlet: bool) -> Pair {
    let coarse = Arc::new(FESpace::new(Arc::new(coarse), p, nc));
    let fine = Arc::new(FESpace::new(Arc::new(fine), p, nc));
    let cons = |s: &FESpace| {
        let ids = if dirichlet { s.mesh().boundary_ids() } else { vec![] };
        dirichlet_constraints(s, &ids, |_, _| 0.0).unwrap()
    };
    Pair { cc: cons(&coarse), fc: cons(&fine), coarse, fine }
}

fn nonnested(p: &Pair) -> NonNestedTransfer {
    NonNestedTransfer::setup(p.coarse.clone(), &p.cc, p.fine.clone(), &p.fc, &SearchConfig::default()).unwrap()
}

fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn transpose_defect(t: &dyn Transfer, rng: &mut ChaCha8Rng) -> f64 {
    let uc = random(t.n_coarse(), rng);
    let rf = random(t.n_fine(), rng);
    let mut uf = vec![0.0; t.n_fine()];
    let mut rc = vec![0.0; t.n_coarse()];
    t.prolongate(&uc, &mut uf);
    t.restrict(&rf, &mut rc);
    (dot(&uf, &rf) - dot(&uc, &rc)).abs() / (norm(&uf) * norm(&rf)).max(1e-300)
}

fn perturbed_lshape_pair(p: usize, dirichlet: bool) -> Pair {
    pair(
        generate_perturbed(&generate_lshape(2, 1, 1).unwrap(), 0.3, 1).unwrap(),
        generate_perturbed(&generate_lshape(2, 2, 1).unwrap(), 0.3, 2).unwrap(),
        p,
        1,
        dirichlet,
    )
}

#[test]
fn transpose_identity_nonnested() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in 1..=3 {
        for dirichlet in [false, true] {
            let t = nonnested(&perturbed_lshape_pair(p, dirichlet));
            for _ in 0..10 {
                assert!(transpose_defect(&t, &mut rng) <= 1e-12);
            }
        }
    }
}

#[test]
fn transpose_identity_embedding() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (dim, p) in [(2, 1), (2, 3), (3, 2)] {
        let pr = pair(
            generate_hypercube(dim, -1.0, 1.0, 1).unwrap(),
            generate_hypercube(dim, -1.0, 1.0, 2).unwrap(),
            p,
            1,
            true,
        );
        let t = EmbeddingTransfer::setup_nested(pr.coarse, &pr.cc, pr.fine, &pr.fc).unwrap();
        for _ in 0..10 {
            assert!(transpose_defect(&t, &mut rng) <= 1e-12);
        }
    }
}

#[test]
fn partition_of_unity() {
    let pr = perturbed_lshape_pair(2, false);
    let t = nonnested(&pr);
    let mut uf = vec![0.0; t.n_fine()];
    t.prolongate(&vec![1.0; t.n_coarse()], &mut uf);
    assert!(uf.iter().all(|&v| (v - 1.0).abs() <= 1e-12));
}

#[test]
fn polynomial_reproduction() {
    // exact on polynomials of degree ≤ p in each variable on affine coarse cells
    for p in 1..=3 {
        let pr = pair(
            generate_lshape(2, 1, 0).unwrap(),
            generate_perturbed(&generate_lshape(2, 2, 1).unwrap(), 0.3, 5).unwrap(),
            p,
            1,
            false,
        );
        let f = |x: &Point| (0.3 + x[0]).powi(p as i32) * (1.0 - 0.5 * x[1]).powi(p as i32) + x[0] * x[1];
        let t = nonnested(&pr);
        assert_eq!(t.n_projected(), 0);
        let mut uf = vec![0.0; t.n_fine()];
        t.prolongate(&pr.coarse.interpolate(f), &mut uf);
        let exact = pr.fine.interpolate(f);
        for (a, b) in uf.iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-11, "p={p}");
        }
    }
}

#[test]
fn explicit_matrix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in 1..=2 {
        for dirichlet in [false, true] {
            let pr = perturbed_lshape_pair(p, dirichlet);
            let t = nonnested(&pr);
            let m = t.assemble_matrix().unwrap();
            let uc = random(t.n_coarse(), &mut rng);
            let rf = random(t.n_fine(), &mut rng);
            let (mut a, mut b) = (vec![0.0; t.n_fine()], vec![0.0; t.n_fine()]);
            t.prolongate(&uc, &mut a);
            m.mul_vec(&uc, &mut b);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-13);
            }
            let (mut c, mut d) = (vec![0.0; t.n_coarse()], vec![0.0; t.n_coarse()]);
            t.restrict(&rf, &mut c);
            m.mul_transpose_vec(&rf, &mut d);
            for (x, y) in c.iter().zip(&d) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn nested_paths_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (dim, p, nc) in [(2, 1, 1), (2, 4, 1), (3, 2, 1), (3, 1, 3)] {
        let pr = pair(
            generate_hypercube(dim, -1.0, 1.0, 1).unwrap(),
            generate_hypercube(dim, -1.0, 1.0, 2).unwrap(),
            p,
            nc,
            true,
        );
        let nn = nonnested(&pr);
        let emb = EmbeddingTransfer::setup_nested(pr.coarse.clone(), &pr.cc, pr.fine.clone(), &pr.fc).unwrap();
        let uc = random(nn.n_coarse(), &mut rng);
        let (mut a, mut b) = (vec![0.0; nn.n_fine()], vec![0.0; nn.n_fine()]);
        nn.prolongate(&uc, &mut a);
        emb.prolongate(&uc, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-13);
        }
        let rf = random(nn.n_fine(), &mut rng);
        let (mut c, mut d) = (vec![0.0; nn.n_coarse()], vec![0.0; nn.n_coarse()]);
        nn.restrict(&rf, &mut c);
        emb.restrict(&rf, &mut d);
        for (x, y) in c.iter().zip(&d) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn nested_lattice_for_q1() {
    let pr = pair(generate_hypercube(2, -1.0, 1.0, 1).unwrap(), generate_hypercube(2, -1.0, 1.0, 2).unwrap(), 1, 1, false);
    for p in nonnested(&pr).points() {
        for k in 0..2 {
            let r = p.reference[k];
            assert!([0.0, 0.5, 1.0].iter().any(|l| (l - r).abs() < 1e-12));
        }
    }
}

#[test]
fn not_nested_is_rejected() {
    let pr = perturbed_lshape_pair(1, false);
    let e = EmbeddingTransfer::setup_nested(pr.coarse, &pr.cc, pr.fine, &pr.fc).unwrap_err();
    assert!(matches!(e, Error::NotNested(_)));
}

#[test]
fn projected_points_are_flagged() {
    // fine mesh sticks out of the coarse one by 1e-3 on the right
    let coarse = generate_hypercube(2, 0.0, 1.0, 1).unwrap();
    let base = generate_hypercube(2, 0.0, 1.0, 2).unwrap();
    let moved: Vec<Point> = base.vertices().iter().map(|v| [v[0] * (1.0 + 1e-3), v[1], 0.0]).collect();
    let fine = Mesh::from_cells(2, moved, base.cells().to_vec(), |_| 0).unwrap();
    let pr = pair(coarse, fine, 2, 1, false);
    let cfg = SearchConfig { box_padding: 1e-2, ..Default::default() };
    let t = NonNestedTransfer::setup(pr.coarse.clone(), &pr.cc, pr.fine.clone(), &pr.fc, &cfg).unwrap();
    assert!(t.n_projected() > 0);
    for p in t.points().iter().filter(|p| p.projected) {
        assert_eq!(p.reference[0], 1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        assert!(transpose_defect(&t, &mut rng) <= 1e-12);
    }
    let mut uf = vec![0.0; t.n_fine()];
    t.prolongate(&vec![1.0; t.n_coarse()], &mut uf);
    assert!(uf.iter().all(|&v| (v - 1.0).abs() <= 1e-12));
}

#[test]
fn polynomial_transfer() {
    let mesh = Arc::new(generate_perturbed(&generate_hypercube(2, -1.0, 1.0, 2).unwrap(), 0.3, 3).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for p in 2..=4 {
        let fine = Arc::new(FESpace::new(mesh.clone(), p, 1));
        let coarse = Arc::new(FESpace::new(mesh.clone(), p - 1, 1));
        let fc = dirichlet_constraints(&fine, &[0, 1, 2, 3], |_, _| 0.0).unwrap();
        let cc = dirichlet_constraints(&coarse, &[0, 1, 2, 3], |_, _| 0.0).unwrap();
        let t = EmbeddingTransfer::setup_polynomial(coarse.clone(), &cc, fine.clone(), &fc).unwrap();
        for _ in 0..10 {
            assert!(transpose_defect(&t, &mut rng) <= 1e-12);
        }
        // degree p-1 polynomials are reproduced, constants included
        let none_c = Constraints::none(coarse.n_dofs());
        let none_f = Constraints::none(fine.n_dofs());
        let t = EmbeddingTransfer::setup_polynomial(coarse.clone(), &none_c, fine.clone(), &none_f).unwrap();
        let uc = coarse.interpolate_components(|_, _| 1.0);
        let mut uf = vec![0.0; fine.n_dofs()];
        t.prolongate(&uc, &mut uf);
        assert!(uf.iter().all(|&v| (v - 1.0).abs() < 1e-13));
        // polynomial in reference coordinates of each cell: use the coarse
        // FE function itself and compare point values on fine nodes
        let uc = random(coarse.n_dofs(), &mut rng);
        t.prolongate(&uc, &mut uf);
        for cell in 0..mesh.n_cells() {
            let xh = [rng.gen(), rng.gen(), 0.0];
            let a = coarse.evaluate(&uc, cell, &xh)[0];
            let b = fine.evaluate(&uf, cell, &xh)[0];
            assert!((a - b).abs() < 1e-12);
        }
    }
    let q1 = Arc::new(FESpace::new(mesh.clone(), 1, 1));
    let none = Constraints::none(q1.n_dofs());
    assert!(matches!(
        EmbeddingTransfer::setup_polynomial(q1.clone(), &none, q1.clone(), &none),
        Err(Error::DegreeTooLow(1))
    ));
}

#[test]
fn locality_matches_explicit_sparsity() {
    let pr = perturbed_lshape_pair(2, true);
    let t = nonnested(&pr);
    let m = t.assemble_matrix().unwrap();
    let mt = m.transpose();
    let mut e = vec![0.0; t.n_coarse()];
    let mut uf = vec![0.0; t.n_fine()];
    for j in (0..t.n_coarse()).step_by(7) {
        e[j] = 1.0;
        t.prolongate(&e, &mut uf);
        let touched: Vec<usize> = mt.row(j).map(|(i, _)| i).collect();
        for (i, v) in uf.iter().enumerate() {
            if *v != 0.0 {
                assert!(touched.contains(&i));
            }
        }
        e[j] = 0.0;
    }
}

#[test]
fn profiled_prolongation_matches() {
    let pr = perturbed_lshape_pair(3, true);
    let t = nonnested(&pr);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let uc = random(t.n_coarse(), &mut rng);
    let (mut a, mut b) = (vec![0.0; t.n_fine()], vec![0.0; t.n_fine()]);
    t.prolongate(&uc, &mut a);
    t.profile_prolongate(&uc, &mut b);
    assert_eq!(a, b);
    // storage grows with d·(p+1) per point, never with the coarse size
    assert!(t.storage_bytes() <= t.points().len() * (std::mem::size_of::<TransferPoint>() + 8 * 2 * 4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn linearity(seed in 0u64..1000, alpha in -3.0..3.0f64, beta in -3.0..3.0f64) {
        let pr = perturbed_lshape_pair(2, true);
        let t = nonnested(&pr);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random(t.n_coarse(), &mut rng);
        let v = random(t.n_coarse(), &mut rng);
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
        let (mut pu, mut pv, mut pw) = (vec![0.0; t.n_fine()], vec![0.0; t.n_fine()], vec![0.0; t.n_fine()]);
        t.prolongate(&u, &mut pu);
        t.prolongate(&v, &mut pv);
        t.prolongate(&w, &mut pw);
        for i in 0..t.n_fine() {
            prop_assert!((pw[i] - alpha * pu[i] - beta * pv[i]).abs() <= 1e-13 * (1.0 + alpha.abs() + beta.abs()) * 4.0);
        }
    }
}
