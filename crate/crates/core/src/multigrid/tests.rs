use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::dot;
use crate::mesh::{generate_hypercube, generate_lshape, generate_perturbed, Mesh};
use crate::mfoperator::assemble_rhs;

fn cubes(dim: usize, n: usize) -> Vec<Arc<Mesh>> {
    (0..n).map(|r| Arc::new(generate_hypercube(dim, -1.0, 1.0, r).unwrap())).collect()
}

fn random_free(h: &MultigridHierarchy, l: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let op = &h.level(l).op;
    let mut v: Vec<f64> = (0..op.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    op.constraints().set_zero(&mut v);
    v
}

fn unit_rhs(h: &MultigridHierarchy) -> Vec<f64> {
    let op = &h.finest().op;
    assemble_rhs(op.space(), op.constraints(), &|_| [1.0, 0.0, 0.0], &[]).unwrap()
}

fn cfg(degree: usize, transfer: TransferKind) -> HierarchyConfig {
    HierarchyConfig { degree, transfer, ..Default::default() }
}

#[test]
fn single_level_is_coarse_solve() {
    let h = build_hp_hierarchy(&cubes(2, 3)[2..], &cfg(2, TransferKind::NonNested)).unwrap();
    assert_eq!(h.n_levels(), 1);
    let f = random_free(&h, 0, 1);
    let d = h.v_cycle(0, &f).unwrap();
    let mut ad = vec![0.0; f.len()];
    h.level(0).op.apply(&d, &mut ad);
    for (a, b) in ad.iter().zip(&f) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn hp_level_layout() {
    let meshes = cubes(2, 3);
    let c = HierarchyConfig { degree: 3, mode: CoarseningMode::Hp, ..Default::default() };
    let h = build_hp_hierarchy(&meshes, &c).unwrap();
    let labels: Vec<&str> = h.levels().iter().map(|l| l.label.as_str()).collect();
    assert_eq!(labels, ["Q1(T1)", "Q2(T1)", "Q3(T1)", "Q3(T2)", "Q3(T3)"]);
    let names: Vec<&str> = h.transfers().iter().map(|t| t.name()).collect();
    assert_eq!(names[..2], ["embedding", "embedding"]);
    assert_eq!(names[2..], ["non-nested", "non-nested"]);
    assert_eq!(h.finest().n_dofs(), 13 * 13);
}

#[test]
fn two_level_contraction_is_level_independent() {
    let meshes = cubes(2, 6);
    let mut factors = Vec::new();
    for r in [2, 3, 4] {
        let h = build_hp_hierarchy(&meshes[r..r + 2], &cfg(1, TransferKind::Nested)).unwrap();
        let op = &h.finest().op;
        let xe = random_free(&h, 1, 7);
        let mut f = vec![0.0; xe.len()];
        op.apply(&xe, &mut f);
        let x = h.v_cycle(1, &f).unwrap();
        let e: Vec<f64> = xe.iter().zip(&x).map(|(a, b)| a - b).collect();
        let energy = |v: &[f64]| {
            let mut av = vec![0.0; v.len()];
            op.apply(v, &mut av);
            dot(v, &av).sqrt()
        };
        factors.push(energy(&e) / energy(&xe));
    }
    for f in &factors {
        assert!(*f < 0.2, "{factors:?}");
    }
}

#[test]
fn v_cycle_is_linear_and_zero_preserving() {
    let meshes = cubes(2, 4);
    let h = build_hp_hierarchy(&meshes, &cfg(2, TransferKind::NonNested)).unwrap();
    let top = h.n_levels() - 1;
    let n = h.finest().n_dofs();
    let mut z = vec![1.0; n];
    h.precondition(&vec![0.0; n], &mut z).unwrap();
    assert!(z.iter().all(|&v| v == 0.0));
    let (f, g) = (random_free(&h, top, 1), random_free(&h, top, 2));
    let (a, b) = (1.7, -0.3);
    let combo: Vec<f64> = f.iter().zip(&g).map(|(f, g)| a * f + b * g).collect();
    let vf = h.v_cycle(top, &f).unwrap();
    let vg = h.v_cycle(top, &g).unwrap();
    let vc = h.v_cycle(top, &combo).unwrap();
    let scale = vc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        assert!((vc[i] - a * vf[i] - b * vg[i]).abs() <= 1e-12 * scale.max(1.0));
    }
}

#[test]
fn preconditioner_is_symmetric() {
    let base = generate_lshape(2, 1, 1).unwrap();
    let meshes: Vec<Arc<Mesh>> = vec![
        Arc::new(base.clone()),
        Arc::new(generate_perturbed(&generate_lshape(2, 2, 1).unwrap(), 0.2, 5).unwrap()),
        Arc::new(generate_perturbed(&generate_lshape(2, 3, 1).unwrap(), 0.2, 6).unwrap()),
    ];
    let h = build_hp_hierarchy(&meshes, &HierarchyConfig { degree: 2, mode: CoarseningMode::Hp, ..Default::default() }).unwrap();
    let top = h.n_levels() - 1;
    for k in 0..20 {
        let u = random_free(&h, top, 100 + k);
        let v = random_free(&h, top, 200 + k);
        let mu = h.v_cycle(top, &u).unwrap();
        let mv = h.v_cycle(top, &v).unwrap();
        let scale = dot(&u, &mu).abs().max(dot(&v, &mv).abs());
        assert!((dot(&v, &mu) - dot(&u, &mv)).abs() <= 1e-9 * scale);
    }
}

#[test]
fn nested_and_nonnested_paths_agree() {
    let meshes = cubes(2, 4);
    for p in 1..=3 {
        let a = build_hp_hierarchy(&meshes, &cfg(p, TransferKind::Nested)).unwrap();
        let b = build_hp_hierarchy(&meshes, &cfg(p, TransferKind::NonNested)).unwrap();
        let rhs = unit_rhs(&a);
        let mut xa = vec![0.0; rhs.len()];
        let mut xb = vec![0.0; rhs.len()];
        let ra = a.solve(&rhs, &mut xa, &CgConfig::default()).unwrap();
        let rb = b.solve(&rhs, &mut xb, &CgConfig::default()).unwrap();
        assert_eq!(ra.iterations, rb.iterations);
        let norm = xa.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff = xa.iter().zip(&xb).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(diff <= 1e-10 * norm, "p={p}: {diff} vs {norm}");
    }
}

#[test]
fn nested_rejects_nonnested_meshes() {
    let meshes = vec![
        Arc::new(generate_lshape(2, 1, 0).unwrap()),
        Arc::new(generate_perturbed(&generate_lshape(2, 2, 0).unwrap(), 0.3, 1).unwrap()),
    ];
    assert!(matches!(
        build_hp_hierarchy(&meshes, &cfg(1, TransferKind::Nested)),
        Err(Error::NotNested(_))
    ));
}

#[test]
fn profile_accounts_for_cycle_time() {
    let h = build_hp_hierarchy(&cubes(2, 5), &cfg(3, TransferKind::NonNested)).unwrap();
    h.set_profiling(true);
    let rhs = unit_rhs(&h);
    let mut x = vec![0.0; rhs.len()];
    let res = h.solve(&rhs, &mut x, &CgConfig::default()).unwrap();
    let prof = h.profile();
    assert_eq!(prof.cycles, res.iterations);
    assert!(prof.component_sum() <= prof.total.mul_f64(1.05));
    assert!(prof.levels[0].coarse_solve > std::time::Duration::ZERO);
    assert!(prof.levels[0].pre_smooth.is_zero());
    h.set_profiling(false);
    let _ = h.v_cycle(h.n_levels() - 1, &rhs).unwrap();
    assert_eq!(h.profile().cycles, 0);
}

#[test]
fn elasticity_hierarchy_converges() {
    let meshes = cubes(3, 3);
    let (lambda, mu) = crate::mfoperator::lame_parameters(205e9, 0.3);
    let c = HierarchyConfig {
        degree: 2,
        mode: CoarseningMode::Hp,
        physics: crate::mfoperator::Physics::Elasticity { lambda, mu },
        dirichlet_ids: Some(vec![4]),
        ..Default::default()
    };
    let h = build_hp_hierarchy(&meshes, &c).unwrap();
    let op = &h.finest().op;
    let traction = |_: &crate::mesh::Point| [0.0, 0.0, -1e5];
    let rhs = assemble_rhs(op.space(), op.constraints(), &|_| [0.0; 3], &[(5, &traction)]).unwrap();
    let mut x = vec![0.0; rhs.len()];
    let res = h.solve(&rhs, &mut x, &CgConfig::default()).unwrap();
    assert!(res.converged && res.iterations < 40, "{}", res.iterations);
}

#[test]
fn rejects_mismatched_inputs() {
    let mixed = vec![Arc::new(generate_hypercube(2, 0.0, 1.0, 1).unwrap()), Arc::new(generate_hypercube(3, 0.0, 1.0, 1).unwrap())];
    assert!(matches!(build_hp_hierarchy(&mixed, &cfg(1, TransferKind::NonNested)), Err(Error::IncompatibleSpaces(_))));
    assert!(matches!(build_hp_hierarchy(&[], &cfg(1, TransferKind::NonNested)), Err(Error::IncompatibleSpaces(_))));
    let h = build_hp_hierarchy(&cubes(2, 2), &cfg(1, TransferKind::NonNested)).unwrap();
    assert!(matches!(h.v_cycle(1, &[1.0]), Err(Error::SizeMismatch { .. })));
}

#[test]
fn iterative_coarse_solver_matches_direct() {
    let meshes = cubes(2, 3);
    let direct = build_hp_hierarchy(&meshes, &cfg(2, TransferKind::NonNested)).unwrap();
    let iterative =
        build_hp_hierarchy(&meshes, &HierarchyConfig { coarse_direct_limit: 0, ..cfg(2, TransferKind::NonNested) }).unwrap();
    assert!(matches!(direct.coarse_solver(), CoarseSolver::Direct(_)));
    assert!(matches!(iterative.coarse_solver(), CoarseSolver::Iterative { .. }));
    let rhs = unit_rhs(&direct);
    let mut xa = vec![0.0; rhs.len()];
    let mut xb = vec![0.0; rhs.len()];
    let ra = direct.solve(&rhs, &mut xa, &CgConfig::default()).unwrap();
    let rb = iterative.solve(&rhs, &mut xb, &CgConfig::default()).unwrap();
    assert_eq!(ra.iterations, rb.iterations);
}
