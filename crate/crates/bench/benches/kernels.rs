use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nnmg::linalg::LinearOperator;
use nnmg::transfer::Transfer;
use nnmg_bench::{laplace_operator, lshape_hierarchy, transfer_pair};

fn operator_apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("operator_apply");
    for (dim, refinements) in [(2, 6), (3, 3)] {
        for degree in [1, 2, 4] {
            let op = laplace_operator(dim, degree, refinements).unwrap();
            let x: Vec<f64> = (0..op.n()).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut y = vec![0.0; op.n()];
            g.bench_with_input(BenchmarkId::new(format!("{dim}d"), degree), &degree, |b, _| {
                b.iter(|| op.apply(black_box(&x), &mut y))
            });
        }
    }
    g.finish();
}

fn transfers(c: &mut Criterion) {
    let mut g = c.benchmark_group("prolongate");
    for degree in [1, 4] {
        let (nn, emb) = transfer_pair(3, degree, 3).unwrap();
        let coarse: Vec<f64> = (0..nn.n_coarse()).map(|i| (i as f64).cos()).collect();
        let mut fine = vec![0.0; nn.n_fine()];
        g.bench_with_input(BenchmarkId::new("non-nested", degree), &degree, |b, _| {
            b.iter(|| nn.prolongate(black_box(&coarse), &mut fine))
        });
        g.bench_with_input(BenchmarkId::new("embedding", degree), &degree, |b, _| {
            b.iter(|| emb.prolongate(black_box(&coarse), &mut fine))
        });
    }
    g.finish();
}

fn v_cycle(c: &mut Criterion) {
    let mut g = c.benchmark_group("v_cycle");
    g.sample_size(20);
    for degree in [2, 4] {
        let h = lshape_hierarchy(degree, 4).unwrap();
        let top = h.n_levels() - 1;
        let f = vec![1.0; h.finest().n_dofs()];
        g.bench_with_input(BenchmarkId::new("lshape", degree), &degree, |b, _| {
            b.iter(|| h.v_cycle(top, black_box(&f)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, operator_apply, transfers, v_cycle);
criterion_main!(benches);
