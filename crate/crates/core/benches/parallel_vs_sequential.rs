//! Normality scan and Cauchy-transform table: rayon map against the plain
//! sequential loop over the same work items.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nikishin_lab::demos;
use nikishin_lab::hermite_pade::{compositions, solve_mixed, MultiIndex2};
use nikishin_lab::par;
use num_complex::Complex64 as C64;

fn indices(max_total: usize) -> Vec<MultiIndex2> {
    let mut out = vec![];
    for t in 1..=max_total {
        for n1 in compositions(t, 2) {
            for n2 in compositions(t - 1, 2) {
                out.push(MultiIndex2::new(n1.clone(), n2));
            }
        }
    }
    out
}

fn scan(c: &mut Criterion) {
    let mix = demos::load("demo11").unwrap();
    let idx = indices(6);
    let solve = |i: usize| {
        solve_mixed(&mix, &idx[i])
            .map(|f| f.report.singular_gap)
            .unwrap_or(0.0)
    };
    let mut g = c.benchmark_group("normality_scan");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", idx.len()), |b| {
        b.iter(|| par::map_range(idx.len(), solve))
    });
    g.bench_function(BenchmarkId::new("sequential", idx.len()), |b| {
        b.iter(|| par::map_range_seq(idx.len(), solve))
    });
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let mix = demos::load("demo02").unwrap();
    let zs: Vec<C64> = (0..256)
        .map(|k| C64::new(-3.0 + 0.03 * k as f64, 0.7))
        .collect();
    let eval = |i: usize| {
        (1..=mix.m2() + 1)
            .map(|j| {
                mix.s2
                    .s(0, j - 1)
                    .unwrap()
                    .cauchy_transform(zs[i])
                    .unwrap()
                    .norm()
            })
            .sum::<f64>()
    };
    let mut g = c.benchmark_group("cauchy_table");
    g.bench_function("parallel", |b| b.iter(|| par::map_range(zs.len(), eval)));
    g.bench_function("sequential", |b| {
        b.iter(|| par::map_range_seq(zs.len(), eval))
    });
    g.finish();
}

criterion_group!(benches, scan, transforms);
criterion_main!(benches);
