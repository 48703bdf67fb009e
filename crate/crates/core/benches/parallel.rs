use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_rational::BigRational;

use hypermatch::constructions::{complete, random_binomial};
use hypermatch::extremal::{default_gamma, find_extremal_set, SearchMode};
use hypermatch::lp::{spread_fractional_matching, FractionalMatching};
use hypermatch::nibble::{nibble, NibbleParams};
use hypermatch::par::Exec;
use hypermatch::sweep::exhaustive_report;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn bench_nibble(c: &mut Criterion) {
    let h = complete(3, 60).unwrap();
    let w =
        FractionalMatching::constant(&h, BigRational::new(1.into(), (59 * 58 / 2).into())).unwrap();
    let params = NibbleParams::default();
    let mut g = c.benchmark_group("nibble complete(3,60)");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| nibble(&h, &w, &params, exec))
        });
    }
    g.finish();
}

fn bench_spread(c: &mut Criterion) {
    let h = random_binomial(3, 24, 0.5, 1).unwrap();
    let mut g = c.benchmark_group("spread fractional binomial(3,24,0.5)");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| spread_fractional_matching(&h, 4, 0, exec))
        });
    }
    g.finish();
}

fn bench_extremal(c: &mut Criterion) {
    let h = random_binomial(3, 18, 0.5, 2).unwrap();
    let gamma = default_gamma(3);
    let mut g = c.benchmark_group("exhaustive extremal search binomial(3,18,0.5)");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| find_extremal_set(&h, &gamma, SearchMode::Exhaustive, exec))
        });
    }
    g.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate all graphs on 6 vertices");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exhaustive_report(2, 6, exec))
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    bench_nibble,
    bench_spread,
    bench_extremal,
    bench_enumeration
);
criterion_main!(benches);
