use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use facetmono::hull::{facet_oracle, hull_facets, DEFAULT_HULL_TOL};
use facetmono::DistributionSpec;
use std::hint::black_box;

fn bench_hull_facets(c: &mut Criterion) {
    let mut group = c.benchmark_group("hull_facets");
    for (d, n) in [(2usize, 30usize), (2, 200), (3, 30), (3, 100), (4, 20), (4, 60)] {
        let spec = DistributionSpec::gaussian(d, 1.0).unwrap();
        let cloud = spec.sample(n, 7).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("d{d}_n{n}")),
            &cloud,
            |b, cloud| {
                b.iter(|| hull_facets(black_box(cloud.coords()), d, DEFAULT_HULL_TOL).unwrap())
            },
        );
    }
    group.finish();
}

fn bench_facet_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("facet_oracle");
    group.sample_size(20);
    for (d, n) in [(2usize, 20usize), (3, 20), (4, 16)] {
        let spec = DistributionSpec::beta_ball(d, 1.0, 1.0).unwrap();
        let cloud = spec.sample(n, 11).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("d{d}_n{n}")),
            &cloud,
            |b, cloud| {
                b.iter(|| facet_oracle(black_box(cloud.coords()), d, DEFAULT_HULL_TOL).unwrap())
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_hull_facets, bench_facet_oracle);
criterion_main!(benches);
