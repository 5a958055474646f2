use criterion::{criterion_group, criterion_main, Criterion};

use farfield::eval::{phi_truth, GridSpec, QuadratureSpec};
use farfield::par;
use farfield::precision::Precision;

fn profile(c: &mut Criterion) {
    let (ell, r1, r2) = (16, 1.0, 8.0);
    let quad = QuadratureSpec::for_kernel(ell, r1, r2, Precision::Double);
    let ys = GridSpec::for_kernel(ell, r1).nonnegative_points();
    let point = |y: &f64| phi_truth::<f64>(ell, r1, r2, *y, &quad).unwrap().value;

    let mut g = c.benchmark_group("profile_l16");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| par::map_seq(&ys, point)));
    g.bench_function(
        if par::is_parallel() {
            "parallel"
        } else {
            "parallel_disabled"
        },
        |b| b.iter(|| par::map(&ys, point)),
    );
    g.finish();
}

criterion_group!(benches, profile);
criterion_main!(benches);
