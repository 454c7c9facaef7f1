//! Parallel vs. sequential timing for the heavy scans: the norm supremum
//! (library path, rayon when the `parallel` feature is on) against a
//! hand-rolled sequential loop over the same ball family.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use morrey::functions;
use morrey::grid::Ball;
use morrey::growth::GrowthFunction;
use morrey::morrey::{morrey_norm, FamilySpec};

fn norm_benchmarks(c: &mut Criterion) {
    let h = 2f64.powi(-10);
    let f = functions::power_chi(1, -0.25, 1.0, [-4.0, 0.0], [4.0, 0.0], h).unwrap();
    let phi = GrowthFunction::power(-0.25);
    let spec = FamilySpec::default();
    let family = spec.family_for(&f).unwrap();

    let mut group = c.benchmark_group("morrey_norm");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("library", "d1_h2e-10"), &f, |b, f| {
        b.iter(|| morrey_norm(f, &phi, 2.0, &family).unwrap().value)
    });
    group.bench_with_input(BenchmarkId::new("sequential", "d1_h2e-10"), &f, |b, f| {
        b.iter(|| {
            // same scan, plain loops
            let mut best = 0.0f64;
            for &r in family.radii() {
                let stride = family.stride_for(r);
                for idx in 0..family.center_count(stride) {
                    let x = family.center(stride, idx);
                    let m = f.ball_mean_p(&Ball::new(x, r), 2.0).unwrap();
                    best = best.max(m / phi.eval(x, r));
                }
            }
            best
        })
    });
    group.finish();
}

criterion_group!(benches, norm_benchmarks);
criterion_main!(benches);
