//! Step-cost benchmarks for the direct and weakly-nonlinear solvers.
//!
//! With the default `parallel` feature each benchmark runs twice: on the
//! global rayon pool and inside a single-thread pool. Build with
//! `cargo bench -p crb-core --no-default-features` to time the plain
//! sequential loops.

use crb_core::scenario::solitary_ic;
use crb_core::wnl::{WnlOptions, WnlSolver};
use crb_core::{CaseKind, CrbSolver, GridSpec, InitialCondition, PhysParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const SIZES: [usize; 3] = [1024, 8192, 65536];

fn setup(n: usize) -> (PhysParams, InitialCondition) {
    let p = PhysParams::new(0.01, 2.0, 2.0, 0.5, 0.5, 2.0).unwrap();
    let g = GridSpec::new(0.05 * n as f64, n).unwrap();
    let ic = solitary_ic(&p, g, 0.4, 0.4, 0.0, 1.0).unwrap();
    (p, ic)
}

/// Runs `f` on the global pool and, with rayon enabled, in a one-thread pool.
fn modes() -> Vec<(&'static str, Option<usize>)> {
    if crb_core::par::parallel_enabled() {
        vec![("parallel", None), ("one-thread", Some(1))]
    } else {
        vec![("sequential", None)]
    }
}

#[cfg(feature = "parallel")]
fn in_mode<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .unwrap()
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn in_mode<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}

fn bench_direct(c: &mut Criterion) {
    let mut group = c.benchmark_group("direct_step");
    for n in SIZES {
        let (p, ic) = setup(n);
        for (label, threads) in modes() {
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                let mut s = CrbSolver::new(&ic, &p).unwrap();
                in_mode(threads, || b.iter(|| s.step(0.01).unwrap()));
            });
        }
    }
    group.finish();
}

fn bench_wnl(c: &mut Criterion) {
    let mut group = c.benchmark_group("wnl_step");
    for n in SIZES {
        let (p, ic) = setup(n);
        for (label, threads) in modes() {
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                let mut s = WnlSolver::new(&ic, CaseKind::DistinctSpeeds, &p, WnlOptions::default()).unwrap();
                in_mode(threads, || b.iter(|| s.step(0.01).unwrap()));
            });
        }
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_direct, bench_wnl
}
criterion_main!(benches);
