//! Data-parallel kernels on a single-thread pool against the default pool.
//! Built without the `parallel` feature, only the sequential variant runs.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stadium_core::eigensolve::{solve_window, SpectralWindow};
use stadium_core::fields::{commutator_form, FieldKind, VectorFieldSpec};
use stadium_core::observables::{observe, ObserveParams};
use stadium_core::operators::OperatorPair;
use stadium_core::quasimode::ModeField;
use stadium_core::{Domain, TriMesh};

fn variants() -> Vec<(String, Box<dyn Fn(&mut (dyn FnMut() + Send))>)> {
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let all = rayon::ThreadPoolBuilder::new().build().unwrap();
        let n = all.current_num_threads();
        vec![
            ("sequential".to_string(), Box::new(move |f: &mut (dyn FnMut() + Send)| one.install(f))),
            (format!("parallel-{n}"), Box::new(move |f: &mut (dyn FnMut() + Send)| all.install(f))),
        ]
    }
    #[cfg(not(feature = "parallel"))]
    {
        vec![("sequential".to_string(), Box::new(|f: &mut (dyn FnMut() + Send)| f()))]
    }
}

fn kernels(c: &mut Criterion) {
    let mesh = TriMesh::build(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.02).unwrap();
    let op = OperatorPair::assemble(&mesh).unwrap();
    let window = SpectralWindow::new(60.0, 5.0).unwrap();
    let pairs = solve_window(&op, window, 8).unwrap();
    let mode = ModeField::from_eigenpair(&op, &pairs[0]).unwrap();
    let field = VectorFieldSpec::new(FieldKind::WingY, 1.0, 1.0, mode.lambda);
    let params = ObserveParams::for_alpha(1.0);

    let mut g = c.benchmark_group("stadium-h0.02");
    g.sample_size(10);
    for (name, run) in variants() {
        g.bench_function(BenchmarkId::new("assemble", &name), |b| {
            b.iter(|| run(&mut || { black_box(OperatorPair::assemble(&mesh).unwrap()); }))
        });
        g.bench_function(BenchmarkId::new("mass-matvec", &name), |b| {
            b.iter(|| run(&mut || { black_box(op.mass.matvec(&mode.vector.0)); }))
        });
        g.bench_function(BenchmarkId::new("commutator-form", &name), |b| {
            b.iter(|| run(&mut || { black_box(commutator_form(&field, &mode.vector, &mesh, &op)); }))
        });
        g.bench_function(BenchmarkId::new("observe", &name), |b| {
            b.iter(|| run(&mut || { black_box(observe(&mesh, &op, &mode, &params).unwrap()); }))
        });
        g.bench_function(BenchmarkId::new("solve-window", &name), |b| {
            b.iter(|| run(&mut || { black_box(solve_window(&op, window, 8).unwrap()); }))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
