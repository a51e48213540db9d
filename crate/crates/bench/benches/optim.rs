use std::path::Path;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use svrnaq_core::harness::{build_optimizer, OptimizerKind, Prepared, RunConfig};
use svrnaq_core::optim::{
    naq_hessian_update, two_loop_direction, BatchSampler, CurvatureBuffer, CurvaturePair,
};
use svrnaq_core::{Matrix, Objective, Rng, Vector};

fn random_vector(rng: &mut Rng, d: usize) -> Vector {
    (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

// q = p + small noise keeps every pair well inside the curvature safeguard.
fn random_pair(rng: &mut Rng, d: usize) -> CurvaturePair {
    let p = random_vector(rng, d);
    let q: Vector = p.iter().map(|x| x + 0.1 * rng.uniform(-1.0, 1.0)).collect();
    CurvaturePair::new(p, q).unwrap()
}

fn wine() -> (RunConfig, Prepared) {
    std::env::set_current_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")).unwrap();
    let c = RunConfig::preset("wine-b32").unwrap();
    let p = Prepared::new(&c).unwrap();
    (c, p)
}

fn curvature(c: &mut Criterion) {
    let mut rng = Rng::new(1);
    let d = 173;
    let f = random_vector(&mut rng, d);
    for m in [4, 10] {
        let mut buffer = CurvatureBuffer::new(m).unwrap();
        for _ in 0..m {
            buffer.push(random_pair(&mut rng, d));
        }
        c.bench_function(&format!("two_loop d={d} m={m}"), |b| {
            b.iter(|| two_loop_direction(&f, &buffer).unwrap())
        });
    }
    let h = Matrix::identity(d);
    let pair = random_pair(&mut rng, d);
    c.bench_function(&format!("dense update d={d}"), |b| {
        b.iter(|| naq_hessian_update(&h, &pair).unwrap())
    });
}

fn network(c: &mut Criterion) {
    let (config, prepared) = wine();
    let objective = prepared.objective();
    let mut batches = BatchSampler::new(0, objective.n_samples(), config.batch).unwrap();
    let batch = batches.next_batch();
    c.bench_function("gradient 11-10-4-1 b=32", |b| {
        b.iter(|| objective.batch_gradient(&prepared.w0, &batch).unwrap())
    });
    c.bench_function("full gradient 11-10-4-1", |b| {
        b.iter(|| objective.full_gradient(&prepared.w0).unwrap())
    });
}

fn epochs(c: &mut Criterion) {
    let (config, prepared) = wine();
    let objective = prepared.objective();
    let mut group = c.benchmark_group("epoch wine b=32");
    group.sample_size(10);
    for kind in [OptimizerKind::Svrg, OptimizerKind::SvrLnaq, OptimizerKind::Olnaq] {
        let mut cfg = config.clone();
        cfg.optimizer = kind;
        // The bootstrap epoch runs during setup, so the timed epoch is a regular one.
        group.bench_function(kind.as_str(), |b| {
            b.iter_batched(
                || {
                    let mut opt = build_optimizer(&cfg, prepared.w0.clone()).unwrap();
                    let mut batches = BatchSampler::new(0, objective.n_samples(), cfg.batch).unwrap();
                    opt.run_epoch(&objective, &mut batches).unwrap();
                    (opt, batches)
                },
                |(mut opt, mut batches)| opt.run_epoch(&objective, &mut batches).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, curvature, network, epochs);
criterion_main!(benches);
