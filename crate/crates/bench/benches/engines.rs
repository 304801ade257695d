use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use blackhats::algorithms::build_algorithm;
use blackhats::automata::RunMode;
use blackhats::functions::{
    build_eq_fingerprint_quantum, measure_error, sample_block, FingerprintConfig,
};
use blackhats::{BhInstance, BhParams, FunctionSpec};

fn instance(k: usize, t: usize, m: usize) -> BhInstance {
    let f = FunctionSpec::Partialmod { beta: 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let blocks = (0..k)
        .map(|_| sample_block(&f, m, None, &mut rng).unwrap())
        .collect();
    BhInstance::encode(BhParams::uniform(k, t, 1, 3, m).unwrap(), blocks).unwrap()
}

fn compositions(c: &mut Criterion) {
    let f = FunctionSpec::Partialmod { beta: 1 };
    let mut group = c.benchmark_group("exact");
    for k in [4usize, 8, 12] {
        let inst = instance(k, 1, 8);
        for id in ["bh-rand:partialmod@0.1", "bh-quantum:partialmod@0.1"] {
            let alg = build_algorithm(id, inst.params(), &f).unwrap();
            group.bench_with_input(BenchmarkId::new(id, k), &inst, |b, inst| {
                b.iter(|| alg.run(inst.stream(), RunMode::exact()).unwrap())
            });
        }
    }
    group.finish();

    let inst = instance(8, 2, 8);
    let mut group = c.benchmark_group("sampled-1000");
    for id in [
        "guess",
        "bh-rand:partialmod@0.1",
        "bh-quantum:partialmod@0.1",
    ] {
        let alg = build_algorithm(id, inst.params(), &f).unwrap();
        group.bench_function(id, |b| {
            b.iter(|| alg.run(inst.stream(), RunMode::sampled(7, 1000)).unwrap())
        });
    }
    group.finish();
}

fn fingerprint(c: &mut Criterion) {
    let config = FingerprintConfig::default();
    let machine = build_eq_fingerprint_quantum(8, &config).unwrap().into();
    c.bench_function("eq-fingerprint-error-m8", |b| {
        b.iter(|| measure_error(&machine, &FunctionSpec::Eq, 8).unwrap())
    });
}

criterion_group!(benches, compositions, fingerprint);
criterion_main!(benches);
