use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use safeprime_prng::bench::{bench_params, bench_table};
use safeprime_prng::prng::generate_many;
use safeprime_prng::stats::{run_battery, BatteryConfig, BitSeq};
use safeprime_prng::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn battery(c: &mut Criterion) {
    let base = BatteryConfig::default();
    let mut buf = vec![0u8; base.min_stream_bits() / 8];
    ChaCha20Rng::seed_from_u64(7).fill_bytes(&mut buf);
    let bits = BitSeq::from_bytes(&buf);
    let mut group = c.benchmark_group("battery");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = BatteryConfig { exec, ..base.clone() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, config| {
            b.iter(|| run_battery(&bits, config).unwrap())
        });
    }
    group.finish();
}

fn streams(c: &mut Criterion) {
    let params = bench_params(260).unwrap();
    let table = bench_table().unwrap();
    let seeds: Vec<u64> = (1..=16).collect();
    let mut group = c.benchmark_group("generate_many");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| generate_many(&params, &table, &seeds, 4096, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, battery, streams);
criterion_main!(benches);
