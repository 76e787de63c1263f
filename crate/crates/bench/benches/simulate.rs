//! Simulation throughput on compiled networks.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gadgetnet::compiler::{substitute_backend, Backend};
use gadgetnet::{compile, simulate, Mode, SimConfig};
use gadgetnet_bench::chain;

fn bench_simulate(c: &mut Criterion) {
    let config = SimConfig { record_trace: false, ..SimConfig::default() };
    let mut group = c.benchmark_group("simulate");
    for n in [2, 4, 6] {
        let abstract_net = compile(&chain(n), Mode::Abstract).expect("compiles").network;
        group.bench_with_input(BenchmarkId::new("abstract", n), &abstract_net, |b, net| {
            b.iter(|| simulate(net, &config))
        });
        let planar = compile(&chain(n), Mode::Planar).expect("compiles").network;
        let spinner = substitute_backend(&planar, Backend::Spinner3).expect("substitutes");
        group.bench_with_input(BenchmarkId::new("planar_spinner3", n), &spinner, |b, net| {
            b.iter(|| simulate(net, &config))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_simulate);
criterion_main!(benches);
