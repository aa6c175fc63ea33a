//! Throughput benchmarks for the hot paths: closed-form exponential
//! assembly vs the dense oracle, integrator stepping for both atom
//! counts, and the symbolic reduced-generator machinery.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use tcq::decomp::{expm_full, keylemma_powers};
use tcq::expm::oracle_expm;
use tcq::operators::coupling_operator;
use tcq::pulses::resonance_for;
use tcq::reduced::{reduced_generator, rwa_filter};
use tcq::{integrate, C64, FockTruncation, GateTarget, SimulationConfig};

use tcq_bench::{clipped_schedule, drive_params};

fn bench_expm(c: &mut Criterion) {
    let tr = FockTruncation::new(20, 6).expect("truncation");
    let a = coupling_operator(3, tr).expect("coupling operator").data;

    c.bench_function("expm/closed_form_n3_nmax20", |b| {
        b.iter(|| expm_full(3, black_box(1.1), 1.0, tr).expect("closed form"))
    });
    c.bench_function("expm/oracle_n3_nmax20", |b| {
        b.iter(|| oracle_expm(black_box(&a), C64::new(0.0, -1.1)).expect("oracle"))
    });
}

fn bench_integrator(c: &mut Criterion) {
    // Fixed one-time-unit segments: each iteration costs 1/step steps.
    let cases = [
        ("integrate/two_atom_nmax16_1k_steps", GateTarget::Cz2, 16, 4),
        ("integrate/three_atom_nmax16_1k_steps", GateTarget::A, 16, 4),
    ];
    for (name, gate, nmax, buffer) in cases {
        let schedule = clipped_schedule(gate, 0.1, 1.0);
        let cfg = SimulationConfig {
            params: drive_params(gate, 0.1),
            tr: FockTruncation::new(nmax, buffer).expect("truncation"),
            step: 1e-3,
            photon_init: 0,
            report_grid: 256,
        };
        c.bench_function(name, |b| {
            b.iter(|| integrate(black_box(&cfg), black_box(&schedule)).expect("propagator"))
        });
    }
}

fn bench_reduced(c: &mut Criterion) {
    let params = drive_params(GateTarget::A, 0.01);
    c.bench_function("reduced/build_tables_n3", |b| {
        b.iter(|| reduced_generator(3, black_box(&params)).expect("generator"))
    });

    let gen = reduced_generator(3, &params).expect("generator");
    c.bench_function("reduced/evaluate_n3", |b| {
        b.iter(|| gen.evaluate(black_box(0.37)))
    });
    let condition = resonance_for(GateTarget::A);
    c.bench_function("reduced/rwa_filter_n3", |b| {
        b.iter(|| rwa_filter(black_box(&gen), &condition).expect("filter"))
    });
}

fn bench_keylemma(c: &mut Criterion) {
    let tr = FockTruncation::new(10, 4).expect("truncation");
    c.bench_function("keylemma/powers_k5_nmax10", |b| {
        b.iter(|| keylemma_powers(black_box(5), tr).expect("powers"))
    });
}

criterion_group!(
    benches,
    bench_expm,
    bench_integrator,
    bench_reduced,
    bench_keylemma
);
criterion_main!(benches);
