//! Release acceptance suite: every numbered criterion of the library's
//! verification contract, one test per criterion. Each test prints a
//! single line
//!
//! ```text
//! acceptance: criterion N (<label>): PASS|FAIL (<measured detail>)
//! ```
//!
//! and then asserts, so a red criterion keeps its measured values in
//! both the captured output and the panic message. Criteria 1-6 and
//! 9-10 check closed forms, gate algebra and integrator health against
//! independent oracles; criteria 7-8 score the full driven-cavity
//! dynamics against the ideal gates the pulse designs aim for.

use std::time::Instant;

use ndarray::linalg::kron;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tcq::decomp::{decomposition, expm_full, keylemma_powers, spin_three_half_matrix};
use tcq::expm::oracle_expm;
use tcq::gates::{
    appendix_single_qubit, appendix_walsh_hadamard, assemble_ccnot, assemble_cnot_two,
    assemble_three, cnot_two_assembly, controlled, fourth_root_not, sigma3_tensor_sigma3,
    sqrt_not, three_atom_assembly, walsh_matrix,
};
use tcq::operators::{
    coupling_operator, dagger, identity, masked_max_abs_diff, max_abs, max_abs_diff, pauli,
    unitarity_defect, AtomOp,
};
use tcq::pulses::{design, phase_rule, resonance_for};
use tcq::reduced::{numeric_reduced_generator, reduced_generator, rwa_filter};
use tcq::{
    integrate, simulate_gate, sweep_with_reports, C64, CMat, Drive, FockTruncation, GateTarget,
    ModelParams, SimulationConfig,
};

/// Print the one-line verdict for a criterion, then enforce it.
fn conclude(criterion: u32, label: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("acceptance: criterion {criterion} ({label}): {status} ({detail})");
    assert!(pass, "criterion {criterion} ({label}): {detail}");
}

/// Resonant model parameters for a gate's design drive: `g = ω = Δ = 1`,
/// drive 1 at the gate's resonance frequency and phase with amplitude
/// `h1`.
fn drive_params(gate: GateTarget, h1: f64) -> ModelParams {
    let res = resonance_for(gate);
    ModelParams {
        omega: 1.0,
        delta: 1.0,
        g: 1.0,
        drives: vec![Drive {
            h: h1,
            omega: res.drive_frequency(1.0, 1.0),
            phi: phase_rule(gate),
        }],
    }
}

fn real_matrix(d: usize, entries: &[f64]) -> CMat {
    CMat::from_shape_vec(
        (d, d),
        entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
    )
    .expect("entry count matches shape")
}

fn diagonal(entries: &[f64]) -> CMat {
    let d = entries.len();
    let mut m = CMat::zeros((d, d));
    for (i, &v) in entries.iter().enumerate() {
        m[(i, i)] = C64::new(v, 0.0);
    }
    m
}

/// Largest real-or-imaginary component difference over all entries: the
/// right measure for "entrywise to one ulp", where each floating-point
/// component may be off by at most one ulp on its own.
fn componentwise_max_diff(x: &CMat, y: &CMat) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a.re - b.re).abs().max((a.im - b.im).abs()))
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_1_closed_form_exponentials_match_oracle() {
    let started = Instant::now();
    let tr = FockTruncation::new(40, 8).expect("truncation");
    let mut worst = 0.0f64;
    for n in [1usize, 2, 3] {
        let a = coupling_operator(n, tr).expect("coupling operator").data;
        for tg in [0.3f64, 1.1, 2.0, 9.2] {
            let closed = expm_full(n, tg, 1.0, tr).expect("closed form");
            let oracle = oracle_expm(&a, C64::new(0.0, -tg)).expect("oracle");
            worst = worst.max(masked_max_abs_diff(&closed, &oracle, tr));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    conclude(
        1,
        "closed-form evolution operators vs dense exponential oracle",
        worst < 1e-9 && secs < 30.0,
        &format!(
            "max masked deviation {worst:.3e} (tolerance 1e-9) over n = 1..3, t*g in \
             {{0.3, 1.1, 2.0, 9.2}}, n_max = 40, buffer = 8; {secs:.1} s (limit 30 s)"
        ),
    );
}

#[test]
fn criterion_2_closed_form_powers_match_repeated_multiplication() {
    let tr = FockTruncation::new(40, 8).expect("truncation");
    let b = spin_three_half_matrix(tr);
    let b2 = b.dot(&b);
    let mut even_ref = identity(b.nrows());
    let mut worst = 0.0f64;
    for k in 0..=5usize {
        let odd_ref = b.dot(&even_ref);
        let (even, odd) = keylemma_powers(k, tr).expect("closed-form powers");
        let dev_even = masked_max_abs_diff(&even, &even_ref, tr) / max_abs(&even_ref).max(1.0);
        let dev_odd = masked_max_abs_diff(&odd, &odd_ref, tr) / max_abs(&odd_ref).max(1.0);
        worst = worst.max(dev_even).max(dev_odd);
        even_ref = b2.dot(&even_ref);
    }
    conclude(
        2,
        "closed-form coupling powers vs repeated multiplication",
        worst < 1e-8,
        &format!(
            "max masked relative deviation {worst:.3e} (tolerance 1e-8) over even/odd \
             exponents up to 11, n_max = 40, buffer = 8"
        ),
    );
}

#[test]
fn criterion_3_basis_change_is_orthonormal_and_block_diagonalizes() {
    let tr = FockTruncation::new(16, 4).expect("truncation");
    let mut worst_unit = 0.0f64;
    let mut worst_off = 0.0f64;
    for n in [2usize, 3] {
        let dec = decomposition(n).expect("decomposition");
        let d = dec.t.nrows();
        worst_unit = worst_unit.max(max_abs_diff(&dagger(&dec.t).dot(&dec.t), &identity(d)));

        let t_full = kron(&dec.t, &identity(tr.dim()));
        let a = coupling_operator(n, tr).expect("coupling operator").data;
        let mut bar = dagger(&t_full).dot(&a).dot(&t_full);
        let p = tr.dim();
        for block in &dec.blocks {
            let (lo, hi) = (block.offset * p, (block.offset + block.size) * p);
            bar.slice_mut(ndarray::s![lo..hi, lo..hi])
                .fill(C64::new(0.0, 0.0));
        }
        worst_off = worst_off.max(max_abs(&bar));
    }
    conclude(
        3,
        "collective basis change orthonormality and block structure",
        worst_unit < 1e-15 && worst_off < 1e-14,
        &format!(
            "max |T\u{2020}T - 1| = {worst_unit:.3e} (tolerance 1e-15); max off-block \
             conjugated coupling entry {worst_off:.3e} (tolerance 1e-14) for n = 2, 3"
        ),
    );
}

#[test]
fn criterion_4_reduced_tables_match_numeric_projection() {
    let tr = FockTruncation::new(16, 5).expect("truncation");
    let mut rng = ChaCha8Rng::seed_from_u64(0x7411);
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        // Off-resonant multi-drive parameters exercise every table entry.
        let mut params = ModelParams {
            omega: 1.0,
            delta: 1.0,
            g: 1.0,
            drives: vec![
                Drive {
                    h: 0.08,
                    omega: 1.3,
                    phi: 0.4,
                },
                Drive {
                    h: 0.05,
                    omega: 2.1,
                    phi: -0.9,
                },
            ],
        };
        if n == 3 {
            params.drives.push(Drive {
                h: 0.06,
                omega: 0.7,
                phi: 1.7,
            });
        }
        let gen = reduced_generator(n, &params).expect("closed-form generator");
        for _ in 0..20 {
            let t = rng.gen_range(0.0..3.0);
            let closed = gen.evaluate(t);
            let numeric = numeric_reduced_generator(n, &params, tr, t).expect("projection");
            worst = worst.max(max_abs_diff(&closed, &numeric));
        }
    }
    conclude(
        4,
        "reduced-generator tables vs numeric photon-ground projection",
        worst < 1e-10,
        &format!(
            "max deviation {worst:.3e} (tolerance 1e-10) over n = 2, 3 at 20 seeded \
             times each"
        ),
    );
}

#[test]
fn criterion_5_secular_amplitudes_match_printed_prefactors() {
    let rt2 = 2f64.sqrt();
    let rt3 = 3f64.sqrt();
    let rt30 = 30f64.sqrt();
    let rt73 = 73f64.sqrt();
    let cases = [
        (GateTarget::Cz2, -rt2 * (rt3 - 1.0) / 24.0),
        (GateTarget::A, rt3 * (-11.0 + rt73) / (20.0 * rt73)),
        (GateTarget::B, rt2 * (1.0 - rt3) / 12.0),
        (GateTarget::C, (4.0 - rt30) / 60.0),
    ];
    let mut worst_rel = 0.0f64;
    let mut structure_ok = true;
    let mut detail = String::new();
    for (gate, prefactor) in cases {
        // Unit drive amplitude, zero phase: survivors are the bare
        // prefactors.
        let mut params = drive_params(gate, 1.0);
        params.drives[0].phi = 0.0;
        let gen = reduced_generator(gate.n_atoms(), &params).expect("generator");
        let filt = rwa_filter(&gen, &resonance_for(gate)).expect("filter");

        let mut pair: Vec<(usize, usize)> =
            filt.survivors.iter().map(|s| (s.row, s.col)).collect();
        pair.sort_unstable();
        let symmetric_offdiag = pair.len() == 2
            && pair[0].0 == pair[1].1
            && pair[0].1 == pair[1].0
            && pair[0].0 != pair[0].1;
        structure_ok &= symmetric_offdiag;
        for s in &filt.survivors {
            let dev = (s.amplitude - C64::new(prefactor, 0.0)).norm() / prefactor.abs();
            worst_rel = worst_rel.max(dev);
        }
        detail.push_str(&format!(
            "{gate}: {} survivors at {:?}; ",
            filt.survivors.len(),
            pair
        ));
    }
    conclude(
        5,
        "rotating-wave filter keeps one symmetric pair at the printed amplitude",
        structure_ok && worst_rel < 1e-14,
        &format!(
            "{}max relative amplitude deviation {worst_rel:.3e} (tolerance 1e-14)",
            detail
        ),
    );
}

#[test]
fn criterion_6_gate_algebra_is_exact_to_one_ulp() {
    let started = Instant::now();
    const ULP: f64 = f64::EPSILON;
    let id2 = identity(2);
    let sig1 = pauli(AtomOp::Sigma1);
    let sig3 = pauli(AtomOp::Sigma3);

    let cnot = real_matrix(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    );
    let checks: Vec<(&str, f64)> = vec![
        (
            "CNOT",
            componentwise_max_diff(assemble_cnot_two().matrix(), &cnot),
        ),
        (
            "CNOT x I",
            componentwise_max_diff(
                assemble_three(GateTarget::A).expect("variant A").matrix(),
                &kron(&cnot, &id2),
            ),
        ),
        (
            "I x CNOT",
            componentwise_max_diff(
                assemble_three(GateTarget::B).expect("variant B").matrix(),
                &kron(&id2, &cnot),
            ),
        ),
        (
            "skip-atom CNOT",
            componentwise_max_diff(
                assemble_three(GateTarget::C).expect("variant C").matrix(),
                &controlled(&sig1, 1, 3, 3).expect("control 1, target 3"),
            ),
        ),
        ("CCNOT", {
            let mut expected = identity(8);
            expected[(6, 6)] = C64::new(0.0, 0.0);
            expected[(7, 7)] = C64::new(0.0, 0.0);
            expected[(6, 7)] = C64::new(1.0, 0.0);
            expected[(7, 6)] = C64::new(1.0, 0.0);
            componentwise_max_diff(assemble_ccnot().matrix(), &expected)
        }),
        (
            "sigma3 x sigma3",
            componentwise_max_diff(sigma3_tensor_sigma3().matrix(), &kron(&sig3, &sig3)),
        ),
        (
            "Walsh-Hadamard",
            componentwise_max_diff(
                &walsh_matrix(),
                &real_matrix(
                    2,
                    &[
                        std::f64::consts::FRAC_1_SQRT_2,
                        std::f64::consts::FRAC_1_SQRT_2,
                        std::f64::consts::FRAC_1_SQRT_2,
                        -std::f64::consts::FRAC_1_SQRT_2,
                    ],
                ),
            ),
        ),
        (
            "V^2 = sigma1",
            componentwise_max_diff(&sqrt_not().dot(&sqrt_not()), &sig1),
        ),
        ("V^4 = sigma1", {
            let v = fourth_root_not();
            componentwise_max_diff(&v.dot(&v).dot(&v).dot(&v), &sig1)
        }),
    ];
    let (worst_name, worst) = checks
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(name, d)| (*name, *d))
        .expect("checks list is nonempty");
    let secs = started.elapsed().as_secs_f64();
    conclude(
        6,
        "assembled gate algebra vs exact matrices",
        worst <= ULP && secs < 1.0,
        &format!(
            "max entrywise component deviation {worst:.3e} ({worst_name}) over {} \
             identities (tolerance one ulp = {ULP:.3e}); {secs:.3} s (limit 1 s)",
            checks.len()
        ),
    );
}

#[test]
fn criterion_7_full_dynamics_controlled_phase_fidelity() {
    let started = Instant::now();
    // The fidelity below is scored against the assembly's quarter-pulse
    // matrix; pin that matrix to its exact form first so the score is
    // anchored to an explicit target.
    let quarter = real_matrix(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, -1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    );
    assert!(
        max_abs_diff(cnot_two_assembly().quarter_pulse.matrix(), &quarter) <= f64::EPSILON,
        "quarter-pulse target drifted from its exact form"
    );

    let tr = FockTruncation::new(40, 8).expect("truncation");
    let cfg = SimulationConfig {
        params: drive_params(GateTarget::Cz2, 0.1),
        tr,
        step: 1e-3,
        photon_init: 0,
        report_grid: 1024,
    };
    let amplitudes = [0.1f64, 0.03, 0.01];
    let rows = sweep_with_reports(GateTarget::Cz2, &amplitudes, &cfg).expect("sweep");
    let fids: Vec<f64> = rows.iter().map(|(row, _)| row.fidelity).collect();
    let monotone = fids[0] < fids[1] && fids[1] < fids[2];
    let final_fidelity = fids[2];
    let secs = started.elapsed().as_secs_f64();
    conclude(
        7,
        "full-model controlled-phase fidelity at weak drive",
        monotone && final_fidelity >= 0.999 && secs < 600.0,
        &format!(
            "fidelity vs quarter pulse at h1/g = 0.1, 0.03, 0.01: {:.6}, {:.6}, {:.6} \
             (strictly improving: {monotone}; final >= 0.999: {}); n_max = 40, buffer = 8, \
             step 1e-3; {secs:.0} s (limit 600 s)",
            fids[0],
            fids[1],
            fids[2],
            final_fidelity >= 0.999
        ),
    );
}

#[test]
fn criterion_8_full_dynamics_three_atom_variant_a() {
    let started = Instant::now();
    // Pin the scoring target to its exact diagonal form.
    let ideal = diagonal(&[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0]);
    assert!(
        max_abs_diff(
            three_atom_assembly(GateTarget::A)
                .expect("variant A")
                .half_pulse
                .matrix(),
            &ideal
        ) <= f64::EPSILON,
        "half-pulse target drifted from its exact form"
    );

    let cfg = SimulationConfig {
        params: drive_params(GateTarget::A, 0.01),
        tr: FockTruncation::new(16, 4).expect("truncation"),
        step: 1e-3,
        photon_init: 0,
        report_grid: 1024,
    };
    let outcome = simulate_gate(GateTarget::A, &cfg).expect("variant A simulation");
    let fidelity = outcome.report.fidelity;
    let pair = outcome.report.diagnostics.dominant_pair;
    let pair_ok = pair == [5, 6];
    let secs = started.elapsed().as_secs_f64();
    conclude(
        8,
        "full-model three-atom half pulse at weak drive",
        fidelity >= 0.99 && pair_ok && secs < 1200.0,
        &format!(
            "fidelity vs diag(1,1,1,1,-1,-1,1,1) at h1/g = 0.01: {fidelity:.6} \
             (>= 0.99: {}); dominant transition pair {pair:?} (expected [5, 6]: \
             {pair_ok}); n_max = 16, buffer = 4, step 1e-3; {secs:.0} s (limit 1200 s)",
            fidelity >= 0.99
        ),
    );
}

#[test]
fn criterion_9_integrator_step_stability_and_unitarity() {
    // Step halving on both gate families at the reporting step.
    let mut worst_delta = 0.0f64;
    let halving_cases = [
        (GateTarget::Cz2, 0.1),
        (GateTarget::A, 0.2),
    ];
    for (gate, h1) in halving_cases {
        let mut fids = [0.0f64; 2];
        for (slot, step) in [(0usize, 1e-3), (1usize, 5e-4)] {
            let cfg = SimulationConfig {
                params: drive_params(gate, h1),
                tr: FockTruncation::new(8, 2).expect("truncation"),
                step,
                photon_init: 0,
                report_grid: 1024,
            };
            fids[slot] = simulate_gate(gate, &cfg).expect("simulation").report.fidelity;
        }
        worst_delta = worst_delta.max((fids[0] - fids[1]).abs());
    }

    // Unitarity of the full propagators on the whole truncated space.
    let mut worst_defect = 0.0f64;
    let unitarity_cases = [
        (GateTarget::Cz2, 0.1),
        (GateTarget::A, 0.5),
    ];
    for (gate, h1) in unitarity_cases {
        let params = drive_params(gate, h1);
        let schedule = design(gate, &params).expect("schedule");
        let cfg = SimulationConfig {
            params,
            tr: FockTruncation::new(8, 2).expect("truncation"),
            step: 1e-3,
            photon_init: 0,
            report_grid: 1024,
        };
        let prop = integrate(&cfg, &schedule).expect("full propagator");
        worst_defect = worst_defect.max(prop.unitarity_defect);
    }
    conclude(
        9,
        "integrator step-halving stability and propagator unitarity",
        worst_delta < 1e-6 && worst_defect < 1e-8,
        &format!(
            "max fidelity change under step halving {worst_delta:.3e} (tolerance 1e-6); \
             max full-propagator unitarity defect {worst_defect:.3e} (tolerance 1e-8)"
        ),
    );
}

#[test]
fn criterion_10_single_atom_appendix_constructions() {
    let walsh_dev = max_abs_diff(appendix_walsh_hadamard().matrix(), &walsh_matrix());
    let mut rng = ChaCha8Rng::seed_from_u64(0xa10);
    let mut worst_defect = 0.0f64;
    for _ in 0..1000 {
        let theta = rng.gen_range(-3.0..3.0);
        let h = rng.gen_range(0.0..2.0);
        let t = rng.gen_range(0.0..10.0);
        let u = appendix_single_qubit(theta, h, t);
        worst_defect = worst_defect.max(unitarity_defect(u.matrix()));
    }
    conclude(
        10,
        "single-atom pulse constructions",
        walsh_dev == 0.0 && worst_defect < 1e-15,
        &format!(
            "free/pulse/free composition deviation from Walsh-Hadamard {walsh_dev:.3e} \
             (exact required); max unitarity defect over 1000 seeded pulses \
             {worst_defect:.3e} (tolerance 1e-15)"
        ),
    );
}
