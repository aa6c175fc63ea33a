//! Deterministic self-check registry.
//!
//! Every analytic building block of the crate is paired here with an
//! independent numeric check: closed-form exponentials against the
//! general-purpose Padé oracle, the reduced generators against a direct
//! projection, the resonance filter against the predicted survivor
//! amplitudes, and the assembled gates against their exact integer or
//! dyadic forms. [`run_scope`] executes a named subset and reports one
//! [`CheckResult`] per check; the command-line `verify` subcommand and
//! the acceptance suite both consume this registry.

use std::fmt;
use std::str::FromStr;

use ndarray::linalg::kron;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decomp::{
    block_labels, expm_full, keylemma_powers, spin_three_half_matrix, t_matrix,
};
use crate::error::{Error, Result};
use crate::expm::oracle_expm;
use crate::gates::{
    appendix_single_qubit, appendix_walsh_hadamard, assemble_ccnot, assemble_cnot_two,
    assemble_three, ccnot_assembly, cccnot_identity_check, cnot_matrix, controlled,
    fourth_root_not, rwa_propagator_two, walsh_matrix,
};
use crate::model::{Drive, ModelParams};
use crate::operators::{
    coupling_operator, dagger, identity, masked_max_abs_diff, max_abs, max_abs_diff, pauli,
    unitarity_defect, AtomOp, FockTruncation,
};
use crate::pulses::{coupled_pair, rabi_rate, resonance_for, GateTarget};
use crate::reduced::{numeric_reduced_generator, reduced_generator, rwa_filter};
use crate::{C64, CMat};

/// Named subsets of the self-check registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// The dense Padé exponential oracle itself.
    Expm,
    /// Collective-basis decomposition and closed-form exponentials.
    Decomposition,
    /// Closed-form even/odd power formulas for the three-atom coupling.
    KeyLemma,
    /// Reduced weak-drive generators and the resonance filter.
    Reduced,
    /// Exact gate assemblies.
    Gates,
    /// Single-atom pulse closed forms and the Walsh–Hadamard sequence.
    Appendix,
    /// Everything above, in order.
    All,
}

impl Scope {
    /// All concrete (non-`All`) scopes in execution order.
    pub fn concrete() -> [Scope; 6] {
        [
            Scope::Expm,
            Scope::Decomposition,
            Scope::KeyLemma,
            Scope::Reduced,
            Scope::Gates,
            Scope::Appendix,
        ]
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scope::Expm => "expm",
            Scope::Decomposition => "decomposition",
            Scope::KeyLemma => "keylemma",
            Scope::Reduced => "reduced",
            Scope::Gates => "gates",
            Scope::Appendix => "appendix",
            Scope::All => "all",
        };
        f.write_str(s)
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "expm" => Ok(Scope::Expm),
            "decomposition" => Ok(Scope::Decomposition),
            "keylemma" => Ok(Scope::KeyLemma),
            "reduced" => Ok(Scope::Reduced),
            "gates" => Ok(Scope::Gates),
            "appendix" => Ok(Scope::Appendix),
            "all" => Ok(Scope::All),
            other => Err(Error::InvalidParams {
                reason: format!(
                    "unknown verification scope {other:?} (expected expm, decomposition, \
                     keylemma, reduced, gates, appendix or all)"
                ),
            }),
        }
    }
}

/// Outcome of one self-check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    /// Human-readable check name.
    pub name: String,
    /// Whether the measured deviation stayed within tolerance.
    pub passed: bool,
    /// Largest deviation measured by the check.
    pub max_dev: f64,
    /// Tolerance the deviation was compared against.
    pub tolerance: f64,
    /// Short context string (dimensions, parameters, counts).
    pub detail: String,
}

impl CheckResult {
    fn record(name: &str, max_dev: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: max_dev.is_finite() && max_dev <= tolerance,
            max_dev,
            tolerance,
            detail,
        }
    }
}

/// True when every check in the slice passed.
pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// Run the checks of `scope`, seeding every randomized draw from `seed`
/// so repeated runs are bit-identical.
pub fn run_scope(scope: Scope, seed: u64) -> Vec<CheckResult> {
    match scope {
        Scope::Expm => checks_expm(seed),
        Scope::Decomposition => checks_decomposition(),
        Scope::KeyLemma => checks_keylemma(),
        Scope::Reduced => checks_reduced(seed),
        Scope::Gates => checks_gates(seed),
        Scope::Appendix => checks_appendix(seed),
        Scope::All => Scope::concrete()
            .into_iter()
            .flat_map(|s| run_scope(s, seed))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Helpers.
// ---------------------------------------------------------------------------

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    let mut r = CMat::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            r[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let rd = dagger(&r);
    (&r + &rd).mapv(|z| z * 0.5)
}

fn resonance_params(gate: GateTarget, h1: f64, phi: f64) -> ModelParams {
    let res = resonance_for(gate);
    ModelParams {
        omega: 1.0,
        delta: 1.0,
        g: 1.0,
        drives: vec![Drive {
            h: h1,
            omega: res.drive_frequency(1.0, 1.0),
            phi,
        }],
    }
}

// ---------------------------------------------------------------------------
// Scope: expm.
// ---------------------------------------------------------------------------

fn checks_expm(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();

    let zero = CMat::zeros((6, 6));
    let exp_zero = oracle_expm(&zero, C64::new(1.0, 0.0)).expect("zero matrix");
    out.push(CheckResult::record(
        "exponential of the zero matrix is the identity",
        max_abs_diff(&exp_zero, &identity(6)),
        1e-15,
        "6x6".into(),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x45);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let h = random_hermitian(&mut rng, 8);
        let u = oracle_expm(&h, C64::new(0.0, -1.0)).expect("hermitian exponential");
        worst = worst.max(unitarity_defect(&u));
    }
    out.push(CheckResult::record(
        "exponentials of skew-Hermitian matrices are unitary",
        worst,
        1e-12,
        "5 seeded 8x8 draws".into(),
    ));

    let h = random_hermitian(&mut rng, 6);
    let (a, b) = (0.37, 0.81);
    let lhs = oracle_expm(&h, C64::new(0.0, -(a + b))).expect("sum");
    let rhs = oracle_expm(&h, C64::new(0.0, -a))
        .expect("a")
        .dot(&oracle_expm(&h, C64::new(0.0, -b)).expect("b"));
    out.push(CheckResult::record(
        "one-parameter group property exp(-i(a+b)H) = exp(-iaH)exp(-ibH)",
        max_abs_diff(&lhs, &rhs),
        1e-11,
        format!("a = {a}, b = {b}"),
    ));

    let t = 0.7763;
    let rot = oracle_expm(&pauli(AtomOp::Sigma1), C64::new(0.0, -t)).expect("sigma1");
    let mut closed = CMat::zeros((2, 2));
    closed[(0, 0)] = C64::new(t.cos(), 0.0);
    closed[(1, 1)] = C64::new(t.cos(), 0.0);
    closed[(0, 1)] = C64::new(0.0, -t.sin());
    closed[(1, 0)] = C64::new(0.0, -t.sin());
    out.push(CheckResult::record(
        "two-level rotation matches cos/sin closed form",
        max_abs_diff(&rot, &closed),
        1e-14,
        format!("t = {t}"),
    ));

    out
}

// ---------------------------------------------------------------------------
// Scope: decomposition.
// ---------------------------------------------------------------------------

fn checks_decomposition() -> Vec<CheckResult> {
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let t = t_matrix(n).expect("t matrix");
        let d = t.nrows();
        worst = worst.max(max_abs_diff(&dagger(&t).dot(&t), &identity(d)));
        worst = worst.max(max_abs_diff(&t.dot(&dagger(&t)), &identity(d)));
    }
    out.push(CheckResult::record(
        "decomposition matrices are orthonormal both ways",
        worst,
        1e-15,
        "n = 2, 3".into(),
    ));

    let tr = FockTruncation::new(8, 2).expect("truncation");
    let mut worst_off = 0.0f64;
    for n in [2usize, 3] {
        let t_full = kron(&t_matrix(n).expect("t"), &identity(tr.dim()));
        let a = coupling_operator(n, tr).expect("coupling").data;
        let bar = dagger(&t_full).dot(&a).dot(&t_full);
        let labels = block_labels(n).expect("labels");
        let p = tr.dim();
        // Zero the diagonal blocks and measure what is left.
        let mut masked = bar.clone();
        let mut offset = 0usize;
        for label in labels {
            let d = label.size() * p;
            masked
                .slice_mut(ndarray::s![offset..offset + d, offset..offset + d])
                .fill(C64::new(0.0, 0.0));
            offset += d;
        }
        worst_off = worst_off.max(max_abs(&masked));
    }
    out.push(CheckResult::record(
        "conjugated coupling operator is block diagonal",
        worst_off,
        1e-14,
        "n = 2, 3 at n_max = 8".into(),
    ));

    let tr_big = FockTruncation::new(20, 6).expect("truncation");
    let mut worst_exp = 0.0f64;
    for n in [1usize, 2, 3] {
        let a = coupling_operator(n, tr_big).expect("coupling").data;
        for tg in [0.3f64, 1.7] {
            let closed = expm_full(n, tg, 1.0, tr_big).expect("closed form");
            let oracle = oracle_expm(&a, C64::new(0.0, -tg)).expect("oracle");
            worst_exp = worst_exp.max(masked_max_abs_diff(&closed, &oracle, tr_big));
        }
    }
    out.push(CheckResult::record(
        "closed-form exponentials match the dense oracle",
        worst_exp,
        1e-9,
        "n = 1, 2, 3; t*g in {0.3, 1.7}; n_max = 20, buffer = 6".into(),
    ));

    let mut worst_inv = 0.0f64;
    for n in [2usize, 3] {
        let fwd = expm_full(n, 1.1, 1.0, tr_big).expect("forward");
        let bwd = expm_full(n, -1.1, 1.0, tr_big).expect("backward");
        let d = fwd.nrows();
        worst_inv = worst_inv.max(masked_max_abs_diff(&fwd.dot(&bwd), &identity(d), tr_big));
    }
    out.push(CheckResult::record(
        "negated time inverts the closed-form exponential",
        worst_inv,
        1e-12,
        "n = 2, 3 at t*g = 1.1".into(),
    ));

    out
}

// ---------------------------------------------------------------------------
// Scope: keylemma.
// ---------------------------------------------------------------------------

fn checks_keylemma() -> Vec<CheckResult> {
    let tr = FockTruncation::new(10, 4).expect("truncation");
    let b = spin_three_half_matrix(tr);
    let b2 = b.dot(&b);
    let mut even_ref = identity(b.nrows());
    let mut worst = 0.0f64;
    for k in 0..=5usize {
        let odd_ref = b.dot(&even_ref);
        let (even, odd) = keylemma_powers(k, tr).expect("closed-form powers");
        let dev_e = masked_max_abs_diff(&even, &even_ref, tr) / max_abs(&even_ref).max(1.0);
        let dev_o = masked_max_abs_diff(&odd, &odd_ref, tr) / max_abs(&odd_ref).max(1.0);
        worst = worst.max(dev_e).max(dev_o);
        even_ref = b2.dot(&even_ref);
    }
    vec![CheckResult::record(
        "closed-form coupling powers match repeated multiplication",
        worst,
        1e-8,
        "exponents up to B^11, relative, n_max = 10, buffer = 4".into(),
    )]
}

// ---------------------------------------------------------------------------
// Scope: reduced.
// ---------------------------------------------------------------------------

fn checks_reduced(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();

    let tr = FockTruncation::new(16, 5).expect("truncation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9c);
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let mut params = resonance_params(GateTarget::Cz2, 0.01, 0.4);
        if n == 2 {
            params.drives.push(Drive {
                h: 0.007,
                omega: 1.9,
                phi: -0.2,
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
    out.push(CheckResult::record(
        "reduced generators match the numeric photon-ground projection",
        worst,
        1e-10,
        "n = 2, 3; 20 seeded times each".into(),
    ));

    let mut worst_rel = 0.0f64;
    let mut detail = String::new();
    let mut structure_ok = true;
    for gate in [GateTarget::Cz2, GateTarget::A, GateTarget::B, GateTarget::C] {
        let n = gate.n_atoms();
        let h1 = 0.01;
        let params = resonance_params(gate, h1, 0.0);
        let gen = reduced_generator(n, &params).expect("generator");
        let filt = rwa_filter(&gen, &resonance_for(gate)).expect("filter");
        let (lo, hi) = coupled_pair(gate);
        let expected = -rabi_rate(gate, h1);
        let mut seen = [false, false];
        if filt.survivors.len() != 2 {
            structure_ok = false;
        }
        for s in &filt.survivors {
            let (r, c) = (s.row + 1, s.col + 1);
            if (r, c) == (lo, hi) {
                seen[0] = true;
            } else if (r, c) == (hi, lo) {
                seen[1] = true;
            } else {
                structure_ok = false;
            }
            let dev = (s.amplitude - C64::new(expected, 0.0)).norm() / expected.abs();
            worst_rel = worst_rel.max(dev);
        }
        if !(seen[0] && seen[1]) {
            structure_ok = false;
        }
        detail.push_str(&format!("{gate}:({lo},{hi}) "));
    }
    let mut check = CheckResult::record(
        "resonance filter keeps one symmetric pair at the predicted rate",
        worst_rel,
        1e-14,
        detail.trim_end().to_string(),
    );
    check.passed &= structure_ok;
    if !structure_ok {
        check.detail.push_str(" [unexpected survivor structure]");
    }
    out.push(check);

    out
}

// ---------------------------------------------------------------------------
// Scope: gates.
// ---------------------------------------------------------------------------

fn checks_gates(seed: u64) -> Vec<CheckResult> {
    const ULP: f64 = f64::EPSILON;
    let mut out = Vec::new();

    out.push(CheckResult::record(
        "two-atom controlled NOT assembly is exact to one ulp",
        max_abs_diff(assemble_cnot_two().matrix(), &cnot_matrix()),
        ULP,
        "4x4".into(),
    ));

    let id2 = identity(2);
    let embeds: [(GateTarget, CMat); 3] = [
        (GateTarget::A, kron(&cnot_matrix(), &id2)),
        (GateTarget::B, kron(&id2, &cnot_matrix())),
        (
            GateTarget::C,
            controlled(&pauli(AtomOp::Sigma1), 1, 3, 3).expect("control 1, target 3"),
        ),
    ];
    let mut worst = 0.0f64;
    for (variant, embed) in &embeds {
        let gate = assemble_three(*variant).expect("three-atom variant");
        worst = worst.max(max_abs_diff(gate.matrix(), embed));
    }
    out.push(CheckResult::record(
        "three-atom pulse variants land on their wiring",
        worst,
        ULP,
        "A: 1->2, B: 2->3, C: 1->3".into(),
    ));

    let a = assemble_three(GateTarget::A).expect("variant A");
    let b = assemble_three(GateTarget::B).expect("variant B");
    let c = assemble_three(GateTarget::C).expect("variant C");
    let baba = b
        .matrix()
        .dot(a.matrix())
        .dot(b.matrix())
        .dot(a.matrix());
    out.push(CheckResult::record(
        "B·A·B·A composition reproduces variant C",
        max_abs_diff(&baba, c.matrix()),
        4.0 * ULP,
        "8x8".into(),
    ));

    let asm = ccnot_assembly();
    let mut ideal = identity(8);
    ideal[(6, 6)] = C64::new(0.0, 0.0);
    ideal[(7, 7)] = C64::new(0.0, 0.0);
    ideal[(6, 7)] = C64::new(1.0, 0.0);
    ideal[(7, 6)] = C64::new(1.0, 0.0);
    out.push(CheckResult::record(
        "five-gate controlled-controlled NOT is exact to one ulp",
        max_abs_diff(assemble_ccnot().matrix(), &ideal),
        ULP,
        "with exact integer CNOT factors".into(),
    ));
    out.push(CheckResult::record(
        "square root of NOT squares to sigma1",
        max_abs_diff(&asm.v.dot(&asm.v), &pauli(AtomOp::Sigma1)),
        ULP,
        "dyadic 2x2".into(),
    ));

    let v4 = fourth_root_not();
    let v4_sq = v4.dot(&v4);
    let fourth = v4_sq.dot(&v4_sq);
    out.push(CheckResult::record(
        "fourth root of NOT reaches sigma1 in four steps",
        max_abs_diff(&fourth, &pauli(AtomOp::Sigma1)).max(unitarity_defect(&v4)),
        ULP,
        "includes the root's own unitarity".into(),
    ));

    let ladder = cccnot_identity_check();
    let mut ideal16 = identity(16);
    ideal16[(14, 14)] = C64::new(0.0, 0.0);
    ideal16[(15, 15)] = C64::new(0.0, 0.0);
    ideal16[(14, 15)] = C64::new(1.0, 0.0);
    ideal16[(15, 14)] = C64::new(1.0, 0.0);
    out.push(CheckResult::record(
        "thirteen-gate ladder flips only the all-ones state",
        max_abs_diff(ladder.matrix(), &ideal16),
        4.0 * ULP,
        "16x16 Gray-code ordering".into(),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
    let mut worst_rwa = 0.0f64;
    for _ in 0..20 {
        let t = rng.gen_range(0.0..20.0);
        let alpha = rng.gen_range(0.001..0.2);
        let phi = rng.gen_range(-3.0..3.0);
        let gate = rwa_propagator_two(t, alpha, phi);
        let mut gen = CMat::zeros((4, 4));
        gen[(1, 2)] = -C64::new(alpha, 0.0) * C64::new(0.0, phi).exp();
        gen[(2, 1)] = gen[(1, 2)].conj();
        let oracle = oracle_expm(&gen, C64::new(0.0, -t)).expect("rwa oracle");
        worst_rwa = worst_rwa.max(max_abs_diff(gate.matrix(), &oracle));
    }
    out.push(CheckResult::record(
        "resonant-block propagator matches its exponential oracle",
        worst_rwa,
        1e-14,
        "20 seeded draws".into(),
    ));

    out
}

// ---------------------------------------------------------------------------
// Scope: appendix.
// ---------------------------------------------------------------------------

fn checks_appendix(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();

    out.push(CheckResult::record(
        "three-segment pulse sequence closes to the Walsh-Hadamard exactly",
        max_abs_diff(appendix_walsh_hadamard().matrix(), &walsh_matrix()),
        0.0,
        "bitwise".into(),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa1);
    let mut worst_unitary = 0.0f64;
    for _ in 0..1000 {
        let theta = rng.gen_range(-10.0..10.0);
        let h = rng.gen_range(0.0..5.0);
        let t = rng.gen_range(0.0..10.0);
        worst_unitary = worst_unitary.max(unitarity_defect(
            appendix_single_qubit(theta, h, t).matrix(),
        ));
    }
    out.push(CheckResult::record(
        "single-atom propagator stays unitary over random draws",
        worst_unitary,
        1e-15,
        "1000 seeded draws".into(),
    ));

    let mut worst_oracle = 0.0f64;
    for _ in 0..25 {
        let theta = rng.gen_range(-4.0..4.0);
        let h = rng.gen_range(0.0..2.0);
        let t = rng.gen_range(0.0..6.0);
        let mut gen = CMat::zeros((2, 2));
        gen[(0, 0)] = C64::new(0.5 * theta, 0.0);
        gen[(1, 1)] = C64::new(-0.5 * theta, 0.0);
        gen[(0, 1)] = C64::new(h, 0.0);
        gen[(1, 0)] = C64::new(h, 0.0);
        let oracle = oracle_expm(&gen, C64::new(0.0, -t)).expect("two-level oracle");
        worst_oracle = worst_oracle.max(max_abs_diff(
            appendix_single_qubit(theta, h, t).matrix(),
            &oracle,
        ));
    }
    out.push(CheckResult::record(
        "single-atom propagator matches the dense oracle",
        worst_oracle,
        1e-13,
        "25 seeded draws".into(),
    ));

    out
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_scope_passes() {
        for scope in Scope::concrete() {
            let results = run_scope(scope, 17);
            assert!(!results.is_empty(), "{scope} produced no checks");
            for r in &results {
                assert!(
                    r.passed,
                    "{scope} / {}: max dev {:e} vs tolerance {:e} ({})",
                    r.name, r.max_dev, r.tolerance, r.detail
                );
            }
        }
    }

    #[test]
    fn all_scope_concatenates_everything() {
        let total: usize = Scope::concrete()
            .into_iter()
            .map(|s| run_scope(s, 3).len())
            .sum();
        let all = run_scope(Scope::All, 3);
        assert_eq!(all.len(), total);
        assert!(all_passed(&all));
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run_scope(Scope::All, 99);
        let b = run_scope(Scope::All, 99);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.max_dev.to_bits(), y.max_dev.to_bits());
            assert_eq!(x.passed, y.passed);
        }
    }

    #[test]
    fn scope_parsing_roundtrips_and_rejects_garbage() {
        for scope in Scope::concrete() {
            let parsed: Scope = scope.to_string().parse().unwrap();
            assert_eq!(parsed, scope);
        }
        let all: Scope = "all".parse().unwrap();
        assert_eq!(all, Scope::All);
        assert!("bogus".parse::<Scope>().is_err());
    }
}
