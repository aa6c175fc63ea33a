//! Exact gate algebra: pulse propagators in the collective basis,
//! frame-change conjugations, and the controlled-gate constructions
//! assembled from them.
//!
//! Everything in this module is pure matrix algebra on small (2- to
//! 16-dimensional) unitaries whose entries are drawn from `{0, ±1,
//! ±1/√2}` and small dyadic complex numbers. The chains of products
//! therefore stay exact — or within one unit in the last place — in
//! `f64`, and the tests assert them at that precision. The pulse-level
//! dynamics that physically realize these matrices live in
//! [`crate::sim`]; the resonance conditions and durations that select
//! them live in [`crate::pulses`].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use ndarray::linalg::kron;

use crate::decomp::t_matrix;
use crate::error::{Error, Result};
use crate::operators::{dagger, identity, pauli, unitarity_defect, AtomOp};
use crate::pulses::{coupled_pair, GateTarget};
use crate::{C64, CMat};

/// Unitarity tolerance enforced by [`QubitGate::new`].
pub const GATE_UNITARITY_TOL: f64 = 1e-14;

/// A validated unitary on 1–4 qubits with a human-readable label.
#[derive(Debug, Clone)]
pub struct QubitGate {
    matrix: CMat,
    label: String,
}

impl QubitGate {
    /// Wraps `matrix` after checking that it is square with dimension
    /// `2^n` for `n ∈ 1..=4` and unitary within
    /// [`GATE_UNITARITY_TOL`].
    pub fn new(label: impl Into<String>, matrix: CMat) -> Result<Self> {
        let label = label.into();
        let d = matrix.nrows();
        if matrix.ncols() != d {
            return Err(Error::Dimension {
                context: "qubit gate matrix",
                left: d,
                right: matrix.ncols(),
            });
        }
        if !(d.is_power_of_two() && (2..=16).contains(&d)) {
            return Err(Error::InvalidParams {
                reason: format!("gate dimension {d} is not 2^n for n in 1..=4"),
            });
        }
        let defect = unitarity_defect(&matrix);
        if !(defect <= GATE_UNITARITY_TOL) {
            return Err(Error::InvalidParams {
                reason: format!("gate `{label}` is not unitary (defect {defect:.3e})"),
            });
        }
        Ok(QubitGate { matrix, label })
    }

    /// Constructor for matrices that are unitary by construction.
    fn exact(label: &str, matrix: CMat) -> Self {
        QubitGate::new(label, matrix).expect("gate is unitary by construction")
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.matrix.nrows().trailing_zeros() as usize
    }

    /// Conjugate transpose — the inverse, since the gate is unitary.
    pub fn dagger(&self) -> QubitGate {
        QubitGate {
            matrix: dagger(&self.matrix),
            label: format!("{}^dagger", self.label),
        }
    }
}

/// Builds a square matrix from row-major real entries.
fn real_matrix(d: usize, entries: &[f64]) -> CMat {
    assert_eq!(entries.len(), d * d, "entry count must match shape");
    CMat::from_shape_vec((d, d), entries.iter().map(|&x| C64::new(x, 0.0)).collect())
        .expect("entry count matches shape")
}

/// Builds a real diagonal matrix.
fn diagonal(entries: &[f64]) -> CMat {
    let d = entries.len();
    let mut m = CMat::zeros((d, d));
    for (i, &v) in entries.iter().enumerate() {
        m[(i, i)] = C64::new(v, 0.0);
    }
    m
}

/// The Walsh–Hadamard matrix `W = (1/√2)[[1,1],[1,−1]]`.
pub fn walsh_matrix() -> CMat {
    real_matrix(
        2,
        &[
            FRAC_1_SQRT_2,
            FRAC_1_SQRT_2,
            FRAC_1_SQRT_2,
            -FRAC_1_SQRT_2,
        ],
    )
}

/// The 4×4 controlled NOT `I₂ ⊕ σ₁` (control = first qubit).
pub fn cnot_matrix() -> CMat {
    real_matrix(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
}

/// Embeds a single-qubit gate `u` as a controlled operation on `n`
/// qubits (2 ≤ n ≤ 4): `u` acts on `target` whenever `control` is in
/// its second basis state. Qubit 1 is the outermost (most significant)
/// tensor factor and indices are 1-based, matching the atom ordering
/// used throughout the crate.
pub fn controlled(u: &CMat, control: usize, target: usize, n: usize) -> Result<CMat> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(Error::Dimension {
            context: "controlled-gate factor",
            left: u.nrows(),
            right: u.ncols(),
        });
    }
    if !(2..=4).contains(&n) {
        return Err(Error::AtomCount {
            n_atoms: n,
            context: "controlled embedding",
        });
    }
    for &j in &[control, target] {
        if j == 0 || j > n {
            return Err(Error::AtomIndex {
                index: j,
                n_atoms: n,
            });
        }
    }
    if control == target {
        return Err(Error::InvalidParams {
            reason: format!("control and target coincide (qubit {control})"),
        });
    }
    let d = 1usize << n;
    let cmask = 1usize << (n - control);
    let tmask = 1usize << (n - target);
    let mut m = CMat::zeros((d, d));
    for b in 0..d {
        if b & cmask == 0 {
            m[(b, b)] = C64::new(1.0, 0.0);
        } else if b & tmask == 0 {
            let b1 = b | tmask;
            m[(b, b)] = u[(0, 0)];
            m[(b, b1)] = u[(0, 1)];
            m[(b1, b)] = u[(1, 0)];
            m[(b1, b1)] = u[(1, 1)];
        }
    }
    Ok(m)
}

/// Rabi rotation embedded on one slot pair of a `d`-dimensional
/// identity: `cos` on the pair diagonal, `i e^{±iφ₁} sin` off it.
fn rwa_block(d: usize, (i, j): (usize, usize), t: f64, rate: f64, phi1: f64, label: &str) -> QubitGate {
    let mut m = identity(d);
    let c = (rate * t).cos();
    let s = (rate * t).sin();
    let phase = C64::new(0.0, phi1).exp();
    m[(i, i)] = C64::new(c, 0.0);
    m[(j, j)] = C64::new(c, 0.0);
    m[(i, j)] = C64::i() * phase * s;
    m[(j, i)] = C64::i() * phase.conj() * s;
    QubitGate::exact(label, m)
}

/// Two-atom pulse propagator in the collective basis under the
/// rotating-wave approximation: identity on the outer slots, Rabi
/// rotation at rate `alpha` with drive phase `phi1` on the coupled
/// middle pair.
pub fn rwa_propagator_two(t: f64, alpha: f64, phi1: f64) -> QubitGate {
    rwa_block(4, (1, 2), t, alpha, phi1, "two-atom pulse propagator")
}

/// Three-atom pulse propagator in the collective basis for one of the
/// diagonal gate variants: Rabi rotation at `rate` on that variant's
/// coupled slot pair.
pub fn rwa_propagator_three(
    variant: GateTarget,
    t: f64,
    rate: f64,
    phi1: f64,
) -> Result<QubitGate> {
    if variant.n_atoms() != 3 {
        return Err(Error::InvalidParams {
            reason: format!("gate {variant} does not name a three-atom pulse"),
        });
    }
    let (i, j) = coupled_pair(variant);
    Ok(rwa_block(
        8,
        (i - 1, j - 1),
        t,
        rate,
        phi1,
        &format!("three-atom pulse propagator ({variant})"),
    ))
}

/// The 4×4 collective-basis change `T`: a computational-basis operator
/// is `T · M · T†` for a collective-coordinate operator `M`. Used by
/// the simulator to report gates in the computational basis.
pub fn basis_change_two() -> QubitGate {
    QubitGate::exact(
        "collective basis change (2 atoms)",
        t_matrix(2).expect("two atoms are supported"),
    )
}

/// The 8×8 collective-basis change for three atoms.
pub fn basis_change_three() -> QubitGate {
    QubitGate::exact(
        "collective basis change (3 atoms)",
        t_matrix(3).expect("three atoms are supported"),
    )
}

/// Every matrix produced along the two-atom controlled-NOT
/// construction, retained so each algebraic step can be inspected and
/// tested on its own.
#[derive(Debug, Clone)]
pub struct CnotTwoAssembly {
    /// The quarter pulse `U(t₀)`: a π/2 Rabi rotation of the coupled
    /// pair with drive phase π/2, which lands on the exact matrix
    /// `[[1,0,0,0],[0,0,−1,0],[0,1,0,0],[0,0,0,1]]`.
    pub quarter_pulse: QubitGate,
    /// The atom-exchange permutation `P` (swap the two atoms).
    pub exchange: QubitGate,
    /// `P · U(t₀) = diag(1,1,−1,1)`: a controlled phase flip.
    pub controlled_phase: QubitGate,
    /// `(1⊗σ₁) · P·U(t₀) · (1⊗σ₁) = diag(1,1,1,−1)`: controlled σ₃.
    pub controlled_sigma_z: QubitGate,
    /// `(1⊗W) · C_{σz} · (1⊗W) = I₂ ⊕ σ₁`: the controlled NOT.
    pub cnot: QubitGate,
}

/// Assembles the two-atom controlled NOT step by step from the quarter
/// pulse, the atom exchange, and single-atom frame gates.
pub fn cnot_two_assembly() -> CnotTwoAssembly {
    let quarter_pulse = QubitGate::exact(
        "quarter pulse",
        real_matrix(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        ),
    );
    let exchange = QubitGate::exact(
        "atom exchange",
        real_matrix(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        ),
    );
    let controlled_phase = QubitGate::exact(
        "controlled phase",
        exchange.matrix().dot(quarter_pulse.matrix()),
    );
    let flip_second = kron(&identity(2), &pauli(AtomOp::Sigma1));
    let controlled_sigma_z = QubitGate::exact(
        "controlled sigma_z",
        flip_second
            .dot(controlled_phase.matrix())
            .dot(&flip_second),
    );
    let w_second = kron(&identity(2), &walsh_matrix());
    let cnot = QubitGate::exact(
        "CNOT",
        w_second.dot(controlled_sigma_z.matrix()).dot(&w_second),
    );
    CnotTwoAssembly {
        quarter_pulse,
        exchange,
        controlled_phase,
        controlled_sigma_z,
        cnot,
    }
}

/// The final two-atom controlled NOT, `I₂ ⊕ σ₁`.
pub fn assemble_cnot_two() -> QubitGate {
    cnot_two_assembly().cnot
}

/// The half-pulse branch of the two-atom construction (rotation angle
/// π instead of π/2): `diag(1,−1,−1,1) = σ₃⊗σ₃`. The middle block is
/// `−I₂`, so the matrix is the same in collective and computational
/// coordinates.
pub fn sigma3_tensor_sigma3() -> QubitGate {
    QubitGate::exact("sigma3 x sigma3", diagonal(&[1.0, -1.0, -1.0, 1.0]))
}

/// Every matrix produced along a three-atom controlled-NOT
/// construction.
#[derive(Debug, Clone)]
pub struct ThreeAtomAssembly {
    pub variant: GateTarget,
    /// The diagonal ±1 half-pulse result `U_X(t_X)`.
    pub half_pulse: QubitGate,
    /// The half pulse after its exact frame correction — σ₁
    /// conjugation on one atom for variants A and B, composition with
    /// variant A's frame-corrected gate for variant C. Still diagonal
    /// with entries ±1.
    pub frame_conjugated: QubitGate,
    /// The final controlled NOT after Walsh–Hadamard conjugation on
    /// the target atom.
    pub cnot: QubitGate,
    /// 1-based atom whose second basis state triggers the flip, read
    /// off the final matrix.
    pub control: usize,
    /// 1-based atom that is flipped.
    pub target: usize,
}

/// Assembles one of the three-atom controlled-NOT variants:
///
/// * `A` — control atom 1, target atom 2: final gate `CNOT ⊗ I₂`;
/// * `B` — control atom 2, target atom 3: final gate `I₂ ⊗ CNOT`;
/// * `C` — control atom 1, target atom 3: final gate
///   `I₄ ⊕ σ₁ ⊕ σ₁`.
///
/// Errors on gate targets that are not one of these diagonal
/// three-atom variants.
pub fn three_atom_assembly(variant: GateTarget) -> Result<ThreeAtomAssembly> {
    let id2 = identity(2);
    let sig1 = pauli(AtomOp::Sigma1);
    let w = walsh_matrix();
    match variant {
        GateTarget::A => {
            let half_pulse = QubitGate::exact(
                "half pulse (A)",
                diagonal(&[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0]),
            );
            let flip = kron(&kron(&id2, &sig1), &id2);
            let frame_conjugated = QubitGate::exact(
                "frame-corrected half pulse (A)",
                flip.dot(half_pulse.matrix()).dot(&flip),
            );
            let wmid = kron(&kron(&id2, &w), &id2);
            let cnot = QubitGate::exact(
                "CNOT(1->2) x I",
                wmid.dot(frame_conjugated.matrix()).dot(&wmid),
            );
            Ok(ThreeAtomAssembly {
                variant,
                half_pulse,
                frame_conjugated,
                cnot,
                control: 1,
                target: 2,
            })
        }
        GateTarget::B => {
            let half_pulse = QubitGate::exact(
                "half pulse (B)",
                diagonal(&[1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0, 1.0]),
            );
            let flip = kron(&kron(&id2, &id2), &sig1);
            let frame_conjugated = QubitGate::exact(
                "frame-corrected half pulse (B)",
                flip.dot(half_pulse.matrix()).dot(&flip),
            );
            let wlast = kron(&kron(&id2, &id2), &w);
            let cnot = QubitGate::exact(
                "I x CNOT(2->3)",
                wlast.dot(frame_conjugated.matrix()).dot(&wlast),
            );
            Ok(ThreeAtomAssembly {
                variant,
                half_pulse,
                frame_conjugated,
                cnot,
                control: 2,
                target: 3,
            })
        }
        GateTarget::C => {
            let half_pulse = QubitGate::exact(
                "half pulse (C)",
                diagonal(&[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0]),
            );
            // Variant C needs variant A's frame-corrected gate as an
            // exact correction factor rather than a σ₁ conjugation.
            let a = three_atom_assembly(GateTarget::A)?;
            let frame_conjugated = QubitGate::exact(
                "frame-corrected half pulse (C)",
                a.frame_conjugated.matrix().dot(half_pulse.matrix()),
            );
            let wlast = kron(&kron(&id2, &id2), &w);
            let cnot = QubitGate::exact(
                "CNOT(1->3)",
                wlast.dot(frame_conjugated.matrix()).dot(&wlast),
            );
            Ok(ThreeAtomAssembly {
                variant,
                half_pulse,
                frame_conjugated,
                cnot,
                control: 1,
                target: 3,
            })
        }
        other => Err(Error::InvalidParams {
            reason: format!("no three-atom assembly for gate {other}"),
        }),
    }
}

/// The final controlled NOT of a three-atom variant.
pub fn assemble_three(variant: GateTarget) -> Result<QubitGate> {
    Ok(three_atom_assembly(variant)?.cnot)
}

/// `V = ½[[1+i,1−i],[1−i,1+i]]`: the unitary square root of σ₁ with
/// exact dyadic entries. It fixes the symmetric combination of the two
/// basis states and multiplies the antisymmetric one by `i`.
pub fn sqrt_not() -> CMat {
    CMat::from_shape_vec(
        (2, 2),
        vec![
            C64::new(0.5, 0.5),
            C64::new(0.5, -0.5),
            C64::new(0.5, -0.5),
            C64::new(0.5, 0.5),
        ],
    )
    .expect("entry count matches shape")
}

/// The unitary fourth root of σ₁ with the same symmetric structure:
/// it acts as 1 on the symmetric combination and as `e^{iπ/4}` on the
/// antisymmetric one, so its square is exactly [`sqrt_not`] and its
/// fourth power is σ₁.
pub fn fourth_root_not() -> CMat {
    let lam = C64::new(0.0, FRAC_PI_4).exp();
    let one = C64::new(1.0, 0.0);
    let a = (one + lam) * 0.5;
    let b = (one - lam) * 0.5;
    CMat::from_shape_vec((2, 2), vec![a, b, b, a]).expect("entry count matches shape")
}

/// The matrices of the five-gate controlled-controlled-NOT circuit.
#[derive(Debug, Clone)]
pub struct CcnotAssembly {
    /// Square root of NOT used by the controlled-V factors.
    pub v: CMat,
    pub controlled_v_13: QubitGate,
    pub controlled_v_23: QubitGate,
    pub controlled_v_dagger_23: QubitGate,
    /// `CNOT(1→2) ⊗ I₂` in its exact integer form; the variant-A
    /// assembly reproduces this matrix to 1 ulp.
    pub cnot_12: QubitGate,
    /// The five-gate product (rightmost factor acts first):
    /// `CNOT₁₂ · C_V†(2,3) · CNOT₁₂ · C_V(2,3) · C_V(1,3) = I₆ ⊕ σ₁`.
    pub ccnot: QubitGate,
}

/// Assembles the controlled-controlled NOT from two controlled-V
/// gates, a controlled-V†, and two interleaved CNOTs: the target atom
/// accumulates `V^{b₁+b₂−(b₁⊕b₂)} = V^{2·b₁b₂}`, which is σ₁ exactly
/// when both controls are set and the identity otherwise.
pub fn ccnot_assembly() -> CcnotAssembly {
    let v = sqrt_not();
    let sig1 = pauli(AtomOp::Sigma1);
    let controlled_v_13 = QubitGate::exact(
        "C_V(1,3)",
        controlled(&v, 1, 3, 3).expect("indices are valid"),
    );
    let controlled_v_23 = QubitGate::exact(
        "C_V(2,3)",
        controlled(&v, 2, 3, 3).expect("indices are valid"),
    );
    let controlled_v_dagger_23 = QubitGate::exact(
        "C_Vdagger(2,3)",
        controlled(&dagger(&v), 2, 3, 3).expect("indices are valid"),
    );
    let cnot_12 = QubitGate::exact(
        "CNOT(1->2) x I",
        controlled(&sig1, 1, 2, 3).expect("indices are valid"),
    );
    let ccnot = QubitGate::exact(
        "CCNOT",
        cnot_12
            .matrix()
            .dot(controlled_v_dagger_23.matrix())
            .dot(cnot_12.matrix())
            .dot(controlled_v_23.matrix())
            .dot(controlled_v_13.matrix()),
    );
    CcnotAssembly {
        v,
        controlled_v_13,
        controlled_v_23,
        controlled_v_dagger_23,
        cnot_12,
        ccnot,
    }
}

/// The controlled-controlled NOT `I₆ ⊕ σ₁` from the five-gate circuit.
pub fn assemble_ccnot() -> QubitGate {
    ccnot_assembly().ccnot
}

/// Gate-algebra composition of the thirteen-gate four-qubit ladder:
/// controlled fourth roots of σ₁ on the target interleaved with CNOTs
/// among the three controls in Gray-code order — the pattern
/// `(1,2),(1,2),(2,3),(1,3),(2,3),(1,3)` — so every basis state
/// accumulates a net `V` power of zero except the all-ones state,
/// which collects `V⁴ = σ₁`. The result is the
/// controlled-controlled-controlled NOT `I₁₄ ⊕ σ₁`.
pub fn cccnot_identity_check() -> QubitGate {
    let v = fourth_root_not();
    let vd = dagger(&v);
    let sig1 = pauli(AtomOp::Sigma1);
    let c = |u: &CMat, control: usize, target: usize| {
        controlled(u, control, target, 4).expect("indices are valid")
    };
    let sequence = [
        c(&v, 1, 4),
        c(&sig1, 1, 2),
        c(&vd, 2, 4),
        c(&sig1, 1, 2),
        c(&v, 2, 4),
        c(&sig1, 2, 3),
        c(&vd, 3, 4),
        c(&sig1, 1, 3),
        c(&v, 3, 4),
        c(&sig1, 2, 3),
        c(&vd, 3, 4),
        c(&sig1, 1, 3),
        c(&v, 3, 4),
    ];
    let mut acc = identity(16);
    for gate in &sequence {
        acc = gate.dot(&acc);
    }
    QubitGate::exact("CCCNOT", acc)
}

/// Phase-invariant overlap `|tr(u†v)|/d` between two same-dimension
/// matrices: equals 1 exactly when the two unitaries agree up to a
/// global phase.
pub fn gate_fidelity(u: &CMat, v: &CMat) -> Result<f64> {
    if u.nrows() != u.ncols() || v.nrows() != v.ncols() || u.nrows() != v.nrows() {
        return Err(Error::Dimension {
            context: "gate fidelity",
            left: u.nrows(),
            right: v.nrows(),
        });
    }
    let d = u.nrows();
    let mut tr = C64::new(0.0, 0.0);
    for j in 0..d {
        for i in 0..d {
            tr += u[(i, j)].conj() * v[(i, j)];
        }
    }
    Ok(tr.norm() / d as f64)
}

/// Closed-form single-atom propagator
/// `exp{−it [[θ/2, h], [h, −θ/2]]}`: entries
/// `cos(tE) ∓ i(θ/2)·sin(tE)/E` on the diagonal and `−ih·sin(tE)/E`
/// off it, with `E = √(θ²/4 + h²)` (and `sin(tE)/E → t` as `E → 0`).
pub fn appendix_single_qubit(theta: f64, h: f64, t: f64) -> QubitGate {
    let e = (0.25 * theta * theta + h * h).sqrt();
    let (c, sinc) = if e == 0.0 {
        (1.0, t)
    } else {
        ((t * e).cos(), (t * e).sin() / e)
    };
    let half_theta = 0.5 * theta;
    let mut m = CMat::zeros((2, 2));
    m[(0, 0)] = C64::new(c, -half_theta * sinc);
    m[(0, 1)] = C64::new(0.0, -h * sinc);
    m[(1, 0)] = C64::new(0.0, -h * sinc);
    m[(1, 1)] = C64::new(c, half_theta * sinc);
    QubitGate::exact("single-atom pulse", m)
}

/// The free/pulse/free single-atom sequence that composes to the
/// Walsh–Hadamard gate, with its designed times and phase.
#[derive(Debug, Clone)]
pub struct WalshHadamardSequence {
    /// Level splitting of the driven atom.
    pub delta: f64,
    /// Resonant drive amplitude.
    pub h: f64,
    /// End of the first free segment: `3π/(2Δ)`.
    pub t1: f64,
    /// End of the resonant pulse: `t1 + π/(4h)`.
    pub t2: f64,
    /// End of the final free segment: `t2 + 3π/(2Δ)`.
    pub t3: f64,
    /// Drive phase `φ = −Δ·(t2−t1)`, chosen so the pulse's frame
    /// phase factor `e^{−i(Δ(t2−t1)+φ)}` is exactly 1.
    pub phi: f64,
    /// Free evolution over `3π/(2Δ)` in the resonant rotating frame:
    /// `diag(1, e^{−iΔt}) = diag(1, i)`.
    pub free_segment: QubitGate,
    /// The quarter-Rabi-cycle pulse with its frame factor neutralized:
    /// `(1/√2)[[1,−i],[−i,1]]`.
    pub pulse_segment: QubitGate,
    /// `free · pulse · free = W`, exactly.
    pub product: QubitGate,
}

/// Designs the three-segment single-atom sequence whose product is the
/// Walsh–Hadamard gate: free evolution for `3π/(2Δ)`, a resonant
/// quarter-Rabi pulse of duration `π/(4h)` with drive phase
/// `−Δ·π/(4h)`, and another free segment of `3π/(2Δ)`. Global phases
/// are discarded throughout, as everywhere else in this module.
pub fn walsh_hadamard_sequence(delta: f64, h: f64) -> Result<WalshHadamardSequence> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParams {
            reason: format!("level splitting must be positive and finite, got {delta}"),
        });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParams {
            reason: format!("drive amplitude must be positive and finite, got {h}"),
        });
    }
    let free_span = 1.5 * PI / delta;
    let pulse_span = FRAC_PI_4 / h;
    let t1 = free_span;
    let t2 = t1 + pulse_span;
    let t3 = t2 + free_span;
    let phi = -(delta * pulse_span);

    // Δ·t over a free span is 3π/2 by construction, so the closed form
    // of diag(1, e^{−iΔt}) is diag(1, i).
    let mut free = CMat::zeros((2, 2));
    free[(0, 0)] = C64::new(1.0, 0.0);
    free[(1, 1)] = C64::i();
    let free_segment = QubitGate::exact("free segment", free);

    // The pulse area h·(t2−t1) is π/4 by construction, so the rotation
    // factor is (1/√2)[[1,−i],[−i,1]]; the frame factor multiplies its
    // second row and is exactly 1 because the phase argument cancels.
    let frame_factor = C64::new(0.0, -(delta * pulse_span + phi)).exp();
    let s = FRAC_1_SQRT_2;
    let mut pulse = CMat::zeros((2, 2));
    pulse[(0, 0)] = C64::new(s, 0.0);
    pulse[(0, 1)] = C64::new(0.0, -s);
    pulse[(1, 0)] = C64::new(0.0, -s) * frame_factor;
    pulse[(1, 1)] = C64::new(s, 0.0) * frame_factor;
    let pulse_segment = QubitGate::exact("resonant quarter pulse", pulse);

    let product = QubitGate::exact(
        "Walsh-Hadamard",
        free_segment
            .matrix()
            .dot(pulse_segment.matrix())
            .dot(free_segment.matrix()),
    );
    Ok(WalshHadamardSequence {
        delta,
        h,
        t1,
        t2,
        t3,
        phi,
        free_segment,
        pulse_segment,
        product,
    })
}

/// The Walsh–Hadamard gate produced by the free/pulse/free sequence.
/// The product is parameter-independent, so this evaluates the
/// sequence at a representative `(Δ, h)`.
pub fn appendix_walsh_hadamard() -> QubitGate {
    walsh_hadamard_sequence(1.0, 0.25)
        .expect("representative parameters are valid")
        .product
}
