//! Exactly reduced weak-coupling generators on the zero-photon sector.
//!
//! With the cavity on resonance and the atoms driven weakly, the
//! interaction-picture Schrödinger equation closes (up to terms carrying
//! the small drive amplitudes into excited photon states) on the
//! zero-photon amplitudes of the collective atomic basis. The resulting
//! generator `X(t)` — `i φ̇ = X(t) φ` — has matrix elements that are
//! finite sums of oscillating terms, each a drive phasor times
//! trigonometric functions of `tg√k`. This module builds those elements
//! symbolically ([`TermSum`]), checks them against an independent numeric
//! projection, and applies the rotating-wave filter that isolates a
//! single secular transition per resonance condition.

use crate::decomp::t_matrix;
use crate::error::{Error, Result};
use crate::expm::oracle_expm;
use crate::model::{drive_rotated, ModelParams};
use crate::operators::{coupling_operator, dagger, embed_atom, FockTruncation};
use crate::pulses::ResonanceCondition;
use crate::terms::{TermSum, MAX_DRIVES};
use crate::{C64, CMat};

/// Rotating-wave keep window, relative to `g`: a term survives the
/// filter when its residual frequency satisfies `|θ'| < RWA_KEEP_EPS·g`.
pub const RWA_KEEP_EPS: f64 = 1e-9;

/// Dropped terms with `|θ'| < RWA_WARN_FACTOR · RWA_KEEP_EPS · g` are
/// reported as near-secular: close enough to the keep window that the
/// filter decision deserves a second look.
pub const RWA_WARN_FACTOR: f64 = 100.0;

/// The reduced zero-photon generator `X(t)` with symbolic entries.
#[derive(Debug, Clone)]
pub struct ReducedGenerator {
    dim: usize,
    /// Row-major `dim × dim` table of entry term sums.
    entries: Vec<TermSum>,
    /// Parameters the entries were built from.
    pub params: ModelParams,
}

impl ReducedGenerator {
    /// Dimension of the collective basis (4 for two atoms, 8 for three).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Symbolic entry `X_ij` (0-based indices).
    pub fn entry(&self, i: usize, j: usize) -> &TermSum {
        assert!(i < self.dim && j < self.dim, "entry index out of range");
        &self.entries[i * self.dim + j]
    }

    /// Numeric value `X(t)`.
    pub fn evaluate(&self, t: f64) -> CMat {
        let d = self.dim;
        let mut m = CMat::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.entries[i * d + j].evaluate(t);
            }
        }
        m
    }

    /// Columns with nonzero symbolic entries in each row.
    pub fn nonzero_pattern(&self) -> Vec<Vec<usize>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .filter(|&j| !self.entries[i * self.dim + j].is_empty())
                    .collect()
            })
            .collect()
    }
}

/// `f(k) = (cos(√(2(2k+1)) g t) - 1)/2` — the two-atom diagonal factor.
fn two_atom_f(k: usize, g: f64) -> TermSum {
    let w = (2.0 * (2 * k + 1) as f64).sqrt() * g;
    TermSum::cosine(w)
        .add(&TermSum::constant(-1.0))
        .scale_re(0.5)
}

/// `h(k) = sin(√(2(2k+1)) g t)/√(2k+1)` — the two-atom cross factor.
fn two_atom_h(k: usize, g: f64) -> TermSum {
    let w = (2.0 * (2 * k + 1) as f64).sqrt() * g;
    TermSum::sine(w).scale_re(1.0 / ((2 * k + 1) as f64).sqrt())
}

fn phasors(params: &ModelParams) -> [TermSum; MAX_DRIVES] {
    let mut out = [TermSum::zero(), TermSum::zero(), TermSum::zero()];
    for (j, slot) in out.iter_mut().enumerate() {
        let d = params.drive(j + 1);
        *slot = TermSum::drive_phasor(j + 1, d.h, d.omega + params.omega, d.phi);
    }
    out
}

/// Reduced generator for two atoms on the 4-dimensional collective basis
/// (singlet, then triplet `m = 1, 0, -1`).
pub fn reduced_generator_two(params: &ModelParams) -> Result<ReducedGenerator> {
    params.validate()?;
    params.require_cavity_resonance()?;
    if params.drives.len() > 2 {
        return Err(Error::DriveIndex {
            index: params.drives.len(),
            n_drives: 2,
        });
    }
    let g = params.g;
    let eps = RWA_KEEP_EPS * g;
    let [p, q, _] = phasors(params);
    let f0 = two_atom_f(0, g);
    let f1 = two_atom_f(1, g);
    let h0 = two_atom_h(0, g);
    let h1 = two_atom_h(1, g);
    let one = TermSum::constant(1.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;

    let x14 = p.sub(&q).scale_re(s);
    let x21 = q
        .sub(&p)
        .scale_re(s)
        .mul(&one.add(&f1.scale_re(2.0 / 3.0)));
    let inner23 = one
        .add(&f0.scale_re(2.0))
        .add(&f1.scale_re(2.0 / 3.0))
        .add(&f0.mul(&f1).scale_re(4.0 / 3.0))
        .add(&h0.mul(&h1));
    let x23 = p.add(&q).scale_re(s).mul(&inner23);
    let x34 = p.add(&q).scale_re(s).mul(&one.add(&f0.scale_re(2.0)));

    let mut entries = vec![TermSum::zero(); 16];
    let mut put = |i: usize, j: usize, v: TermSum| entries[i * 4 + j] = v.normalized(eps);
    put(0, 1, x21.conj());
    put(0, 3, x14.clone());
    put(1, 0, x21);
    put(1, 2, x23.clone());
    put(2, 1, x23.conj());
    put(2, 3, x34.clone());
    put(3, 0, x14.conj());
    put(3, 2, x34.conj());

    Ok(ReducedGenerator {
        dim: 4,
        entries,
        params: params.clone(),
    })
}

/// Reduced generator for three atoms on the 8-dimensional collective
/// basis (two spin-1/2 doublets, then the spin-3/2 quartet).
pub fn reduced_generator_three(params: &ModelParams) -> Result<ReducedGenerator> {
    params.validate()?;
    params.require_cavity_resonance()?;
    let g = params.g;
    let eps = RWA_KEEP_EPS * g;
    let [p, q, r] = phasors(params);

    // Scalar time factors (all frequencies in units of g).
    let s73 = 73f64.sqrt();
    let wp = (10.0 + s73).sqrt();
    let wm = (10.0 - s73).sqrt();
    let c1 = TermSum::cosine(g);
    let s1 = TermSum::sine(g);
    let f0 = TermSum::cosine(3f64.sqrt() * g);
    let f1 = TermSum::cosine(10f64.sqrt() * g)
        .scale_re(2.0 / 5.0)
        .add(&TermSum::constant(3.0 / 5.0));
    let f2 = TermSum::cosine(wp * g)
        .scale_re((-7.0 + s73) / (2.0 * s73))
        .add(&TermSum::cosine(wm * g).scale_re((7.0 + s73) / (2.0 * s73)));
    let big_f0 = TermSum::sine(3f64.sqrt() * g).scale_re(1.0 / 3f64.sqrt());
    let big_f1 = TermSum::sine(wp * g)
        .scale_re((1.0 + s73) / (2.0 * s73 * wp))
        .sub(&TermSum::sine(wm * g).scale_re((1.0 - s73) / (2.0 * s73 * wm)));
    let big_h1 = TermSum::sine(10f64.sqrt() * g).scale_re(1.0 / 10f64.sqrt());
    let h1_1 = TermSum::cosine(10f64.sqrt() * g)
        .add(&TermSum::constant(-1.0))
        .scale_re(0.1);
    let h1_2 = TermSum::cosine(wp * g)
        .sub(&TermSum::cosine(wm * g))
        .scale_re(1.0 / (2.0 * s73));

    // Shared drive combinations.
    let qmr = q.sub(&r);
    let sum3 = p.add(&q).add(&r);
    let two_p = p.scale_re(2.0).sub(&q).sub(&r); // 2p - q - r

    // Shared scalar products.
    let mix01 = f0.mul(&c1).add(&big_f0.mul(&s1).scale_re(3.0)); // f₀C + 3F₀S
    let mix2 = c1.mul(&f2).add(&s1.mul(&big_f1)); // Cf₂ + SF₁
    let mix12 = f1
        .mul(&f2)
        .add(&big_h1.mul(&big_f1).scale_re(4.0))
        .add(&h1_1.mul(&h1_2).scale_re(24.0)); // f₁f₂ + 4H₁F₁ + 24h₁h₁
    let mix01b = f0.mul(&f1).add(&big_f0.mul(&big_h1).scale_re(3.0)); // f₀f₁ + 3F₀H₁

    let rt2 = std::f64::consts::SQRT_2;
    let rt3 = 3f64.sqrt();
    let rt6 = 6f64.sqrt();

    let x12 = p.mul(&c1);
    let x14 = qmr.scale_re(1.0 / rt3).mul(&c1);
    let x17 = qmr.scale_re(1.0 / rt6).mul(&mix01);
    let x28 = qmr.scale_re(1.0 / rt2);
    let x32 = qmr.scale_re(1.0 / rt3).mul(&c1);
    let x34 = q
        .add(&r)
        .scale_re(2.0)
        .sub(&p)
        .scale_re(1.0 / 3.0)
        .mul(&c1);
    let x37 = two_p.scale_re(1.0 / (3.0 * rt2)).mul(&mix01);
    let x48 = two_p.scale_re(1.0 / rt6);
    let x51 = qmr.scale_re(-1.0 / rt2).mul(&mix2);
    let x53 = two_p.scale_re(-1.0 / rt6).mul(&mix2);
    let x56 = sum3.scale_re(1.0 / rt3).mul(&mix12);
    let x62 = qmr.scale_re(-1.0 / rt6).mul(&f1);
    let x64 = two_p.scale_re(-1.0 / (3.0 * rt2)).mul(&f1);
    let x67 = sum3.scale_re(2.0 / 3.0).mul(&mix01b);
    let x78 = sum3.scale_re(1.0 / rt3).mul(&f0);

    let mut entries = vec![TermSum::zero(); 64];
    let mut put = |i: usize, j: usize, v: TermSum| entries[i * 8 + j] = v.normalized(eps);
    put(0, 1, x12.clone());
    put(0, 3, x14.clone());
    put(0, 4, x51.conj());
    put(0, 6, x17.clone());
    put(1, 0, x12.conj());
    put(1, 2, x32.conj());
    put(1, 5, x62.conj());
    put(1, 7, x28.clone());
    put(2, 1, x32);
    put(2, 3, x34.clone());
    put(2, 4, x53.conj());
    put(2, 6, x37.clone());
    put(3, 0, x14.conj());
    put(3, 2, x34.conj());
    put(3, 5, x64.conj());
    put(3, 7, x48.clone());
    put(4, 0, x51);
    put(4, 2, x53);
    put(4, 5, x56.clone());
    put(5, 1, x62);
    put(5, 3, x64);
    put(5, 4, x56.conj());
    put(5, 6, x67.clone());
    put(6, 0, x17.conj());
    put(6, 2, x37.conj());
    put(6, 5, x67.conj());
    put(6, 7, x78.clone());
    put(7, 1, x28.conj());
    put(7, 3, x48.conj());
    put(7, 6, x78.conj());

    Ok(ReducedGenerator {
        dim: 8,
        entries,
        params: params.clone(),
    })
}

/// Reduced generator for `n` atoms.
pub fn reduced_generator(n: usize, params: &ModelParams) -> Result<ReducedGenerator> {
    match n {
        2 => reduced_generator_two(params),
        3 => reduced_generator_three(params),
        _ => Err(Error::AtomCount {
            n_atoms: n,
            context: "reduced generator (2 or 3 atoms)",
        }),
    }
}

/// Independent numeric value of the reduced generator: conjugate the
/// rotated drive by `exp(±itgA_n)` computed with the general-purpose
/// matrix exponential (no closed forms involved), project onto the
/// zero-photon sector and rotate into the collective basis.
///
/// The coupling conserves excitation number, so for `n ≤ 3` every matrix
/// element entering the projection is untouched by Fock truncation once
/// `n_max ≥ 4`; the result is then exact to rounding.
pub fn numeric_reduced_generator(
    n: usize,
    params: &ModelParams,
    tr: FockTruncation,
    t: f64,
) -> Result<CMat> {
    params.require_cavity_resonance()?;
    let d = 1usize << n;
    let p_dim = tr.dim();
    let a = coupling_operator(n, tr)?;
    let scale = C64::new(0.0, t * params.g);
    let e_plus = oracle_expm(&a.data, scale)?;
    let e_minus = oracle_expm(&a.data, -scale)?;
    let v = embed_atom(&drive_rotated(n, params, t)?, tr);
    let f = e_plus.dot(&v).dot(&e_minus);
    let mut photon0 = CMat::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            photon0[(i, j)] = f[(i * p_dim, j * p_dim)];
        }
    }
    let t_mat = t_matrix(n)?;
    Ok(dagger(&t_mat).dot(&photon0).dot(&t_mat))
}

/// One oscillating term classified by the rotating-wave filter.
#[derive(Debug, Clone, Copy)]
pub struct SecularTerm {
    /// 0-based entry position in the reduced generator.
    pub row: usize,
    pub col: usize,
    /// Constant value `c·e^{iφ}` the term contributes once its residual
    /// frequency is dropped.
    pub amplitude: C64,
    /// Residual frequency `θ'` after imposing the resonance condition
    /// exactly through the term's drive provenance.
    pub residual: f64,
    /// Units of each drive's phase carried by the term.
    pub drive_units: [i8; MAX_DRIVES],
}

/// Result of the rotating-wave filter at a resonance condition.
#[derive(Debug, Clone)]
pub struct FilteredGenerator {
    /// The constant (time-independent) generator kept by the filter.
    pub matrix: CMat,
    /// Terms inside the keep window.
    pub survivors: Vec<SecularTerm>,
    /// Dropped terms uncomfortably close to the keep window.
    pub near_secular: Vec<SecularTerm>,
    /// Total `Σ|c|` over dropped terms — the weight the rotating-wave
    /// approximation discards.
    pub dropped_weight: f64,
    /// Smallest `|θ'|` among dropped terms (the spectral gap protecting
    /// the approximation); infinite when nothing was dropped.
    pub min_dropped_residual: f64,
    /// True when no term survived: the condition hit no resonance.
    pub all_filtered: bool,
}

/// Apply the rotating-wave filter: impose `Ω_j + ω = κg` exactly for the
/// condition's drive (through each term's phase provenance, so floating-
/// point placement of `Ω_j` in the parameters cannot blur the decision),
/// keep terms with residual frequency inside the keep window, and drop
/// the rest.
pub fn rwa_filter(
    gen: &ReducedGenerator,
    condition: &ResonanceCondition,
) -> Result<FilteredGenerator> {
    let j = condition.drive_index;
    if j == 0 || j > MAX_DRIVES {
        return Err(Error::DriveIndex {
            index: j,
            n_drives: MAX_DRIVES,
        });
    }
    let g = gen.params.g;
    let eps = RWA_KEEP_EPS * g;
    let warn = RWA_WARN_FACTOR * eps;
    let drive = gen.params.drive(j);
    // Exact frequency shift carried by one unit of drive-j provenance.
    let shift = condition.kappa.value() * g - (drive.omega + gen.params.omega);

    let d = gen.dim;
    let mut matrix = CMat::zeros((d, d));
    let mut survivors = Vec::new();
    let mut near_secular = Vec::new();
    let mut dropped_weight = 0.0f64;
    let mut min_dropped = f64::INFINITY;
    for row in 0..d {
        for col in 0..d {
            for term in &gen.entry(row, col).terms {
                let units = term.phase_src[j - 1] as f64;
                let residual = term.freq + units * shift;
                let classified = SecularTerm {
                    row,
                    col,
                    amplitude: term.amp * C64::new(0.0, term.phase).exp(),
                    residual,
                    drive_units: term.phase_src,
                };
                if residual.abs() < eps {
                    matrix[(row, col)] += classified.amplitude;
                    survivors.push(classified);
                } else {
                    dropped_weight += term.amp.norm();
                    min_dropped = min_dropped.min(residual.abs());
                    if residual.abs() < warn {
                        near_secular.push(classified);
                    }
                }
            }
        }
    }
    let all_filtered = survivors.is_empty();
    Ok(FilteredGenerator {
        matrix,
        survivors,
        near_secular,
        dropped_weight,
        min_dropped_residual: min_dropped,
        all_filtered,
    })
}
