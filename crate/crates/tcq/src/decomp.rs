//! Collective-spin block decomposition of the atom-photon coupling and
//! closed-form exponentials of each block.
//!
//! The coupling `A_n = S₊⊗a + S₋⊗a†` commutes with total spin, so an
//! orthogonal change of basis `T` on the atomic factor brings it to block
//! diagonal form:
//!
//! - `n = 2`: `T† A₂ T = 0 ⊕ B₁` (spin 0 and spin 1),
//! - `n = 3`: `T† A₃ T = B_½ ⊕ B_½ ⊕ B_{3/2}`.
//!
//! Each block `B_s` is tridiagonal in the spin index with photon ladder
//! operators as entries, and its exponential `exp(-itg B_s)` has a closed
//! form: every matrix entry is a scalar function of the photon number
//! times a power of `a` or `a†`. This module hard-codes those scalar
//! functions, exposes dense builders for the exponentials, and publishes
//! the entry tables so the integrator can evaluate the same closed forms
//! without forming dense matrices.
//!
//! All scalar functions are evaluated with analytic continuation: where an
//! eigenvalue argument `λ` of the spin-3/2 quadratic form goes negative,
//! `cos(tg√λ)` continues to `cosh`, and `sin(tg√λ)/√λ` to `sinh`; terms
//! whose algebraic prefactor vanishes are skipped before evaluation so the
//! hyperbolic branches never contaminate finite results.

use crate::error::{Error, Result};
use crate::operators::{annihilation, creation, dagger, identity, FockTruncation};
use crate::{C64, CMat};
use ndarray::linalg::kron;

/// Spin content of one block of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinLabel {
    /// One-dimensional spin-0 block (the coupling restricted to it is 0).
    Scalar,
    /// Spin-1/2 doublet, coupling `[[0, a], [a†, 0]]`.
    Half,
    /// Spin-1 triplet, coupling `√2 (J₊⊗a + J₋⊗a†)`.
    One,
    /// Spin-3/2 quartet with couplings `√3, 2, √3` on the off-diagonals.
    ThreeHalf,
}

impl SpinLabel {
    /// Number of spin states in the block.
    pub fn size(&self) -> usize {
        match self {
            SpinLabel::Scalar => 1,
            SpinLabel::Half => 2,
            SpinLabel::One => 3,
            SpinLabel::ThreeHalf => 4,
        }
    }
}

/// One block of the decomposition: its spin label and where its slots sit
/// in the transformed atomic basis.
#[derive(Debug, Clone, Copy)]
pub struct SpinBlock {
    pub label: SpinLabel,
    /// First transformed-basis slot belonging to the block.
    pub offset: usize,
    /// Number of slots (equals `label.size()`).
    pub size: usize,
}

/// Orthogonal change of basis and block layout for `n ∈ {2, 3}` atoms.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    /// Real orthogonal matrix with the collective-spin states as columns;
    /// transformed coordinates are `φ = T† ψ`.
    pub t: CMat,
    /// Blocks in column order.
    pub blocks: Vec<SpinBlock>,
}

/// Change-of-basis matrix `T` for `n ∈ {1, 2, 3}` atoms (identity for one
/// atom, where the coupling is already a single spin-1/2 block).
pub fn t_matrix(n: usize) -> Result<CMat> {
    let r = |x: f64| C64::new(x, 0.0);
    match n {
        1 => Ok(identity(2)),
        2 => {
            let s = 1.0 / 2f64.sqrt();
            let mut t = CMat::zeros((4, 4));
            // Columns: singlet, then triplet (m = 1, 0, -1).
            t[(0, 1)] = r(1.0);
            t[(1, 0)] = r(s);
            t[(1, 2)] = r(s);
            t[(2, 0)] = r(-s);
            t[(2, 2)] = r(s);
            t[(3, 3)] = r(1.0);
            Ok(t)
        }
        3 => {
            let a = 1.0 / 2f64.sqrt();
            let b = 1.0 / 6f64.sqrt();
            let c = 1.0 / 3f64.sqrt();
            let d = (2f64 / 3.0).sqrt();
            let mut t = CMat::zeros((8, 8));
            // Columns: two spin-1/2 doublets, then the spin-3/2 quartet.
            let rows: [[f64; 8]; 8] = [
                [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                [a, 0.0, b, 0.0, 0.0, c, 0.0, 0.0],
                [-a, 0.0, b, 0.0, 0.0, c, 0.0, 0.0],
                [0.0, 0.0, 0.0, d, 0.0, 0.0, c, 0.0],
                [0.0, 0.0, -d, 0.0, 0.0, c, 0.0, 0.0],
                [0.0, a, 0.0, -b, 0.0, 0.0, c, 0.0],
                [0.0, -a, 0.0, -b, 0.0, 0.0, c, 0.0],
                [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            ];
            for (i, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    t[(i, j)] = r(*v);
                }
            }
            Ok(t)
        }
        _ => Err(Error::AtomCount {
            n_atoms: n,
            context: "t_matrix",
        }),
    }
}

/// Block decomposition for `n ∈ {2, 3}` atoms.
pub fn decomposition(n: usize) -> Result<BlockDecomposition> {
    let t = t_matrix(n)?;
    let blocks = match n {
        2 => vec![
            SpinBlock {
                label: SpinLabel::Scalar,
                offset: 0,
                size: 1,
            },
            SpinBlock {
                label: SpinLabel::One,
                offset: 1,
                size: 3,
            },
        ],
        3 => vec![
            SpinBlock {
                label: SpinLabel::Half,
                offset: 0,
                size: 2,
            },
            SpinBlock {
                label: SpinLabel::Half,
                offset: 2,
                size: 2,
            },
            SpinBlock {
                label: SpinLabel::ThreeHalf,
                offset: 4,
                size: 4,
            },
        ],
        _ => {
            return Err(Error::AtomCount {
                n_atoms: n,
                context: "decomposition",
            })
        }
    };
    Ok(BlockDecomposition { t, blocks })
}

/// Layout of the blocks for a given atom count (shared with the builders
/// that do not need the `T` matrix).
pub(crate) fn block_labels(n: usize) -> Result<Vec<SpinLabel>> {
    match n {
        1 => Ok(vec![SpinLabel::Half]),
        2 => Ok(vec![SpinLabel::Scalar, SpinLabel::One]),
        3 => Ok(vec![SpinLabel::Half, SpinLabel::Half, SpinLabel::ThreeHalf]),
        _ => Err(Error::AtomCount {
            n_atoms: n,
            context: "block_labels",
        }),
    }
}

// ---------------------------------------------------------------------------
// Scalar coefficient functions.
// ---------------------------------------------------------------------------

/// `cos(x√λ)` continued to `cosh` for negative `λ`.
fn cosw(lambda: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-12;
    if lambda > EPS {
        (x * lambda.sqrt()).cos()
    } else if lambda < -EPS {
        (x * (-lambda).sqrt()).cosh()
    } else {
        1.0
    }
}

/// `sin(x√λ)/√λ` continued to `sinh` for negative `λ` (limit `x` at 0).
fn sincw(lambda: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-12;
    if lambda > EPS {
        let s = lambda.sqrt();
        (x * s).sin() / s
    } else if lambda < -EPS {
        let s = (-lambda).sqrt();
        (x * s).sinh() / s
    } else {
        x * (1.0 - lambda * x * x / 6.0)
    }
}

/// `√λ · sin(x√λ)` continued for negative `λ` (limit `λx` at 0).
fn sqsin(lambda: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-12;
    if lambda > EPS {
        let s = lambda.sqrt();
        s * (x * s).sin()
    } else if lambda < -EPS {
        let s = (-lambda).sqrt();
        -s * (x * s).sinh()
    } else {
        lambda * x
    }
}

/// Skip-on-zero product: avoids `0 × ∞` when an algebraic prefactor
/// vanishes exactly while the continued branch diverges.
#[inline]
fn zterm(coeff: f64, value: f64) -> f64 {
    if coeff == 0.0 {
        0.0
    } else {
        coeff * value
    }
}

/// Eigenvalues `λ±(N) = 5N ± √(16N² + 9)` of the spin-3/2 quadratic form
/// restricted to an excitation sector.
pub fn lambda_pm(nn: i64) -> (f64, f64) {
    let n = nn as f64;
    let sd = (16.0 * n * n + 9.0).sqrt();
    (5.0 * n + sd, 5.0 * n - sd)
}

/// All nine spin-3/2 scalar functions at integer argument `nn ≥ -1`.
///
/// Members whose defining combination hits a hyperbolic branch with a
/// nonvanishing prefactor can be infinite; the entry tables never read
/// those combinations (their minimal occurring arguments keep `λ± ≥ 0`).
#[derive(Debug, Clone, Copy)]
struct SpinThreeHalfFuncs {
    f2: f64,
    f1: f64,
    f0: f64,
    fm1: f64,
    h1: f64,
    big_f1: f64,
    big_f0: f64,
    big_h1: f64,
    big_h0: f64,
}

fn spin_three_half_funcs(nn: i64, x: f64) -> SpinThreeHalfFuncs {
    let n = nn as f64;
    let d = 16.0 * n * n + 9.0;
    let sd = d.sqrt();
    let lp = 5.0 * n + sd;
    let lm = 5.0 * n - sd;
    let vp = -2.0 * n - 3.0 + sd;
    let vm = -2.0 * n - 3.0 - sd;
    let wp = 2.0 * n - 3.0 + sd;
    let wm = 2.0 * n - 3.0 - sd;
    let cp = cosw(lp, x);
    let cm = cosw(lm, x);
    let sp = sincw(lp, x);
    let sm = sincw(lm, x);
    let qp = sqsin(lp, x);
    let qm = sqsin(lm, x);
    let den = 2.0 * sd;
    SpinThreeHalfFuncs {
        f2: (zterm(vp, cp) - zterm(vm, cm)) / den,
        f1: (zterm(wp, cp) - zterm(wm, cm)) / den,
        f0: (zterm(vp, cm) - zterm(vm, cp)) / den,
        fm1: (zterm(wp, cm) - zterm(wm, cp)) / den,
        h1: (cp - cm) / den,
        big_f1: (zterm(wp, sp) - zterm(wm, sm)) / den,
        big_f0: (zterm(vp, sm) - zterm(vm, sp)) / den,
        big_h1: (qp - qm) / den,
        big_h0: (sp - sm) / den,
    }
}

// ---------------------------------------------------------------------------
// Entry tables.
// ---------------------------------------------------------------------------

/// Parity of a scalar coefficient function under `t → -t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Parity {
    Even,
    Odd,
}

/// One entry of a closed-form block exponential: at row `(row, m)` and
/// column `(col, m + shift)` the value is
/// `coeff · funcs[func][m] · ladder_factor(m, shift)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlockEntry {
    pub row: usize,
    pub col: usize,
    pub shift: i64,
    pub coeff: C64,
    pub func: usize,
}

/// Entry table plus scalar-function metadata for one block kind.
#[derive(Debug, Clone)]
pub(crate) struct BlockSpec {
    pub label: SpinLabel,
    pub size: usize,
    pub entries: Vec<BlockEntry>,
    /// First row index for which each function table is filled.
    pub func_valid_from: Vec<usize>,
    pub func_parity: Vec<Parity>,
}

impl BlockSpec {
    pub fn n_funcs(&self) -> usize {
        self.func_valid_from.len()
    }
}

/// `⟨m+shift| ladder |m⟩`-style factor for the entry convention above:
/// for `shift ≥ 0` (a power of `a`) this is `√((m+1)⋯(m+shift))`; for
/// `shift < 0` (a power of `a†`) it is `√(m (m-1) ⋯ (m+shift+1))`.
#[inline]
pub(crate) fn ladder_factor(m: usize, shift: i64) -> f64 {
    let mut prod = 1.0f64;
    if shift >= 0 {
        for k in 1..=shift {
            prod *= (m as i64 + k) as f64;
        }
    } else {
        for k in 0..(-shift) {
            prod *= (m as i64 - k) as f64;
        }
    }
    prod.sqrt()
}

/// Entry table for one block kind. Function indices refer to the tables
/// produced by [`fill_funcvals`].
pub(crate) fn block_spec(label: SpinLabel) -> BlockSpec {
    let one = C64::new(1.0, 0.0);
    let ni = C64::new(0.0, -1.0);
    let s3 = 3f64.sqrt();
    let ns3i = C64::new(0.0, -s3);
    let ts3 = C64::new(2.0 * s3, 0.0);
    let n2i = C64::new(0.0, -2.0);
    let n6i = C64::new(0.0, -6.0);
    let e = |row, col, shift, coeff, func| BlockEntry {
        row,
        col,
        shift,
        coeff,
        func,
    };
    match label {
        SpinLabel::Scalar => BlockSpec {
            label,
            size: 1,
            // The coupling restricted to the singlet is zero, so the
            // exponential is the identity.
            entries: vec![e(0, 0, 0, one, 0)],
            func_valid_from: vec![0],
            func_parity: vec![Parity::Even],
        },
        SpinLabel::Half => {
            // exp(-itg B_½) = [[C(N+1), -i S(N+1) a], [-i S(N) a†, C(N)]]
            // with C(N) = cos(tg√N), S(N) = sin(tg√N)/√N.
            // Functions: 0: C(m+1), 1: S(m+1), 2: S(m), 3: C(m).
            BlockSpec {
                label,
                size: 2,
                entries: vec![
                    e(0, 0, 0, one, 0),
                    e(0, 1, 1, ni, 1),
                    e(1, 0, -1, ni, 2),
                    e(1, 1, 0, one, 3),
                ],
                func_valid_from: vec![0, 0, 0, 0],
                func_parity: vec![Parity::Even, Parity::Odd, Parity::Odd, Parity::Even],
            }
        }
        SpinLabel::One => {
            // exp(-itg B₁) with f(N) = (-1 + cos(tg√(2(2N+1))))/2 and
            // h(N) = sin(tg√(2(2N+1)))/√(2N+1):
            //   [[1 + (2N+2)/(2N+3) f(N+1), -i h(N+1) a, 2/(2N+3) f(N+1) a²],
            //    [-i h(N) a†, 1 + 2 f(N), -i h(N) a],
            //    [2/(2N-1) f(N-1) (a†)², -i h(N-1) a†, 1 + 2N/(2N-1) f(N-1)]]
            // Functions: 0: 1+(2m+2)/(2m+3)·f(m+1), 1: h(m+1),
            // 2: 2/(2m+3)·f(m+1), 3: h(m), 4: 1+2f(m), 5: 2/(2m-1)·f(m-1),
            // 6: h(m-1), 7: 1+2m/(2m-1)·f(m-1).
            BlockSpec {
                label,
                size: 3,
                entries: vec![
                    e(0, 0, 0, one, 0),
                    e(0, 1, 1, ni, 1),
                    e(0, 2, 2, one, 2),
                    e(1, 0, -1, ni, 3),
                    e(1, 1, 0, one, 4),
                    e(1, 2, 1, ni, 3),
                    e(2, 0, -2, one, 5),
                    e(2, 1, -1, ni, 6),
                    e(2, 2, 0, one, 7),
                ],
                func_valid_from: vec![0, 0, 0, 0, 0, 2, 1, 0],
                func_parity: vec![
                    Parity::Even,
                    Parity::Odd,
                    Parity::Even,
                    Parity::Odd,
                    Parity::Even,
                    Parity::Even,
                    Parity::Odd,
                    Parity::Even,
                ],
            }
        }
        SpinLabel::ThreeHalf => {
            // exp(-itg B_{3/2}) entry by entry; functions of the row
            // photon index m:
            //  0: f₂(m+2)   1: F₁(m+2)   2: h₁(m+2)   3: H₀(m+2)
            //  4: F₁(m+1)   5: f₁(m+1)   6: H₁(m+1)   7: h₁(m+1)
            //  8: h₁(m)     9: H₁(m)    10: f₀(m)    11: F₀(m)
            // 12: H₀(m-1)  13: h₁(m-1)  14: F₀(m-1)  15: f₋₁(m-1)
            BlockSpec {
                label,
                size: 4,
                entries: vec![
                    e(0, 0, 0, one, 0),
                    e(0, 1, 1, ns3i, 1),
                    e(0, 2, 2, ts3, 2),
                    e(0, 3, 3, n6i, 3),
                    e(1, 0, -1, ns3i, 4),
                    e(1, 1, 0, one, 5),
                    e(1, 2, 1, n2i, 6),
                    e(1, 3, 2, ts3, 7),
                    e(2, 0, -2, ts3, 8),
                    e(2, 1, -1, n2i, 9),
                    e(2, 2, 0, one, 10),
                    e(2, 3, 1, ns3i, 11),
                    e(3, 0, -3, n6i, 12),
                    e(3, 1, -2, ts3, 13),
                    e(3, 2, -1, ns3i, 14),
                    e(3, 3, 0, one, 15),
                ],
                func_valid_from: vec![0, 0, 0, 0, 1, 0, 0, 0, 2, 1, 0, 0, 3, 2, 1, 0],
                func_parity: vec![
                    Parity::Even,
                    Parity::Odd,
                    Parity::Even,
                    Parity::Odd,
                    Parity::Odd,
                    Parity::Even,
                    Parity::Odd,
                    Parity::Even,
                    Parity::Even,
                    Parity::Odd,
                    Parity::Even,
                    Parity::Odd,
                    Parity::Odd,
                    Parity::Even,
                    Parity::Odd,
                    Parity::Even,
                ],
            }
        }
    }
}

/// Fill the scalar-function tables for a block kind at `x = t·g`.
/// `vals[func][m]` holds the function of row photon index `m`; rows below
/// the function's validity range are zero (their entries do not exist).
pub(crate) fn fill_funcvals(label: SpinLabel, x: f64, p: usize, vals: &mut [Vec<f64>]) {
    match label {
        SpinLabel::Scalar => {
            for v in vals[0].iter_mut() {
                *v = 1.0;
            }
        }
        SpinLabel::Half => {
            for m in 0..p {
                let np1 = (m + 1) as f64;
                let rt1 = np1.sqrt();
                let (s1, c1) = (x * rt1).sin_cos();
                vals[0][m] = c1;
                vals[1][m] = s1 / rt1;
                let nn = m as f64;
                if m == 0 {
                    vals[2][m] = x;
                    vals[3][m] = 1.0;
                } else {
                    let rt0 = nn.sqrt();
                    let (s0, c0) = (x * rt0).sin_cos();
                    vals[2][m] = s0 / rt0;
                    vals[3][m] = c0;
                }
            }
        }
        SpinLabel::One => {
            // Shared tables f(k), h(k) for k = 0..=p.
            let mut f = vec![0.0f64; p + 1];
            let mut h = vec![0.0f64; p + 1];
            for (k, (fk, hk)) in f.iter_mut().zip(h.iter_mut()).enumerate() {
                let w = (2.0 * (2.0 * k as f64 + 1.0)).sqrt();
                let (s, c) = (x * w).sin_cos();
                *fk = (c - 1.0) / 2.0;
                *hk = s / (2.0 * k as f64 + 1.0).sqrt();
            }
            for m in 0..p {
                let mf = m as f64;
                vals[0][m] = 1.0 + (2.0 * mf + 2.0) / (2.0 * mf + 3.0) * f[m + 1];
                vals[1][m] = h[m + 1];
                vals[2][m] = 2.0 / (2.0 * mf + 3.0) * f[m + 1];
                vals[3][m] = h[m];
                vals[4][m] = 1.0 + 2.0 * f[m];
                vals[5][m] = if m >= 2 {
                    2.0 / (2.0 * mf - 1.0) * f[m - 1]
                } else {
                    0.0
                };
                vals[6][m] = if m >= 1 { h[m - 1] } else { 0.0 };
                // The m = 0 coefficient 2m/(2m-1) vanishes, leaving the
                // bare 1 without evaluating f(-1).
                vals[7][m] = if m == 0 {
                    1.0
                } else {
                    1.0 + 2.0 * mf / (2.0 * mf - 1.0) * f[m - 1]
                };
            }
        }
        SpinLabel::ThreeHalf => {
            // One evaluation per integer argument in -1..=p+1, then
            // distribute shifted views into the 16 tables.
            let args: Vec<SpinThreeHalfFuncs> = (-1..=(p as i64 + 1))
                .map(|nn| spin_three_half_funcs(nn, x))
                .collect();
            // args[k] holds argument nn = k - 1.
            let at = |nn: i64| &args[(nn + 1) as usize];
            for m in 0..p {
                let mi = m as i64;
                vals[0][m] = at(mi + 2).f2;
                vals[1][m] = at(mi + 2).big_f1;
                vals[2][m] = at(mi + 2).h1;
                vals[3][m] = at(mi + 2).big_h0;
                vals[4][m] = if m >= 1 { at(mi + 1).big_f1 } else { 0.0 };
                vals[5][m] = at(mi + 1).f1;
                vals[6][m] = at(mi + 1).big_h1;
                vals[7][m] = at(mi + 1).h1;
                vals[8][m] = if m >= 2 { at(mi).h1 } else { 0.0 };
                vals[9][m] = if m >= 1 { at(mi).big_h1 } else { 0.0 };
                vals[10][m] = at(mi).f0;
                vals[11][m] = at(mi).big_f0;
                vals[12][m] = if m >= 3 { at(mi - 1).big_h0 } else { 0.0 };
                vals[13][m] = if m >= 2 { at(mi - 1).h1 } else { 0.0 };
                vals[14][m] = if m >= 1 { at(mi - 1).big_f0 } else { 0.0 };
                vals[15][m] = at(mi - 1).fm1;
            }
        }
    }
}

/// Dense closed-form block exponential `exp(-itg B_label)` on
/// `size · (n_max + 1)` dimensions, basis `(spin slot, photon)` with the
/// photon index fastest.
fn assemble_block(label: SpinLabel, t: f64, g: f64, tr: FockTruncation) -> CMat {
    let spec = block_spec(label);
    let p = tr.dim();
    let x = t * g;
    let mut vals: Vec<Vec<f64>> = vec![vec![0.0; p]; spec.n_funcs()];
    fill_funcvals(label, x, p, &mut vals);
    let d = spec.size * p;
    let mut out = CMat::zeros((d, d));
    for e in &spec.entries {
        let m_start = (-e.shift).max(0) as usize;
        for m in m_start..p {
            let colp = m as i64 + e.shift;
            if colp < 0 || colp >= p as i64 {
                continue;
            }
            let value = e.coeff * vals[e.func][m] * ladder_factor(m, e.shift);
            out[(e.row * p + m, e.col * p + colp as usize)] = value;
        }
    }
    out
}

/// Closed-form `exp(-itg B_½)` (spin-1/2 doublet; also the one-atom case).
pub fn expm_spin_half(t: f64, g: f64, tr: FockTruncation) -> CMat {
    assemble_block(SpinLabel::Half, t, g, tr)
}

/// Closed-form `exp(-itg B₁)` (spin-1 triplet).
pub fn expm_spin_one(t: f64, g: f64, tr: FockTruncation) -> CMat {
    assemble_block(SpinLabel::One, t, g, tr)
}

/// Closed-form `exp(-itg B_{3/2})` (spin-3/2 quartet).
pub fn expm_spin_three_half(t: f64, g: f64, tr: FockTruncation) -> CMat {
    assemble_block(SpinLabel::ThreeHalf, t, g, tr)
}

/// Block-diagonal exponential `exp(-itg (T† A_n T))` in the decomposed
/// basis (no `T` conjugation applied).
pub fn block_diagonal_exp(n: usize, t: f64, g: f64, tr: FockTruncation) -> Result<CMat> {
    let labels = block_labels(n)?;
    let p = tr.dim();
    let total: usize = labels.iter().map(|l| l.size() * p).sum();
    let mut out = CMat::zeros((total, total));
    let mut offset = 0;
    for label in labels {
        let block = assemble_block(label, t, g, tr);
        let d = block.nrows();
        out.slice_mut(ndarray::s![offset..offset + d, offset..offset + d])
            .assign(&block);
        offset += d;
    }
    Ok(out)
}

/// Closed-form `exp(-itg A_n)` on the full atom ⊗ photon space for
/// `n ∈ {1, 2, 3}`, assembled as `(T⊗1) · blockdiag · (T†⊗1)`.
pub fn expm_full(n: usize, t: f64, g: f64, tr: FockTruncation) -> Result<CMat> {
    let bd = block_diagonal_exp(n, t, g, tr)?;
    if n == 1 {
        return Ok(bd);
    }
    let t_full = kron(&t_matrix(n)?, &identity(tr.dim()));
    Ok(t_full.dot(&bd).dot(&dagger(&t_full)))
}

/// The spin-1 coupling block `B₁ = √2 (J₊⊗a + J₋⊗a†)` as a dense matrix.
pub fn spin_one_matrix(tr: FockTruncation) -> CMat {
    let p = tr.dim();
    let a = annihilation(tr).data;
    let ad = creation(tr).data;
    let s2 = C64::new(2f64.sqrt(), 0.0);
    let mut out = CMat::zeros((3 * p, 3 * p));
    for (r, c, op) in [(0, 1, &a), (1, 2, &a), (1, 0, &ad), (2, 1, &ad)] {
        let mut slice = out.slice_mut(ndarray::s![r * p..(r + 1) * p, c * p..(c + 1) * p]);
        slice.assign(&op.mapv(|z| s2 * z));
    }
    out
}

/// The spin-3/2 coupling block `B_{3/2}` (couplings `√3, 2, √3`).
pub fn spin_three_half_matrix(tr: FockTruncation) -> CMat {
    let p = tr.dim();
    let a = annihilation(tr).data;
    let ad = creation(tr).data;
    let s3 = C64::new(3f64.sqrt(), 0.0);
    let two = C64::new(2.0, 0.0);
    let mut out = CMat::zeros((4 * p, 4 * p));
    for (r, c, op, coeff) in [
        (0usize, 1usize, &a, s3),
        (1, 2, &a, two),
        (2, 3, &a, s3),
        (1, 0, &ad, s3),
        (2, 1, &ad, two),
        (3, 2, &ad, s3),
    ] {
        let mut slice = out.slice_mut(ndarray::s![r * p..(r + 1) * p, c * p..(c + 1) * p]);
        slice.assign(&op.mapv(|z| coeff * z));
    }
    out
}

/// Closed-form even and odd powers `(B_{3/2}^{2k}, B_{3/2}^{2k+1})` for
/// `k ≤ 8`, built from the eigenvalue recursion rather than repeated
/// multiplication.
pub fn keylemma_powers(k: usize, tr: FockTruncation) -> Result<(CMat, CMat)> {
    if k > 8 {
        return Err(Error::InvalidParams {
            reason: format!("keylemma_powers supports exponents k <= 8, got {k}"),
        });
    }
    let p = tr.dim();
    let d = 4 * p;
    let kk = k as i32;

    // Coefficient functions of the eigenvalues λ±(N).
    let coeff = |nn: i64| -> (f64, f64, f64, f64, f64, f64) {
        let n = nn as f64;
        let dd = 16.0 * n * n + 9.0;
        let sd = dd.sqrt();
        let lp = 5.0 * n + sd;
        let lm = 5.0 * n - sd;
        let vp = -2.0 * n - 3.0 + sd;
        let vm = -2.0 * n - 3.0 - sd;
        let wp = 2.0 * n - 3.0 + sd;
        let wm = 2.0 * n - 3.0 - sd;
        let den = 2.0 * sd;
        let pp = lp.powi(kk);
        let pm = lm.powi(kk);
        let alpha = (vp * pp - vm * pm) / den;
        let beta = (wp * pp - wm * pm) / den;
        let gamma = (vp * pm - vm * pp) / den;
        let delta = (wp * pm - wm * pp) / den;
        let xi = (pp - pm) / den;
        let xi_next = (lp.powi(kk + 1) - lm.powi(kk + 1)) / den;
        (alpha, beta, gamma, delta, xi, xi_next)
    };

    let mut even = CMat::zeros((d, d));
    let mut odd = CMat::zeros((d, d));
    let place = |mat: &mut CMat, row: usize, col: usize, shift: i64, f: &dyn Fn(i64) -> f64| {
        let m_start = (-shift).max(0) as usize;
        for m in m_start..p {
            let cp = m as i64 + shift;
            if cp < 0 || cp >= p as i64 {
                continue;
            }
            let v = f(m as i64) * ladder_factor(m, shift);
            mat[(row * p + m, col * p + cp as usize)] = C64::new(v, 0.0);
        }
    };
    let s3 = 3f64.sqrt();
    // Even power: diagonal α_k(N+2), β_k(N+1), γ_k(N), δ_k(N-1); corners
    // 2√3 ξ_k with matching shifts.
    place(&mut even, 0, 0, 0, &|m| coeff(m + 2).0);
    place(&mut even, 1, 1, 0, &|m| coeff(m + 1).1);
    place(&mut even, 2, 2, 0, &|m| coeff(m).2);
    place(&mut even, 3, 3, 0, &|m| coeff(m - 1).3);
    place(&mut even, 0, 2, 2, &|m| 2.0 * s3 * coeff(m + 2).4);
    place(&mut even, 1, 3, 2, &|m| 2.0 * s3 * coeff(m + 1).4);
    place(&mut even, 2, 0, -2, &|m| 2.0 * s3 * coeff(m).4);
    place(&mut even, 3, 1, -2, &|m| 2.0 * s3 * coeff(m - 1).4);
    // Odd power.
    place(&mut odd, 0, 1, 1, &|m| s3 * coeff(m + 2).1);
    place(&mut odd, 0, 3, 3, &|m| 6.0 * coeff(m + 2).4);
    place(&mut odd, 1, 0, -1, &|m| s3 * coeff(m + 1).1);
    place(&mut odd, 1, 2, 1, &|m| 2.0 * coeff(m + 1).5);
    place(&mut odd, 2, 1, -1, &|m| 2.0 * coeff(m).5);
    place(&mut odd, 2, 3, 1, &|m| s3 * coeff(m).2);
    place(&mut odd, 3, 0, -3, &|m| 6.0 * coeff(m - 1).4);
    place(&mut odd, 3, 2, -1, &|m| s3 * coeff(m - 1).2);
    Ok((even, odd))
}
