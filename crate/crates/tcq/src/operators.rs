//! Dense operators on the truncated atom ⊗ photon Hilbert space.
//!
//! Atom factors are ordered left to right (atom 1 outermost), the photon
//! mode is the last tensor factor, and each atom uses `|+⟩ = (1, 0)ᵀ`.
//! With `P = n_max + 1` photon levels the composite basis index is
//! `atom_index * P + photon_index`, where `atom_index` enumerates atomic
//! product states in binary order.

use crate::error::{Error, Result};
use crate::{C64, CMat};
use ndarray::linalg::kron;

/// Photon-space truncation: levels `0..=n_max` are kept and the top
/// `buffer` levels are treated as a guard band that absorbs truncation
/// artifacts.
///
/// Truncating the infinite ladder makes the top rows of products like
/// `a a†` wrong (the `√(n_max+1)` matrix element is dropped), so every
/// comparison against an untruncated identity masks the guard band. A
/// buffer of zero keeps all levels significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FockTruncation {
    n_max: usize,
    buffer: usize,
}

impl FockTruncation {
    /// Create a truncation with `n_max >= 1` and `n_max >= buffer + 1`.
    pub fn new(n_max: usize, buffer: usize) -> Result<Self> {
        if n_max < 1 || n_max < buffer + 1 {
            return Err(Error::InvalidTruncation { n_max, buffer });
        }
        Ok(Self { n_max, buffer })
    }

    /// Highest retained photon occupation number.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of guard levels masked in comparisons.
    pub fn buffer(&self) -> usize {
        self.buffer
    }

    /// Dimension of the truncated photon space, `n_max + 1`.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// First photon level inside the guard band.
    pub fn guard_start(&self) -> usize {
        self.dim() - self.buffer
    }
}

impl std::fmt::Display for FockTruncation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n_max = {}, buffer = {}", self.n_max, self.buffer)
    }
}

/// A dense operator together with the metadata needed to interpret its
/// indices: how many atoms it acts on and, if it involves the photon mode,
/// which truncation is in force.
#[derive(Debug, Clone)]
pub struct Operator {
    /// Dense matrix in the composite basis described at module level.
    pub data: CMat,
    /// Number of atom factors (0 for photon-only operators).
    pub n_atoms: usize,
    /// Photon truncation, or `None` for atom-only operators.
    pub fock: Option<FockTruncation>,
}

impl Operator {
    /// Wrap a matrix, checking that its dimension matches the metadata.
    pub fn new(data: CMat, n_atoms: usize, fock: Option<FockTruncation>) -> Result<Self> {
        let expected = (1usize << n_atoms) * fock.map_or(1, |tr| tr.dim());
        if data.nrows() != expected || data.ncols() != expected {
            return Err(Error::Dimension {
                context: "Operator::new",
                left: data.nrows(),
                right: expected,
            });
        }
        Ok(Self {
            data,
            n_atoms,
            fock,
        })
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            data: dagger(&self.data),
            n_atoms: self.n_atoms,
            fock: self.fock,
        }
    }

    /// Largest absolute deviation from `other`, masking the photon guard
    /// band when a truncation is present.
    pub fn masked_max_abs_diff(&self, other: &CMat) -> f64 {
        match self.fock {
            Some(tr) => masked_max_abs_diff(&self.data, other, tr),
            None => max_abs_diff(&self.data, other),
        }
    }
}

/// Identity matrix of dimension `d`.
pub fn identity(d: usize) -> CMat {
    CMat::eye(d)
}

/// Conjugate transpose of a dense matrix.
pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

/// Commutator `[a, b] = a b - b a`.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Largest absolute entry of `x - y`.
pub fn max_abs_diff(x: &CMat, y: &CMat) -> f64 {
    assert_eq!(x.dim(), y.dim(), "max_abs_diff: shape mismatch");
    x.iter()
        .zip(y.iter())
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm()))
}

/// Largest absolute entry of `x - y` over rows and columns whose photon
/// index lies below the guard band of `tr`.
///
/// The photon index of a composite index `i` is `i % tr.dim()`.
pub fn masked_max_abs_diff(x: &CMat, y: &CMat, tr: FockTruncation) -> f64 {
    assert_eq!(x.dim(), y.dim(), "masked_max_abs_diff: shape mismatch");
    let p = tr.dim();
    let guard = tr.guard_start();
    let mut acc = 0.0f64;
    for ((r, c), a) in x.indexed_iter() {
        if r % p >= guard || c % p >= guard {
            continue;
        }
        acc = acc.max((a - y[(r, c)]).norm());
    }
    acc
}

/// Largest absolute entry of `u† u - 1`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let d = u.nrows();
    max_abs_diff(&dagger(u).dot(u), &identity(d))
}

/// Largest absolute entry of `m - m†`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs_diff(m, &dagger(m))
}

/// True if every entry is finite.
pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Photon annihilation operator `a` on the truncated space:
/// `⟨m| a |m+1⟩ = √(m+1)`.
pub fn annihilation(tr: FockTruncation) -> Operator {
    let p = tr.dim();
    let mut m = CMat::zeros((p, p));
    for i in 0..p - 1 {
        m[(i, i + 1)] = C64::new(((i + 1) as f64).sqrt(), 0.0);
    }
    Operator {
        data: m,
        n_atoms: 0,
        fock: Some(tr),
    }
}

/// Photon creation operator `a† = a‡`.
pub fn creation(tr: FockTruncation) -> Operator {
    annihilation(tr).dagger()
}

/// Photon number operator `N = a† a` (exactly diagonal, `N|m⟩ = m|m⟩`).
pub fn number(tr: FockTruncation) -> Operator {
    let p = tr.dim();
    let mut m = CMat::zeros((p, p));
    for i in 0..p {
        m[(i, i)] = C64::new(i as f64, 0.0);
    }
    Operator {
        data: m,
        n_atoms: 0,
        fock: Some(tr),
    }
}

/// Single-atom operators in the `|+⟩ = (1,0)ᵀ` basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomOp {
    /// Raising operator `σ₊ = |+⟩⟨−|`.
    Raise,
    /// Lowering operator `σ₋ = |−⟩⟨+|`.
    Lower,
    /// `σ₃ = diag(1, -1)`.
    Sigma3,
    /// `σ₁` (bit flip).
    Sigma1,
    /// Identity.
    Id,
}

/// The 2×2 matrix of a single-atom operator.
pub fn pauli(op: AtomOp) -> CMat {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match op {
        AtomOp::Raise => ndarray::array![[z, one], [z, z]],
        AtomOp::Lower => ndarray::array![[z, z], [one, z]],
        AtomOp::Sigma3 => ndarray::array![[one, z], [z, -one]],
        AtomOp::Sigma1 => ndarray::array![[z, one], [one, z]],
        AtomOp::Id => identity(2),
    }
}

/// `op` acting on atom `j` (1-based) of `n` atoms, identity elsewhere.
/// The result lives on the atom-only space of dimension `2^n`.
pub fn pauli_embed(op: AtomOp, j: usize, n: usize) -> Result<Operator> {
    if j == 0 || j > n {
        return Err(Error::AtomIndex {
            index: j,
            n_atoms: n,
        });
    }
    let mut m = identity(1);
    for site in 1..=n {
        let factor = if site == j { pauli(op) } else { identity(2) };
        m = kron(&m, &factor);
    }
    Operator {
        data: m,
        n_atoms: n,
        fock: None,
    }
    .into_ok()
}

impl Operator {
    fn into_ok(self) -> Result<Self> {
        Ok(self)
    }
}

/// Collective atomic operator `Σ_j op(j)`, with the spin convention
/// `S₃ = ½ Σ_j σ₃(j)` while `S± = Σ_j σ±(j)` carry no prefactor.
pub fn collective(op: AtomOp, n: usize) -> Result<Operator> {
    if n == 0 {
        return Err(Error::AtomCount {
            n_atoms: n,
            context: "collective",
        });
    }
    let d = 1usize << n;
    let mut m = CMat::zeros((d, d));
    for j in 1..=n {
        m = m + pauli_embed(op, j, n)?.data;
    }
    if op == AtomOp::Sigma3 {
        m.mapv_inplace(|z| 0.5 * z);
    }
    Operator {
        data: m,
        n_atoms: n,
        fock: None,
    }
    .into_ok()
}

/// Atom-photon coupling `A_n = S₊ ⊗ a + S₋ ⊗ a†` for `n ∈ {1, 2, 3}` atoms.
pub fn coupling_operator(n: usize, tr: FockTruncation) -> Result<Operator> {
    if !(1..=3).contains(&n) {
        return Err(Error::AtomCount {
            n_atoms: n,
            context: "coupling_operator",
        });
    }
    let sp = collective(AtomOp::Raise, n)?.data;
    let sm = collective(AtomOp::Lower, n)?.data;
    let a = annihilation(tr).data;
    let adag = creation(tr).data;
    Operator {
        data: kron(&sp, &a) + kron(&sm, &adag),
        n_atoms: n,
        fock: Some(tr),
    }
    .into_ok()
}

/// `atom_op ⊗ 1_photon` on the composite space.
pub fn embed_atom(atom: &CMat, tr: FockTruncation) -> CMat {
    kron(atom, &identity(tr.dim()))
}

/// `1_atoms ⊗ photon_op` on the composite space.
pub fn embed_photon(photon: &CMat, n: usize) -> CMat {
    kron(&identity(1usize << n), photon)
}
