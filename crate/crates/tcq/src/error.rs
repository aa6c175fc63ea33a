//! Crate-wide error type.

/// Errors produced by constructors and numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A photon-space truncation was requested that cannot hold its buffer.
    #[error("invalid Fock truncation: n_max = {n_max}, buffer = {buffer} (need n_max >= 1 and n_max >= buffer + 1)")]
    InvalidTruncation { n_max: usize, buffer: usize },

    /// An atom index was outside `1..=n_atoms`.
    #[error("atom index {index} out of range for {n_atoms} atom(s)")]
    AtomIndex { index: usize, n_atoms: usize },

    /// An atom count outside the supported set was requested.
    #[error("{context}: unsupported atom count {n_atoms}")]
    AtomCount {
        n_atoms: usize,
        context: &'static str,
    },

    /// Mismatched matrix dimensions.
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    Dimension {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// A matrix passed to a numerical routine contained NaN or infinity.
    #[error("non-finite entries passed to {context}")]
    NonFinite { context: &'static str },

    /// A numerical routine failed (for example a singular linear solve).
    #[error("numerical failure in {context}")]
    Numeric { context: &'static str },

    /// Model parameters violate a precondition of the requested routine.
    #[error("invalid model parameters: {reason}")]
    InvalidParams { reason: String },

    /// The reduced dynamics requires the cavity resonance condition.
    #[error("cavity off resonance: |omega - delta| = {detuning:e} exceeds tolerance {tol:e}")]
    OffResonance { detuning: f64, tol: f64 },

    /// A drive index referenced a drive that is not present.
    #[error("drive index {index} out of range for {n_drives} drive(s)")]
    DriveIndex { index: usize, n_drives: usize },

    /// An explicit integration step failed the stability guard.
    #[error("integration step {step:e} too large: step * |generator| = {product:e} exceeds 0.1")]
    StepTooLarge { step: f64, product: f64 },

    /// The integrator produced non-finite state amplitudes.
    #[error("integration diverged (non-finite amplitudes) at t = {t}")]
    Diverged { t: f64 },

    /// An unknown gate name was supplied.
    #[error("unknown gate target {name:?} (expected one of CZ2, CNOT2, A, B, C, CCNOT)")]
    UnknownGate { name: String },

    /// A schedule failed validation.
    #[error("invalid pulse schedule: {reason}")]
    InvalidSchedule { reason: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
