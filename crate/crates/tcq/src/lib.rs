//! Simulation and verification toolkit for quantum logic gates driven through
//! a single-mode cavity coupled to `n` two-level atoms (a driven
//! Tavis-Cummings model).
//!
//! The crate provides, for one, two and three atoms:
//!
//! - dense operator constructions on the truncated atom ⊗ photon space
//!   ([`operators`]), together with a general-purpose matrix exponential that
//!   serves as an independent numerical oracle ([`expm`]);
//! - the orthogonal change of basis that block-diagonalizes the atom-photon
//!   coupling into collective-spin sectors, and closed-form exponentials of
//!   each sector ([`decomp`]);
//! - symbolic sums of oscillating terms ([`terms`]) used to express the
//!   exactly reduced generator of the driven dynamics in the interaction
//!   picture ([`model`], [`reduced`]), plus the rotating-wave filter that
//!   isolates resonant transitions;
//! - pulse parameters (drive frequency, phase, duration) realizing
//!   controlled-phase and controlled-NOT type entangling gates ([`pulses`]);
//! - the exact gate algebra assembling CNOT, CCNOT and CCCNOT from the
//!   cavity-induced primitives ([`gates`]);
//! - a structure-exploiting integrator of the full driven model used to
//!   measure gate fidelities against the designed targets ([`sim`]);
//! - a self-check suite shared with the command line tool ([`verify`]).
//!
//! # Conventions
//!
//! Atom Hilbert spaces are ordered left to right (atom 1 is the leftmost,
//! outermost tensor factor) with the photon mode as the final factor. Each
//! atom uses the basis `|+⟩ = (1, 0)ᵀ`, `|−⟩ = (0, 1)ᵀ`, so multi-atom basis
//! states are enumerated in the usual binary order `++…+`, `++…−`, ….
//! The photon mode is truncated at a finite occupation ([`FockTruncation`])
//! and comparisons mask the top buffer levels where truncation artifacts
//! live.

pub mod decomp;
pub mod error;
pub mod expm;
pub mod gates;
pub mod model;
pub mod operators;
pub mod pulses;
pub mod reduced;
pub mod sim;
pub mod terms;
pub mod verify;

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix used throughout.
pub type CMat = ndarray::Array2<C64>;

/// Library crate version, for report manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use decomp::{BlockDecomposition, SpinBlock, SpinLabel};
pub use error::{Error, Result};
pub use gates::QubitGate;
pub use model::{Drive, ModelParams};
pub use operators::{FockTruncation, Operator};
pub use pulses::{GateTarget, Kappa, PulseSchedule, ResonanceCondition, Segment};
pub use reduced::{FilteredGenerator, ReducedGenerator};
pub use sim::{GateReport, Propagator, SimulationConfig, SimulationOutcome, SweepRow};
pub use sim::{fidelity_sweep, integrate, simulate_gate, simulate_schedule, sweep_with_reports};
pub use terms::{Term, TermSum};
pub use verify::{CheckResult, Scope};
