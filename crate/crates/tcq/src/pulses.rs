//! Drive-pulse design: resonance conditions, induced two-level rates,
//! durations and phases realizing the entangling gates.
//!
//! Driving atom 1 weakly (`h₁ ≪ g`) while the cavity sits on resonance
//! induces, after the rotating-wave step, an effective two-level rotation
//! between a single pair of collective states. Which pair — and at what
//! rate — is selected by tuning the drive so that `Ω₁ + ω = κ·g` for one
//! of four distinguished constants `κ`:
//!
//! | target | `κ` | coupled pair (1-based collective slots) | rate |
//! |--------|-----|------------------------------------------|------|
//! | two-atom controlled phase | `√2 + √6` | (2, 3) | `(√6 - √2)/24 · h₁` |
//! | three-atom variant A | `√(10 + √73)` | (5, 6) | `√3(11-√73)/(20√73) · h₁` |
//! | three-atom variant B | `1 + √3` | (3, 7) | `√2(√3-1)/12 · h₁` |
//! | three-atom variant C | `√3 + √10` | (6, 7) | `(√30-4)/60 · h₁` |
//!
//! A quarter pulse (`rate · t = π/2`) with drive phase `π/2` realizes the
//! two-atom controlled-phase primitive; half pulses (`rate · t = π`)
//! realize the diagonal three-atom primitives. The controlled-controlled
//! NOT is composed from two variant-A half pulses with exact
//! frame gates in between (see [`crate::gates`]).

use crate::error::{Error, Result};
use crate::model::{Drive, ModelParams};
use serde::{Deserialize, Serialize};

/// JSON schema tag written into every schedule and report.
pub const SCHEMA: &str = "tcq/1";

/// The four distinguished drive-frequency constants `κ` (`Ω₁ + ω = κg`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kappa {
    /// `√2 + √6` — two-atom controlled-phase resonance.
    CzTwo,
    /// `√(10 + √73)` — three-atom variant A.
    VariantA,
    /// `1 + √3` — three-atom variant B.
    VariantB,
    /// `√3 + √10` — three-atom variant C.
    VariantC,
}

impl Kappa {
    /// Numeric value of `κ`.
    pub fn value(&self) -> f64 {
        match self {
            Kappa::CzTwo => 2f64.sqrt() + 6f64.sqrt(),
            Kappa::VariantA => (10.0 + 73f64.sqrt()).sqrt(),
            Kappa::VariantB => 1.0 + 3f64.sqrt(),
            Kappa::VariantC => 3f64.sqrt() + 10f64.sqrt(),
        }
    }

    /// Closed-form label for logs and reports.
    pub fn label(&self) -> &'static str {
        match self {
            Kappa::CzTwo => "sqrt(2)+sqrt(6)",
            Kappa::VariantA => "sqrt(10+sqrt(73))",
            Kappa::VariantB => "1+sqrt(3)",
            Kappa::VariantC => "sqrt(3)+sqrt(10)",
        }
    }

    pub fn all() -> [Kappa; 4] {
        [Kappa::CzTwo, Kappa::VariantA, Kappa::VariantB, Kappa::VariantC]
    }
}

/// A resonance condition `Ω_j + ω = κ·g` for drive `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceCondition {
    /// 1-based drive index the condition constrains.
    pub drive_index: usize,
    pub kappa: Kappa,
}

impl ResonanceCondition {
    /// The drive frequency `Ω_j = κg - ω` satisfying the condition.
    pub fn drive_frequency(&self, g: f64, omega: f64) -> f64 {
        self.kappa.value() * g - omega
    }
}

/// Gate targets the designer knows how to realize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateTarget {
    /// Two-atom controlled phase (quarter pulse at the `√2+√6` resonance).
    Cz2,
    /// Two-atom controlled NOT: the same pulse as [`GateTarget::Cz2`]
    /// composed with exact single-atom frame gates.
    Cnot2,
    /// Three-atom diagonal variant A, `diag(1,1,1,1,-1,-1,1,1)`.
    A,
    /// Three-atom diagonal variant B, `1 ⊗ diag(1,1,-1,1)`.
    B,
    /// Three-atom diagonal variant C, `diag(1,1,1,1,1,-1,-1,1)`.
    C,
    /// Controlled-controlled NOT: two variant-A half pulses composed with
    /// exact frame gates.
    Ccnot,
}

impl GateTarget {
    /// Number of atoms the target acts on.
    pub fn n_atoms(&self) -> usize {
        match self {
            GateTarget::Cz2 | GateTarget::Cnot2 => 2,
            _ => 3,
        }
    }

    /// All designable targets.
    pub fn all() -> [GateTarget; 6] {
        [
            GateTarget::Cz2,
            GateTarget::Cnot2,
            GateTarget::A,
            GateTarget::B,
            GateTarget::C,
            GateTarget::Ccnot,
        ]
    }
}

impl std::str::FromStr for GateTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CZ2" => Ok(GateTarget::Cz2),
            "CNOT2" => Ok(GateTarget::Cnot2),
            "A" => Ok(GateTarget::A),
            "B" => Ok(GateTarget::B),
            "C" => Ok(GateTarget::C),
            "CCNOT" => Ok(GateTarget::Ccnot),
            _ => Err(Error::UnknownGate { name: s.into() }),
        }
    }
}

impl std::fmt::Display for GateTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GateTarget::Cz2 => "CZ2",
            GateTarget::Cnot2 => "CNOT2",
            GateTarget::A => "A",
            GateTarget::B => "B",
            GateTarget::C => "C",
            GateTarget::Ccnot => "CCNOT",
        };
        f.write_str(s)
    }
}

/// Resonance condition selecting the transition for a gate target.
pub fn resonance_for(gate: GateTarget) -> ResonanceCondition {
    let kappa = match gate {
        GateTarget::Cz2 | GateTarget::Cnot2 => Kappa::CzTwo,
        GateTarget::A | GateTarget::Ccnot => Kappa::VariantA,
        GateTarget::B => Kappa::VariantB,
        GateTarget::C => Kappa::VariantC,
    };
    ResonanceCondition {
        drive_index: 1,
        kappa,
    }
}

/// The 1-based pair of collective slots coupled by the surviving secular
/// term of each resonance.
pub fn coupled_pair(gate: GateTarget) -> (usize, usize) {
    match gate {
        GateTarget::Cz2 | GateTarget::Cnot2 => (2, 3),
        GateTarget::A | GateTarget::Ccnot => (5, 6),
        GateTarget::B => (3, 7),
        GateTarget::C => (6, 7),
    }
}

/// Effective two-level (Rabi) rate induced by drive amplitude `h1` at the
/// gate's resonance.
pub fn rabi_rate(gate: GateTarget, h1: f64) -> f64 {
    let coeff = match gate {
        GateTarget::Cz2 | GateTarget::Cnot2 => (6f64.sqrt() - 2f64.sqrt()) / 24.0,
        GateTarget::A | GateTarget::Ccnot => {
            let s73 = 73f64.sqrt();
            3f64.sqrt() * (11.0 - s73) / (20.0 * s73)
        }
        GateTarget::B => 2f64.sqrt() * (3f64.sqrt() - 1.0) / 12.0,
        GateTarget::C => (30f64.sqrt() - 4.0) / 60.0,
    };
    coeff * h1
}

/// Smallest positive pulse duration realizing the gate: quarter period
/// `π/(2·rate)` for the controlled-phase pulse (which needs the
/// off-diagonal branch), half period `π/rate` for the diagonal variants.
/// For the composed controlled-controlled NOT this is the total duration
/// of its two half pulses.
pub fn gate_time(gate: GateTarget, h1: f64) -> f64 {
    let r = rabi_rate(gate, h1);
    match gate {
        GateTarget::Cz2 | GateTarget::Cnot2 => std::f64::consts::PI / (2.0 * r),
        GateTarget::A | GateTarget::B | GateTarget::C => std::f64::consts::PI / r,
        GateTarget::Ccnot => 2.0 * std::f64::consts::PI / r,
    }
}

/// Drive phase rule: the quarter pulse uses `φ₁ = π/2` so its
/// off-diagonal branch lands on the real matrix `[[0,-1],[1,0]]`; the
/// diagonal half pulses are phase-insensitive and use 0.
pub fn phase_rule(gate: GateTarget) -> f64 {
    match gate {
        GateTarget::Cz2 | GateTarget::Cnot2 => std::f64::consts::FRAC_PI_2,
        _ => 0.0,
    }
}

/// One constant-drive segment of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// 1-based index of the driven atom.
    pub drive: usize,
    /// Drive angular frequency `Ω`.
    pub omega: f64,
    /// Drive phase `φ`.
    pub phi: f64,
    /// Drive amplitude `h`.
    pub h: f64,
    /// Segment duration.
    pub duration: f64,
}

/// A designed pulse schedule: consecutive constant-drive segments plus
/// the model parameters they assume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// Schema tag, [`SCHEMA`].
    pub schema: String,
    pub target: GateTarget,
    pub segments: Vec<Segment>,
    pub params: ModelParams,
}

impl PulseSchedule {
    /// Total duration.
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Validate schema tag, segment sanity and parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidSchedule {
                reason: format!("unknown schema {:?} (expected {SCHEMA:?})", self.schema),
            });
        }
        if self.segments.is_empty() {
            return Err(Error::InvalidSchedule {
                reason: "schedule has no segments".into(),
            });
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration > 0.0) || !s.duration.is_finite() {
                return Err(Error::InvalidSchedule {
                    reason: format!("segment {i}: nonpositive duration {}", s.duration),
                });
            }
            if s.h < 0.0 || !s.h.is_finite() || !s.omega.is_finite() || !s.phi.is_finite() {
                return Err(Error::InvalidSchedule {
                    reason: format!("segment {i}: invalid drive values"),
                });
            }
            if s.drive == 0 || s.drive > self.target.n_atoms() {
                return Err(Error::InvalidSchedule {
                    reason: format!(
                        "segment {i}: drive index {} out of range for {} atoms",
                        s.drive,
                        self.target.n_atoms()
                    ),
                });
            }
        }
        self.params.validate()
    }

    /// Model parameters with drive 1 set from segment `k` (the form the
    /// reduced generator takes during that segment).
    pub fn segment_params(&self, k: usize) -> Result<ModelParams> {
        let seg = self.segments.get(k).ok_or(Error::InvalidSchedule {
            reason: format!("segment index {k} out of range"),
        })?;
        let mut params = self.params.clone();
        let mut drives = vec![
            Drive {
                h: 0.0,
                omega: 0.0,
                phi: 0.0,
            };
            seg.drive
        ];
        drives[seg.drive - 1] = Drive {
            h: seg.h,
            omega: seg.omega,
            phi: seg.phi,
        };
        params.drives = drives;
        Ok(params)
    }
}

/// Design the pulse schedule for a gate target.
///
/// `base` supplies the cavity parameters (`ω = Δ`, `g`) and the drive
/// amplitude `h₁` (drive 1 of `base.drives`); frequency, phase and
/// duration are filled in from the resonance condition and timing rules.
pub fn design(gate: GateTarget, base: &ModelParams) -> Result<PulseSchedule> {
    base.validate()?;
    base.require_cavity_resonance()?;
    let h1 = base.drive(1).h;
    if h1 <= 0.0 {
        return Err(Error::InvalidParams {
            reason: "pulse design needs a positive drive-1 amplitude h1".into(),
        });
    }
    let res = resonance_for(gate);
    let omega_drive = res.drive_frequency(base.g, base.omega);
    let phi = phase_rule(gate);
    let segment = |duration: f64| Segment {
        drive: res.drive_index,
        omega: omega_drive,
        phi,
        h: h1,
        duration,
    };
    let segments = match gate {
        GateTarget::Ccnot => {
            // Two variant-A half pulses; the interleaved controlled-V and
            // single-atom frame gates are exact and applied algebraically
            // (see crate::gates::ccnot_assembly).
            let half = gate_time(GateTarget::A, h1);
            vec![segment(half), segment(half)]
        }
        _ => vec![segment(gate_time(gate, h1))],
    };
    let params = ModelParams {
        omega: base.omega,
        delta: base.delta,
        g: base.g,
        drives: vec![Drive {
            h: h1,
            omega: omega_drive,
            phi,
        }],
    };
    Ok(PulseSchedule {
        schema: SCHEMA.into(),
        target: gate,
        segments,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base(h1: f64) -> ModelParams {
        ModelParams {
            omega: 1.0,
            delta: 1.0,
            g: 1.0,
            drives: vec![Drive {
                h: h1,
                omega: 0.0,
                phi: 0.0,
            }],
        }
    }

    #[test]
    fn kappa_values_match_closed_forms() {
        assert_relative_eq!(Kappa::CzTwo.value(), 3.8637033051562728, max_relative = 1e-15);
        assert_relative_eq!(
            Kappa::VariantA.value(),
            4.3062749268152318,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            Kappa::VariantB.value(),
            2.7320508075688772,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            Kappa::VariantC.value(),
            4.8943284677372567,
            max_relative = 1e-15
        );
    }

    #[test]
    fn kappas_are_well_separated() {
        // The four resonances stay at least 0.17 g apart, so a rotating-
        // wave filter at one of them cannot confuse another.
        let vals: Vec<f64> = Kappa::all().iter().map(|k| k.value()).collect();
        for i in 0..vals.len() {
            for j in 0..i {
                let gap = (vals[i] - vals[j]).abs();
                assert!(gap > 0.17, "kappa gap {gap} too small ({i}, {j})");
            }
        }
    }

    #[test]
    fn rates_match_reference_values() {
        assert_relative_eq!(
            rabi_rate(GateTarget::Cz2, 1.0),
            0.043136507517086781,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            rabi_rate(GateTarget::A, 1.0),
            0.024894127057471321,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            rabi_rate(GateTarget::B, 1.0),
            0.086273015034173575,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            rabi_rate(GateTarget::C, 1.0),
            0.02462042625086102,
            max_relative = 1e-14
        );
    }

    #[test]
    fn durations_satisfy_the_area_rule() {
        let h1 = 0.01;
        for gate in GateTarget::all() {
            let sched = design(gate, &base(h1)).unwrap();
            for seg in &sched.segments {
                let area = rabi_rate(gate, h1) * seg.duration;
                let target = match gate {
                    GateTarget::Cz2 | GateTarget::Cnot2 => std::f64::consts::FRAC_PI_2,
                    _ => std::f64::consts::PI,
                };
                assert_relative_eq!(area, target, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn design_fills_resonant_frequency_and_phase() {
        let sched = design(GateTarget::Cz2, &base(0.01)).unwrap();
        assert_eq!(sched.segments.len(), 1);
        let seg = sched.segments[0];
        assert_relative_eq!(
            seg.omega + 1.0,
            Kappa::CzTwo.value(),
            max_relative = 1e-15
        );
        assert_relative_eq!(seg.phi, std::f64::consts::FRAC_PI_2);
        assert!(sched.validate().is_ok());

        let ccnot = design(GateTarget::Ccnot, &base(0.02)).unwrap();
        assert_eq!(ccnot.segments.len(), 2);
        assert_relative_eq!(
            ccnot.total_duration(),
            gate_time(GateTarget::Ccnot, 0.02),
            max_relative = 1e-15
        );
    }

    #[test]
    fn design_rejects_missing_drive() {
        let mut p = base(0.01);
        p.drives.clear();
        assert!(design(GateTarget::Cz2, &p).is_err());
        let mut p = base(0.01);
        p.delta = 2.0;
        assert!(design(GateTarget::Cz2, &p).is_err());
    }

    #[test]
    fn schedule_roundtrips_through_json_bit_exactly() {
        let sched = design(GateTarget::A, &base(0.013)).unwrap();
        let text = serde_json::to_string_pretty(&sched).unwrap();
        let back: PulseSchedule = serde_json::from_str(&text).unwrap();
        assert_eq!(sched, back);
        // Bit-exact: the f64 fields survive the round trip unchanged.
        assert!(back.segments[0].omega.to_bits() == sched.segments[0].omega.to_bits());
        assert!(back.segments[0].duration.to_bits() == sched.segments[0].duration.to_bits());
        // And a second serialization is byte-identical.
        let text2 = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn gate_names_parse_case_insensitively() {
        assert_eq!("cz2".parse::<GateTarget>().unwrap(), GateTarget::Cz2);
        assert_eq!("CCNOT".parse::<GateTarget>().unwrap(), GateTarget::Ccnot);
        assert!("XYZ".parse::<GateTarget>().is_err());
    }
}
