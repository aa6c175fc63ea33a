//! Shared fixtures for the `tcq` benchmarks: parameter sets and
//! fixed-duration schedules so timings measure steady-state throughput
//! rather than full gate times.

use tcq::pulses::{phase_rule, resonance_for, SCHEMA};
use tcq::{Drive, GateTarget, ModelParams, PulseSchedule, Segment};

/// Resonant parameters for `gate` at drive amplitude `h1` (`g = ω = 1`).
pub fn drive_params(gate: GateTarget, h1: f64) -> ModelParams {
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

/// A single-segment schedule for `gate` cut to a fixed `duration`, so a
/// benchmark iteration costs `duration / step` integrator steps no
/// matter what the designed gate time would be.
pub fn clipped_schedule(gate: GateTarget, h1: f64, duration: f64) -> PulseSchedule {
    let params = drive_params(gate, h1);
    let res = resonance_for(gate);
    let drive = &params.drives[0];
    PulseSchedule {
        schema: SCHEMA.into(),
        target: gate,
        segments: vec![Segment {
            drive: res.drive_index,
            omega: drive.omega,
            phi: drive.phi,
            h: drive.h,
            duration,
        }],
        params: params.clone(),
    }
}
