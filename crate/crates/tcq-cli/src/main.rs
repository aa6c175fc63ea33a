//! `tcq` command line: oracle-equivalence verification suites, pulse
//! design, schedule simulation and amplitude sweeps.
//!
//! Every run writes exactly one `manifest.json` into the output
//! directory (command echo, effective config, library version, wall
//! time, produced files). Data artifacts themselves carry no timestamps
//! so identical invocations produce byte-identical files.
//!
//! Exit codes: 0 success, 1 computational failure (failed checks,
//! integrator guard violations), 2 configuration or input errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tcq::pulses::{design, gate_time, phase_rule, rabi_rate, resonance_for};
use tcq::sim::expected_dominant_pair;
use tcq::verify::run_scope;
use tcq::{
    Drive, FockTruncation, GateTarget, ModelParams, PulseSchedule, Scope, SimulationConfig,
};

const SCHEMA: &str = "tcq/1";

/// Exit class for library errors: configuration mistakes exit 2,
/// computational failures (guards, divergence) exit 1.
fn exit_class(err: &tcq::Error) -> u8 {
    use tcq::Error::*;
    match err {
        StepTooLarge { .. } | Diverged { .. } | NonFinite { .. } | Numeric { .. } => 1,
        _ => 2,
    }
}

#[derive(Parser)]
#[command(
    name = "tcq",
    version,
    about = "Driven Tavis-Cummings gate toolkit: verify closed forms, design pulses, simulate schedules"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutArgs {
    /// Directory receiving the JSON/CSV artifacts and the run manifest.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    /// Largest retained photon number.
    #[arg(long, default_value_t = 16)]
    nmax: usize,
    /// Photon levels treated as guard band below the truncation edge.
    #[arg(long, default_value_t = 4)]
    buffer: usize,
    /// Integration step (time units of 1/g at g = 1); default 1e-3/g.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args)]
struct ModelArgs {
    /// Collective coupling strength g.
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    /// Cavity frequency omega (the atom gap is locked to it).
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a named self-check suite (expm, decomposition, keylemma,
    /// reduced, gates, appendix, all) against independent oracles.
    Verify {
        /// Suite to run.
        #[arg(default_value = "all")]
        scope: String,
        /// Seed for the randomized draws inside the checks.
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Design the resonant pulse schedule realizing a gate target.
    Design {
        /// Gate target: CZ2, CNOT2, A, B, C or CCNOT.
        gate: String,
        /// Drive amplitude h1 (same units as g).
        #[arg(long, default_value_t = 0.01)]
        h1: f64,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Integrate a schedule file and write the gate report.
    Simulate {
        /// Path to a schedule JSON produced by `design`.
        schedule: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Simulate one gate across several drive amplitudes.
    Sweep {
        /// Gate target: CZ2, CNOT2, A, B, C or CCNOT.
        gate: String,
        /// Comma-separated h1/g values (at least two).
        #[arg(long = "h-list", value_delimiter = ',', required = true)]
        h_list: Vec<f64>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Serialize)]
struct RunManifest {
    schema: &'static str,
    command: String,
    config: serde_json::Value,
    library_version: &'static str,
    wall_time_ms: u128,
    outputs: Vec<String>,
}

/// Collects the artifacts written by one command run.
struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    fn new(dir: &PathBuf) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.clone(),
            written: Vec::new(),
        })
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.write_raw(name, &body)
    }

    fn write_raw(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(self, command: String, config: serde_json::Value, started: Instant) -> Result<()> {
        let manifest = RunManifest {
            schema: SCHEMA,
            command,
            config,
            library_version: tcq::VERSION,
            wall_time_ms: started.elapsed().as_millis(),
            outputs: self.written.clone(),
        };
        let mut body = serde_json::to_string_pretty(&manifest)?;
        body.push('\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<tcq::Error>()
                .map(exit_class)
                .unwrap_or(2);
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Verify { scope, seed, out } => cmd_verify(&scope, seed, &out),
        Cmd::Design {
            gate,
            h1,
            model,
            out,
        } => cmd_design(&gate, h1, &model, &out),
        Cmd::Simulate {
            schedule,
            grid,
            out,
        } => cmd_simulate(&schedule, &grid, &out),
        Cmd::Sweep {
            gate,
            h_list,
            model,
            grid,
            out,
        } => cmd_sweep(&gate, &h_list, &model, &grid, &out),
    }
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema: &'static str,
    scope: String,
    seed: u64,
    all_passed: bool,
    checks: &'a [tcq::CheckResult],
}

fn cmd_verify(scope: &str, seed: u64, out: &OutArgs) -> Result<u8> {
    let started = Instant::now();
    let scope: Scope = Scope::from_str(scope)?;
    let results = run_scope(scope, seed);
    let all_passed = tcq::verify::all_passed(&results);
    for r in &results {
        let status = if r.passed { "pass" } else { "FAIL" };
        println!(
            "check {name}: {status} (max dev {dev:.3e}, tolerance {tol:.3e})",
            name = r.name,
            dev = r.max_dev,
            tol = r.tolerance,
        );
    }
    println!(
        "verify {scope}: {} of {} checks passed",
        results.iter().filter(|r| r.passed).count(),
        results.len(),
    );
    let mut artifacts = Artifacts::new(&out.out)?;
    artifacts.write_json(
        "verify_report.json",
        &VerifyReport {
            schema: SCHEMA,
            scope: scope.to_string(),
            seed,
            all_passed,
            checks: &results,
        },
    )?;
    artifacts.finish(
        format!("verify {scope}"),
        serde_json::json!({ "scope": scope.to_string(), "seed": seed }),
        started,
    )?;
    Ok(if all_passed { 0 } else { 1 })
}

fn base_params(gate: GateTarget, h1: f64, model: &ModelArgs) -> ModelParams {
    let res = resonance_for(gate);
    ModelParams {
        omega: model.omega,
        delta: model.omega,
        g: model.g,
        drives: vec![Drive {
            h: h1,
            omega: res.drive_frequency(model.g, model.omega),
            phi: phase_rule(gate),
        }],
    }
}

fn cmd_design(gate: &str, h1: f64, model: &ModelArgs, out: &OutArgs) -> Result<u8> {
    let started = Instant::now();
    let gate = GateTarget::from_str(gate)?;
    let params = base_params(gate, h1, model);
    let schedule = design(gate, &params)?;

    let res = resonance_for(gate);
    println!(
        "design {gate}: kappa = {kappa:.12}  Omega1 = {omega:.12}  phi1 = {phi:.12}",
        kappa = res.kappa.value(),
        omega = res.drive_frequency(model.g, model.omega),
        phi = phase_rule(gate),
    );
    println!(
        "rabi rate = {rate:.6e}  total duration = {dur:.6e}",
        rate = rabi_rate(gate, h1),
        dur = gate_time(gate, h1),
    );
    for (i, seg) in schedule.segments.iter().enumerate() {
        println!(
            "segment {i}: drive {d}  Omega = {o:.12}  phi = {p:.12}  h = {h}  duration = {t:.6e}",
            d = seg.drive,
            o = seg.omega,
            p = seg.phi,
            h = seg.h,
            t = seg.duration,
        );
    }

    let mut artifacts = Artifacts::new(&out.out)?;
    artifacts.write_json("schedule.json", &schedule)?;
    artifacts.finish(
        format!("design {gate}"),
        serde_json::json!({
            "gate": gate.to_string(),
            "h1": h1,
            "g": model.g,
            "omega": model.omega,
            "units": "omega, h1 and durations share the units fixed by g",
        }),
        started,
    )?;
    Ok(0)
}

fn load_schedule(path: &PathBuf) -> Result<PulseSchedule> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("reading schedule {}", path.display()))?;
    let schedule: PulseSchedule = serde_json::from_str(&body)
        .with_context(|| format!("parsing schedule {}", path.display()))?;
    schedule.validate()?;
    Ok(schedule)
}

fn sim_config(params: &ModelParams, grid: &GridArgs) -> Result<SimulationConfig> {
    let tr = FockTruncation::new(grid.nmax, grid.buffer)?;
    let mut cfg = SimulationConfig::for_params(params.clone(), tr);
    if let Some(step) = grid.step {
        cfg.step = step;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_simulate(schedule_path: &PathBuf, grid: &GridArgs, out: &OutArgs) -> Result<u8> {
    let started = Instant::now();
    let schedule = load_schedule(schedule_path)?;
    let cfg = sim_config(&schedule.params, grid)?;
    let outcome = tcq::simulate_schedule(&cfg, &schedule)?;
    let report = &outcome.report;
    println!(
        "simulate {target}: fidelity = {fid:.6}  leakage = {leak:.6}  gate time = {t:.6e}  ({n} steps)",
        target = report.target,
        fid = report.fidelity,
        leak = report.leakage,
        t = report.gate_time,
        n = report.diagnostics.n_steps_total,
    );
    let mut artifacts = Artifacts::new(&out.out)?;
    artifacts.write_json("gate_report.json", report)?;
    artifacts.finish(
        format!("simulate {}", schedule_path.display()),
        serde_json::json!({
            "schedule": schedule_path.display().to_string(),
            "target": report.target,
            "nmax": grid.nmax,
            "buffer": grid.buffer,
            "step": cfg.step,
        }),
        started,
    )?;
    Ok(0)
}

fn cmd_sweep(
    gate: &str,
    h_list: &[f64],
    model: &ModelArgs,
    grid: &GridArgs,
    out: &OutArgs,
) -> Result<u8> {
    let started = Instant::now();
    let gate = GateTarget::from_str(gate)?;
    if h_list.len() < 2 {
        return Err(tcq::Error::InvalidParams {
            reason: format!("sweep needs at least two h1/g values, got {}", h_list.len()),
        }
        .into());
    }
    let params = base_params(gate, h_list[0] * model.g, model);
    let cfg = sim_config(&params, grid)?;
    let rows = tcq::sweep_with_reports(gate, h_list, &cfg)?;

    let mut csv = String::from("h_over_g,fidelity,leakage,gate_time\n");
    for (row, _) in &rows {
        println!(
            "sweep {gate}: h/g = {h}  fidelity = {fid:.6}  leakage = {leak:.6}",
            h = row.h_over_g,
            fid = row.fidelity,
            leak = row.leakage,
        );
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.h_over_g, row.fidelity, row.leakage, row.gate_time
        ));
    }
    let monotone = rows.windows(2).all(|w| w[1].0.fidelity > w[0].0.fidelity);
    println!(
        "sweep {gate}: fidelity column {} monotone over the given order",
        if monotone { "is" } else { "is NOT" },
    );

    let mut artifacts = Artifacts::new(&out.out)?;
    artifacts.write_raw("sweep.csv", &csv)?;
    let summary: Vec<_> = rows.iter().map(|(row, _)| row).collect();
    artifacts.write_json(
        "sweep.json",
        &serde_json::json!({
            "schema": SCHEMA,
            "gate": gate.to_string(),
            "rows": summary,
        }),
    )?;
    for (i, (_, report)) in rows.iter().enumerate() {
        artifacts.write_json(&format!("report_{i}.json"), report)?;
    }
    artifacts.finish(
        format!("sweep {gate}"),
        serde_json::json!({
            "gate": gate.to_string(),
            "h_list": h_list,
            "g": model.g,
            "omega": model.omega,
            "nmax": grid.nmax,
            "buffer": grid.buffer,
            "step": cfg.step,
            "expected_dominant_pair": expected_dominant_pair(gate),
        }),
        started,
    )?;
    Ok(0)
}
