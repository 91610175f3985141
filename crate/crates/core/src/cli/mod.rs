//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or tripped guard, 2 usage or
//! configuration error, 3 numerical failure.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::diagnostics::{classify_threshold, DiagnosticsRadii, Recorder};
use crate::error::Error;
use crate::evolution::{evolve, Outcome, Trajectory};
use crate::fields::{FieldState, RadialGrid};
use crate::groundstate::{
    gn_constant_from_mass_and_kinetic, gn_functional, gn_perturbation_scan, optimal_gn_constant,
    pohozaev_report, solve_ground_state, GroundStateResult,
};
use crate::systems::{check_all, CheckOptions, SystemSpec};

pub use config::RunConfig;
use config::InitialData;
use output::{to_value, trajectory_csv, Output};

#[derive(Debug, Parser)]
#[command(name = "quadnls", version, about = "Radial quadratic Schrödinger systems in five dimensions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed (overrides `rng_seed`). Limited to the TOML integer range
    /// so the effective config can always be written back out.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the structural hypotheses of the configured system.
    CheckHypotheses,
    /// Solve for the ground state and report Pohozaev and GN diagnostics.
    GroundState,
    /// Evolve the configured initial data and write the trajectory.
    Evolve,
    /// Compare the initial data with the ground-state thresholds.
    Classify,
    /// Evolve while recording virial quantities; emit averaged Morawetz table.
    Morawetz,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::CheckHypotheses => "check-hypotheses",
            Command::GroundState => "ground-state",
            Command::Evolve => "evolve",
            Command::Classify => "classify",
            Command::Morawetz => "morawetz",
        }
    }
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "config",
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match e {
            Error::InvalidArgument(_) => (2, "invalid-argument"),
            Error::ConvergenceFailure { .. } => (3, "convergence-failure"),
            Error::DegenerateSolution(_) => (3, "degenerate-solution"),
            Error::NumericalFailure(_) => (3, "numerical-failure"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: 2,
            kind: "io",
            message: e.to_string(),
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> i32 {
    let cfg = match load_config(cli) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return f.code;
        }
    };
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let out = match Output::new(&dir, &cfg.hash(), to_value(&cfg)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return 2;
        }
    };
    let start = Instant::now();
    let result = match cli.command {
        Command::CheckHypotheses => cmd_check_hypotheses(&cfg, &out, cli.quiet),
        Command::GroundState => cmd_ground_state(&cfg, &out, cli.quiet),
        Command::Evolve => cmd_evolve(&cfg, &out, cli.quiet),
        Command::Classify => cmd_classify(&cfg, &out, cli.quiet),
        Command::Morawetz => cmd_morawetz(&cfg, &out, cli.quiet),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let _ = out.write_timing(cli.command.name(), elapsed);
    match result {
        Ok(code) => {
            if !cli.quiet {
                println!("{} finished in {elapsed:.2} s -> {}", cli.command.name(), out.dir().display());
            }
            code
        }
        Err(f) => {
            let _ = out.write_json(
                "error.json",
                json!({
                    "command": cli.command.name(),
                    "status": "error",
                    "kind": f.kind,
                    "message": f.message,
                    "exit_code": f.code,
                }),
            );
            eprintln!("error ({}): {}", f.kind, f.message);
            f.code
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::config("--config PATH is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_toml_str(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    Ok(cfg)
}

fn grid_of(cfg: &RunConfig) -> Result<Arc<RadialGrid>, Failure> {
    Ok(Arc::new(RadialGrid::new(cfg.grid.r_max, cfg.grid.n_points)?))
}

fn ground_state_at(
    cfg: &RunConfig,
    spec: &SystemSpec,
    grid: &Arc<RadialGrid>,
    omega: f64,
) -> Result<GroundStateResult, Failure> {
    Ok(solve_ground_state(spec, omega, grid.clone(), &cfg.groundstate.solver_options())?)
}

/// Ground state at `ω = 1`, the reference for thresholds, plus the one at
/// the configured `ω` when the initial data needs it and it differs.
struct GroundStates {
    unit: GroundStateResult,
    configured: Option<GroundStateResult>,
}

impl GroundStates {
    fn solve(cfg: &RunConfig, spec: &SystemSpec, grid: &Arc<RadialGrid>) -> Result<Self, Failure> {
        let unit = ground_state_at(cfg, spec, grid, 1.0)?;
        let omega = cfg.groundstate.omega;
        let configured = if cfg.initial.needs_ground_state() && omega != 1.0 {
            Some(ground_state_at(cfg, spec, grid, omega)?)
        } else {
            None
        };
        Ok(Self { unit, configured })
    }

    fn for_initial_data(&self) -> &GroundStateResult {
        self.configured.as_ref().unwrap_or(&self.unit)
    }
}

fn initial_state(
    cfg: &RunConfig,
    spec: &SystemSpec,
    grid: &Arc<RadialGrid>,
    gs: &GroundStateResult,
) -> Result<FieldState, Failure> {
    let l = spec.l();
    let state = match &cfg.initial {
        InitialData::Gaussian { amplitudes, widths } => FieldState::from_fn(grid.clone(), l, 0.0, |k, r| {
            Complex64::new(amplitudes[k] * (-(r * r) / (widths[k] * widths[k])).exp(), 0.0)
        })?,
        InitialData::ScaledGroundState { lambda } => gs.to_state().scaled(*lambda),
        InitialData::PerturbedGroundState { mode, eps } => {
            let factor: Vec<f64> = grid.radii().iter().map(|r| 1.0 + eps * (mode * r).sin()).collect();
            gs.to_state().multiplied_by(&factor)
        }
        InitialData::Csv { path } => read_profiles(path, grid, l)?,
    };
    Ok(state)
}

fn read_profiles(path: &Path, grid: &Arc<RadialGrid>, l: usize) -> Result<FieldState, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::config(format!("{} data row {}: {e}", path.display(), line + 1)))?;
        rows.push(row);
    }
    if rows.len() != grid.len() {
        return Err(Failure::config(format!(
            "{}: {} rows for a grid of {} points",
            path.display(),
            rows.len(),
            grid.len()
        )));
    }
    let width = rows[0].len();
    let complex = if width == 1 + l {
        false
    } else if width == 1 + 2 * l {
        true
    } else {
        return Err(Failure::config(format!(
            "{}: expected {} or {} columns, found {width}",
            path.display(),
            1 + l,
            1 + 2 * l
        )));
    };
    let tol = 1e-9 * grid.r_max();
    let mut comps = vec![vec![Complex64::default(); grid.len()]; l];
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width || (row[0] - grid.radii()[i]).abs() > tol {
            return Err(Failure::config(format!(
                "{}: row {} does not match the configured grid",
                path.display(),
                i + 1
            )));
        }
        for (k, c) in comps.iter_mut().enumerate() {
            c[i] = if complex {
                Complex64::new(row[1 + 2 * k], row[2 + 2 * k])
            } else {
                Complex64::new(row[1 + k], 0.0)
            };
        }
    }
    Ok(FieldState::new(grid.clone(), comps, 0.0)?)
}

fn cmd_check_hypotheses(cfg: &RunConfig, out: &Output, quiet: bool) -> Result<i32, Failure> {
    let spec = cfg.system.build()?;
    let opts = CheckOptions {
        samples: cfg.hypotheses.samples,
        seed: cfg.rng_seed,
        sigma: cfg.hypotheses.sigma.clone(),
    };
    let suite = check_all(&spec, &opts);
    let all_pass = suite.all_pass();
    out.write_json(
        "hypotheses.json",
        json!({
            "command": "check-hypotheses",
            "system": suite.system,
            "seed": suite.seed,
            "all_pass": all_pass,
            "failing": suite.failing(),
            "reports": to_value(&suite.reports),
        }),
    )?;
    if !quiet {
        for r in &suite.reports {
            println!("{:<28} {:?}", r.hypothesis, r.verdict);
        }
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn gn_block(gs: &GroundStateResult, spec: &SystemSpec, seed: u64) -> Result<Value, Failure> {
    let formula = optimal_gn_constant(gs, 5)?;
    let from_qk = gn_constant_from_mass_and_kinetic(gs)?;
    let scan = gn_perturbation_scan(gs, spec, 100, 0.2, seed)?;
    Ok(json!({
        "c5_formula": formula,
        "c5_from_mass_and_kinetic": from_qk,
        "relative_gap": (formula - from_qk).abs() / formula,
        "weinstein_ground_state": gn_functional(&gs.to_state(), spec, gs.omega, 5)?,
        "perturbation_scan": to_value(&scan),
    }))
}

fn cmd_ground_state(cfg: &RunConfig, out: &Output, quiet: bool) -> Result<i32, Failure> {
    let spec = cfg.system.build()?;
    let grid = grid_of(cfg)?;
    let gs = ground_state_at(cfg, &spec, &grid, cfg.groundstate.omega)?;
    let pohozaev = pohozaev_report(&gs, 5)?;
    let summary = gs.summary();
    out.write_json(
        "ground_state.json",
        json!({
            "command": "ground-state",
            "summary": to_value(&summary),
            "pohozaev": to_value(&pohozaev),
            "pohozaev_max_deviation": pohozaev.max_deviation(),
            "K_over_Q": gs.k / gs.q,
            "E0_over_Q": gs.e0 / gs.q,
            "gagliardo_nirenberg": gn_block(&gs, &spec, cfg.rng_seed)?,
        }),
    )?;
    out.write_csv("ground_state.csv", &gs.to_csv())?;
    if !quiet {
        println!(
            "I = {:.10}  K/I = {:.6}  P/I = {:.6}  calQ/I = {:.6}  ({} iterations)",
            gs.action_i, pohozaev.k_over_i, pohozaev.p_over_i, pohozaev.calq_over_i, gs.iterations
        );
    }
    Ok(0)
}

fn cmd_classify(cfg: &RunConfig, out: &Output, quiet: bool) -> Result<i32, Failure> {
    let spec = cfg.system.build()?;
    let grid = grid_of(cfg)?;
    let gss = GroundStates::solve(cfg, &spec, &grid)?;
    let u0 = initial_state(cfg, &spec, &grid, gss.for_initial_data())?;
    let c = classify_threshold(&u0, &spec, &gss.unit)?;
    out.write_json("classification.json", to_value(&c))?;
    if !quiet {
        println!(
            "{}  ratio_QE = {:.8}  ratio_QK = {:.8}",
            to_value(&c.verdict).as_str().unwrap_or_default(),
            c.ratio_qe,
            c.ratio_qk
        );
    }
    Ok(0)
}

fn radii(cfg: &RunConfig) -> DiagnosticsRadii {
    DiagnosticsRadii {
        r_weight: cfg.diagnostics.r_weight,
        r_cutoff: cfg.diagnostics.r_cutoff,
        r_loc: cfg.diagnostics.r_loc,
    }
}

fn max_drift(traj: &Trajectory, f: impl Fn(&crate::diagnostics::DiagnosticsRecord) -> f64) -> f64 {
    let first = f(&traj.records[0]);
    let scale = if first != 0.0 { first.abs() } else { 1.0 };
    traj.records.iter().map(|r| (f(r) - first).abs() / scale).fold(0.0, f64::max)
}

fn run_summary(traj: &Trajectory, cfg: &RunConfig) -> Value {
    json!({
        "outcome": to_value(&traj.outcome),
        "steps": traj.steps,
        "records": traj.records.len(),
        "guards": {
            "kinetic_guard": cfg.evolve.kinetic_guard,
            "tail_guard": cfg.evolve.tail_guard,
        },
        "max_relative_drift": {
            "Q": max_drift(traj, |r| r.q),
            "E": max_drift(traj, |r| r.e_beta),
        },
        "final": to_value(traj.records.last().expect("at least one record")),
    })
}

fn outcome_code(outcome: &Outcome, quiet: bool) -> i32 {
    if !quiet {
        println!("outcome: {}", outcome.label());
    }
    match outcome {
        Outcome::Completed => 0,
        _ => 1,
    }
}

fn cmd_evolve(cfg: &RunConfig, out: &Output, quiet: bool) -> Result<i32, Failure> {
    let spec = cfg.system.build()?;
    let grid = grid_of(cfg)?;
    let gss = GroundStates::solve(cfg, &spec, &grid)?;
    let u0 = initial_state(cfg, &spec, &grid, gss.for_initial_data())?;
    let classification = classify_threshold(&u0, &spec, &gss.unit)?;
    let recorder = Recorder::new(&spec, &grid, radii(cfg), Some(&gss.unit))?;
    let mut traj = evolve(&u0, &spec, &cfg.evolve.options(), |s| recorder.record(s))?;
    traj.fill_centered_mprime();
    out.write_csv("trajectory.csv", &trajectory_csv(&traj.records))?;
    let mut summary = run_summary(&traj, cfg);
    summary["command"] = json!("evolve");
    summary["classification"] = to_value(&classification);
    out.write_json("evolve.json", summary)?;
    Ok(outcome_code(&traj.outcome, quiet))
}

fn cmd_morawetz(cfg: &RunConfig, out: &Output, quiet: bool) -> Result<i32, Failure> {
    let spec = cfg.system.build()?;
    let grid = grid_of(cfg)?;
    let pairs = cfg.morawetz.resolved_pairs(cfg.evolve.t_end);
    for [r, t] in &pairs {
        if !(*r > 0.0 && *r < grid.r_max()) || !(*t >= 0.0 && *t <= cfg.evolve.t_end + 1e-12) {
            return Err(Failure::config(format!(
                "morawetz pair (R = {r}, T = {t}) needs 0 < R < r_max and 0 <= T <= t_end"
            )));
        }
    }
    let gss = GroundStates::solve(cfg, &spec, &grid)?;
    let u0 = initial_state(cfg, &spec, &grid, gss.for_initial_data())?;
    let recorder = Recorder::new(&spec, &grid, radii(cfg), Some(&gss.unit))?;
    let mut l3: Vec<Vec<f64>> = Vec::new();
    let mut traj = evolve(&u0, &spec, &cfg.evolve.options(), |s| {
        l3.push(
            pairs
                .iter()
                .map(|[r, _]| crate::diagnostics::localized_l3(s, *r))
                .collect(),
        );
        recorder.record(s)
    })?;
    traj.fill_centered_mprime();

    let mut table = String::from("R,T,averaged_L3\n");
    let mut rows = Vec::new();
    for (j, [r, t]) in pairs.iter().enumerate() {
        let series: Vec<(f64, f64)> = traj.records.iter().zip(&l3).map(|(rec, v)| (rec.t, v[j])).collect();
        let avg = crate::diagnostics::averaged_morawetz(&series, *t);
        let value = match avg {
            Ok(v) => Some(v),
            // a guard stop can leave the window uncovered
            Err(Error::InvalidArgument(_)) => None,
            Err(e) => return Err(e.into()),
        };
        table.push_str(&format!("{r},{t},{}\n", value.map(|v| v.to_string()).unwrap_or_default()));
        rows.push(json!({ "R": r, "T": t, "averaged_L3": value }));
    }
    let gaps = |f: &dyn Fn(&crate::diagnostics::DiagnosticsRecord) -> f64| {
        traj.records
            .iter()
            .filter_map(|r| r.m_prime_fd.map(|fd| (fd - f(r)).abs()))
            .fold(0.0, f64::max)
    };
    out.write_csv("morawetz.csv", &trajectory_csv(&traj.records))?;
    out.write_csv("morawetz_table.csv", &table)?;
    let mut summary = run_summary(&traj, cfg);
    summary["command"] = json!("morawetz");
    summary["averaged_morawetz"] = json!(rows);
    summary["mprime_check"] = json!({
        "max_gap_formula": gaps(&|r| r.m_prime),
        "max_gap_semi_discrete": gaps(&|r| r.m_prime_sd),
        "record_spacing": cfg.evolve.dt * cfg.evolve.record_every as f64,
    });
    out.write_json("morawetz.json", summary)?;
    Ok(outcome_code(&traj.outcome, quiet))
}
