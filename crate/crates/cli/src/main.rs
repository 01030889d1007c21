//! `freebound` command-line driver.
//!
//! Exit codes: 0 success, 1 configuration error, 2 monitor failure,
//! 3 solver error.

mod output;

use std::env;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use freebound::config::RunConfig;
use freebound::galerkin::run_from;
use freebound::model::pressure;
use freebound::verify::{coefficient_distance, mutation_sensitivity, Suite};
use freebound::{pi_bounds, stationary_xi, Error, Galerkin, GalerkinState, ModelParams, RhsVariant};
use rayon::prelude::*;

/// Overrides the output directory of `run` and `sweep`.
const OUTPUT_DIR_ENV: &str = "FREEBOUND_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "freebound", version, about = "Spectral Galerkin free-boundary compressible Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its results.
    Run {
        config: PathBuf,
        /// Output directory (takes precedence over the environment and the config).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the acceptance and invariant suite and print a pass/fail table.
    Verify {
        /// Take a, gamma, mu, P and R from this configuration.
        config: Option<PathBuf>,
        /// Run the suite against a deliberately broken right-hand side.
        #[arg(long, value_enum)]
        mutation: Option<Mutation>,
        /// Skip the mutation-sensitivity rows.
        #[arg(long)]
        no_mutations: bool,
    },
    /// Print the equilibrium, the boundary bracket and the smallness threshold.
    Stationary {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 5.0)]
        gamma: f64,
        #[arg(long = "P", default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        mu: f64,
        /// Initial boundary value for the bracket.
        #[arg(long)]
        pi0: Option<f64>,
        /// Upper bound of xi for the smallness threshold (defaults to xi*).
        #[arg(long)]
        xi_plus: Option<f64>,
    },
    /// Run one configuration for several values of a parameter, in parallel.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mutation {
    FlippedPressure,
    NoTruncation,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    #[value(name = "mu")]
    Mu,
    #[value(name = "N")]
    N,
    #[value(name = "R")]
    R,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Mu => "mu",
            Axis::N => "N",
            Axis::R => "R",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Exit {
    Ok = 0,
    Config = 1,
    Monitor = 2,
    Solver = 3,
}

impl Exit {
    fn of(err: &Error) -> Self {
        match err {
            Error::Config(_) | Error::InvalidParams { .. } | Error::InvalidInitialData(_) | Error::InsufficientResolution { .. } => {
                Exit::Config
            }
            Error::MonitorViolation { .. } => Exit::Monitor,
            _ => Exit::Solver,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Exit::Ok => "ok",
            Exit::Config => "config_error",
            Exit::Monitor => "monitor_failure",
            Exit::Solver => "solver_error",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, output } => cmd_run(&config, output),
        Command::Verify {
            config,
            mutation,
            no_mutations,
        } => cmd_verify(config.as_deref(), mutation, no_mutations),
        Command::Stationary {
            a,
            gamma,
            p,
            mu,
            pi0,
            xi_plus,
        } => cmd_stationary(a, gamma, p, mu, pi0, xi_plus),
        Command::Sweep {
            config,
            axis,
            values,
            output,
        } => cmd_sweep(&config, axis, &values, output),
    };
    ExitCode::from(code as u8)
}

fn load(path: &Path) -> Result<RunConfig, Exit> {
    RunConfig::from_path(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        Exit::Config
    })
}

fn output_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.output.directory.clone())
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Integrates `cfg` and returns the trajectory with its exit status; the
/// trajectory is partial when the run aborted.
fn integrate(cfg: &RunConfig, config_path: &Path) -> Result<(Galerkin, freebound::Trajectory, Exit, Option<String>), Exit> {
    let fail = |e: Error| {
        eprintln!("error: {}: {e}", config_path.display());
        Exit::of(&e)
    };
    let params = cfg.params().map_err(fail)?;
    let init = cfg.initial_data(&params, &base_dir(config_path)).map_err(fail)?;
    let system = Galerkin::new(params).map_err(fail)?;
    let state = system.initial_state(&init).map_err(fail)?;
    match run_from(&system, state, cfg.time.t_end, &cfg.output_times(), &cfg.run_options()) {
        Ok(traj) => Ok((system, traj, Exit::Ok, None)),
        Err(abort) => {
            let code = Exit::of(&abort.error);
            if abort.partial.is_empty() {
                return Err(fail(abort.error));
            }
            Ok((system, abort.partial, code, Some(abort.error.to_string())))
        }
    }
}

fn cmd_run(config_path: &Path, flag: Option<PathBuf>) -> Exit {
    let cfg = match load(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (system, traj, code, error) = match integrate(&cfg, config_path) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let dir = output_dir(flag, &cfg);
    let outcome = output::RunOutcome {
        config: &cfg,
        config_path,
        system: &system,
        traj: &traj,
        status: code.label(),
        error: error.clone(),
    };
    match output::write_run(&dir, &outcome) {
        Ok(files) => {
            let last = traj.records.last().expect("at least the initial record");
            println!(
                "{}: t = {} ({} records, {} steps), E = {:.10e}, dissipation = {:.6e}, pi = {:.12}",
                code.label(),
                last.t,
                traj.len(),
                traj.accepted_steps,
                last.total_energy,
                last.dissipation_cum,
                last.pi
            );
            for f in files {
                println!("  wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Solver;
        }
    }
    if let Some(e) = error {
        eprintln!("error: {e}");
    }
    code
}

fn cmd_verify(config: Option<&Path>, mutation: Option<Mutation>, no_mutations: bool) -> Exit {
    let base = match config {
        None => ModelParams::default(),
        Some(path) => {
            let cfg = match load(path) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match cfg.params() {
                // Each check fixes its own N; oversampling stays at the default.
                Ok(p) => match ModelParams::new(p.a, p.gamma, p.mu, p.p_ext, p.undamped, 32) {
                    Ok(p) => p,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return Exit::Config;
                    }
                },
                Err(e) => {
                    eprintln!("error: {e}");
                    return Exit::Config;
                }
            }
        }
    };
    let variant = match mutation {
        None => RhsVariant::Faithful,
        Some(Mutation::FlippedPressure) => RhsVariant::FlippedPressure,
        Some(Mutation::NoTruncation) => RhsVariant::NoTruncation,
    };
    println!(
        "suite: a = {}, gamma = {}, mu = {}, P = {}, R = {}, variant {:?}",
        base.a, base.gamma, base.mu, base.p_ext, base.undamped, variant
    );
    let mut report = Suite::with_base(base.clone(), variant).run_all();
    if mutation.is_none() && !no_mutations {
        report.checks.extend(mutation_sensitivity(&base));
    }
    for c in &report.checks {
        println!("{c}");
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", report.checks.len());
    if failed == 0 {
        Exit::Ok
    } else {
        Exit::Monitor
    }
}

fn cmd_stationary(a: f64, gamma: f64, p: f64, mu: f64, pi0: Option<f64>, xi_plus: Option<f64>) -> Exit {
    let params = match ModelParams::new(a, gamma, mu, p, 0, 1) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Config;
        }
    };
    let xs = stationary_xi(&params);
    println!("xi* = {xs:.15}");
    let p_star = pressure(xs, &params).expect("xi* > 0");
    println!("p(1/xi*) = {p_star:.15} (P = {p}, |difference| = {:.3e})", (p_star - p).abs());
    if let Some(pi0) = pi0 {
        if !(pi0 > 0.0) {
            eprintln!("error: pi0 must be positive, got {pi0}");
            return Exit::Config;
        }
        let (lo, hi) = pi_bounds(pi0, &params);
        println!("bracket for pi0 = {pi0}: [{lo}, {hi}]");
    }
    let xp = xi_plus.unwrap_or(xs);
    if !(xp > 0.0) {
        eprintln!("error: xi_plus must be positive, got {xp}");
        return Exit::Config;
    }
    let thr = params.smallness_threshold(xp);
    println!(
        "smallness threshold a gamma / xi_+^(gamma+1) at xi_+ = {xp}: {thr:.6e} (mu = {mu}: {})",
        if mu <= thr { "holds" } else { "does not hold" }
    );
    Exit::Ok
}

struct SweepRow {
    value: f64,
    status: Exit,
    final_energy: f64,
    xi_max: f64,
    xi_min: f64,
    dissipation_cum: f64,
    boundary_substeps: u64,
    final_state: Option<GalerkinState>,
    error: String,
}

fn cmd_sweep(config_path: &Path, axis: Axis, values: &[f64], flag: Option<PathBuf>) -> Exit {
    let cfg = match load(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let mut configs = Vec::with_capacity(values.len());
    for &v in values {
        let mut c = cfg.clone();
        match axis {
            Axis::Mu => c.model.mu = v,
            Axis::N | Axis::R => {
                if v < 0.0 || v.fract() != 0.0 {
                    eprintln!("error: {axis} values must be non-negative integers, got {v}");
                    return Exit::Config;
                }
                if axis == Axis::N {
                    c.model.n = v as usize;
                } else {
                    c.model.r = v as usize;
                }
            }
        }
        if let Err(e) = c.params() {
            eprintln!("error: {axis} = {v}: {e}");
            return Exit::Config;
        }
        configs.push((v, c));
    }
    let dir = output_dir(flag, &cfg);

    let rows: Vec<SweepRow> = configs
        .par_iter()
        .map(|(v, c)| {
            let run_dir = dir.join(format!("{axis}_{v}"));
            let empty = |status, error: String| SweepRow {
                value: *v,
                status,
                final_energy: f64::NAN,
                xi_max: f64::NAN,
                xi_min: f64::NAN,
                dissipation_cum: f64::NAN,
                boundary_substeps: 0,
                final_state: None,
                error,
            };
            let (system, traj, status, error) = match integrate(c, config_path) {
                Ok(r) => r,
                Err(code) => return empty(code, "run failed before the first record".into()),
            };
            let outcome = output::RunOutcome {
                config: c,
                config_path,
                system: &system,
                traj: &traj,
                status: status.label(),
                error: error.clone(),
            };
            if let Err(e) = output::write_run(&run_dir, &outcome) {
                return empty(Exit::Solver, e);
            }
            let last = traj.records.last().unwrap();
            SweepRow {
                value: *v,
                status,
                final_energy: last.total_energy,
                xi_max: traj.records.iter().map(|r| r.xi_max).fold(f64::NEG_INFINITY, f64::max),
                xi_min: traj.records.iter().map(|r| r.xi_min).fold(f64::INFINITY, f64::min),
                dissipation_cum: last.dissipation_cum,
                boundary_substeps: last.boundary_substeps,
                final_state: (status == Exit::Ok).then(|| traj.last_state().unwrap().clone()),
                error: error.unwrap_or_default(),
            }
        })
        .collect();

    // Distance of each final state to that of the last value (the
    // reference of a convergence study along N).
    let reference = rows.last().and_then(|r| r.final_state.clone());
    let path = dir.join("sweep_summary.csv");
    let written = (|| -> Result<(), Box<dyn std::error::Error>> {
        fs::create_dir_all(&dir)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record([
            "value",
            "final_energy",
            "max_xi",
            "min_xi",
            "dissipation_cum",
            "boundary_substeps",
            "distance_to_last",
            "status",
            "error",
        ])?;
        for r in &rows {
            let dist = match (&r.final_state, &reference) {
                (Some(s), Some(refs)) => coefficient_distance(s, refs),
                _ => f64::NAN,
            };
            w.write_record([
                format!("{:?}", r.value),
                format!("{:?}", r.final_energy),
                format!("{:?}", r.xi_max),
                format!("{:?}", r.xi_min),
                format!("{:?}", r.dissipation_cum),
                r.boundary_substeps.to_string(),
                format!("{dist:?}"),
                r.status.label().to_string(),
                r.error.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("error: cannot write {}: {e}", path.display());
        return Exit::Solver;
    }
    for r in &rows {
        println!(
            "{axis} = {:<10} {:<16} E = {:.10e}  dissipation = {:.6e}",
            r.value,
            r.status.label(),
            r.final_energy,
            r.dissipation_cum
        );
    }
    println!("wrote {}", path.display());
    rows.iter().map(|r| r.status).max().unwrap_or(Exit::Ok)
}
