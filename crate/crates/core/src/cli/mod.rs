//! The `dirac-confine` command line: `solve`, `sweep`, `thirring`, `oracle`.

mod config;

pub use config::{NonlinearConfig, OracleConfig, OutputConfig, Overrides, RunConfig, SweepAxis, ENV_JOBS, ENV_OUT};

use crate::eigensolver::{solve_refined, BoundState, RefineError, SolverError};
use crate::exec;
use crate::nonlinear::{solve_self_consistent_refined, NonlinearError, SelfConsistent};
use crate::observables::{certify, Certificate, Check};
use crate::oracles::{parse_fixture_table, square_well_fixtures, today, write_fixture_table, OracleFixture};
use crate::potentials::{require_symmetry, Family, PotentialSpec};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Exact header of the sweep table.
pub const SWEEP_HEADER: &str =
    "param,value,state_index,gamma,delta_z,abs_S,abs_first_moment,pass,err_gamma,err_delta_z";

pub const SWEEP_FILE: &str = "sweep.csv";
pub const SWEEP_DIAGNOSTICS: &str = "sweep_diagnostics.txt";
pub const ORACLE_FILE: &str = "square_well_oracle.txt";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Nonlinear(#[from] NonlinearError),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("certification failed: {0}")]
    Certify(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "dirac-confine",
    version,
    about = "Bound states and localization certificates for the 1D Dirac equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve, refine and certify every bound state.
    Solve(CommonArgs),
    /// Repeat `solve` along one potential parameter and write a CSV.
    Sweep(CommonArgs),
    /// Self-consistent state with the density-dependent potential.
    Thirring(CommonArgs),
    /// Regenerate square-well oracle fixtures and diff them.
    Oracle(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config and DIRAC_OUT).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (overrides the config and DIRAC_JOBS).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, short)]
    pub verbose: bool,
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Solve(a) | Command::Sweep(a) | Command::Thirring(a) | Command::Oracle(a) => a,
        }
    }
}

/// Runs a parsed command line. `Ok(false)` means some certificate (or
/// fixture comparison) failed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let args = cli.command.args();
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(&Overrides {
        out: args.out.clone(),
        jobs: args.jobs,
    })?;
    let jobs = cfg.jobs;
    exec::with_jobs(jobs, || match &cli.command {
        Command::Solve(_) => cmd_solve(&cfg),
        Command::Sweep(_) => cmd_sweep(&cfg),
        Command::Thirring(_) => cmd_thirring(&cfg),
        Command::Oracle(_) => cmd_oracle(&cfg),
    })
}

/// Per-state JSON document.
#[derive(Debug, Serialize)]
pub struct StateRecord<'a> {
    pub index: usize,
    #[serde(flatten)]
    pub state: &'a BoundState,
    pub certificate: &'a Certificate,
    pub checks: &'a [Check],
    pub pass: bool,
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn state_json(index: usize, state: &BoundState, cert: &Certificate) -> String {
    let record = StateRecord {
        index,
        state,
        certificate: cert,
        checks: &cert.checks,
        pass: cert.passed(),
    };
    let mut s = serde_json::to_string_pretty(&record).expect("state record serializes");
    s.push('\n');
    s
}

fn certify_all(states: &[BoundState]) -> Result<Vec<Certificate>, CliError> {
    states
        .iter()
        .map(|s| certify(s).map_err(|e| CliError::Certify(e.to_string())))
        .collect()
}

fn summary_line(index: usize, s: &BoundState, c: &Certificate) -> String {
    let e = &c.discretization_error_estimates;
    format!(
        "{index:>3}  {:<8}  {:>15.12} ± {:<9.2e}  {:>10.6}  {:.6} ± {:<9.2e}  {}",
        s.parity.to_string(),
        s.gamma,
        e.gamma.unwrap_or(f64::NAN),
        c.delta_z,
        c.overlap_s.abs(),
        e.overlap_s,
        if c.passed() { "PASS" } else { "FAIL" }
    )
}

/// Writes `state_NNN.json` per bound state and prints a summary.
pub fn cmd_solve(cfg: &RunConfig) -> Result<bool, CliError> {
    let spec = cfg.potential()?;
    let grid = cfg.grid()?;
    require_symmetry(&spec, &grid).map_err(SolverError::from)?;
    let states = solve_refined(&spec, &grid, &cfg.solver, cfg.method)?;
    if states.is_empty() {
        println!("no bound states found");
        return Ok(true);
    }
    let certs = certify_all(&states)?;
    println!(
        "potential: {spec}  grid: L = {}, n = {}  method: {}",
        grid.half_width(),
        grid.n_cells(),
        cfg.method
    );
    println!("  #  parity    gamma                         delta_z     |S|");
    for (i, (s, c)) in states.iter().zip(&certs).enumerate() {
        write(&cfg.output.dir.join(format!("state_{i:03}.json")), &state_json(i, s, c))?;
        println!("{}", summary_line(i, s, c));
        for f in c.failures() {
            println!(
                "       failed {}: {:.3e} (tolerance {:.3e})",
                f.name, f.value, f.tolerance
            );
        }
    }
    Ok(certs.iter().all(Certificate::passed))
}

/// One row of the sweep table; field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub state_index: usize,
    pub gamma: f64,
    pub delta_z: f64,
    #[serde(rename = "abs_S")]
    pub abs_s: f64,
    pub abs_first_moment: f64,
    pub pass: bool,
    pub err_gamma: f64,
    pub err_delta_z: f64,
}

impl SweepRow {
    fn failed(param: &str, value: f64) -> Self {
        Self {
            param: param.to_string(),
            value,
            state_index: 0,
            gamma: f64::NAN,
            delta_z: f64::NAN,
            abs_s: f64::NAN,
            abs_first_moment: f64::NAN,
            pass: false,
            err_gamma: f64::NAN,
            err_delta_z: f64::NAN,
        }
    }
}

/// Rows for one parameter value, or a diagnostic.
fn sweep_point(cfg: &RunConfig, base: &PotentialSpec, param: &str, value: f64) -> Result<Vec<SweepRow>, String> {
    let grid = cfg.grid().map_err(|e| e.to_string())?;
    let spec = base.with_parameter(param, value).map_err(|e| e.to_string())?;
    let states = solve_refined(&spec, &grid, &cfg.solver, cfg.method).map_err(|e| e.to_string())?;
    states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let c = certify(s).map_err(|e| e.to_string())?;
            Ok(SweepRow {
                param: param.to_string(),
                value,
                state_index: i,
                gamma: s.gamma,
                delta_z: c.delta_z,
                abs_s: c.overlap_s.abs(),
                abs_first_moment: c.abs_first_moment,
                pass: c.passed(),
                err_gamma: s.gamma_error().unwrap_or(f64::NAN),
                err_delta_z: c.discretization_error_estimates.delta_z,
            })
        })
        .collect()
}

/// Sweep table text plus diagnostics, in parameter order.
pub fn sweep_table(cfg: &RunConfig) -> Result<(String, Vec<SweepRow>, Vec<String>), CliError> {
    let axis = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    let base = cfg.potential()?;
    let values = axis.values();
    let points = exec::map(&values, |&v| sweep_point(cfg, &base, &axis.parameter, v));
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for (&v, point) in values.iter().zip(points) {
        match point {
            Ok(r) if r.is_empty() => diagnostics.push(format!("{}={v}: no bound states", axis.parameter)),
            Ok(r) => rows.extend(r),
            Err(e) => {
                diagnostics.push(format!("{}={v}: {e}", axis.parameter));
                rows.push(SweepRow::failed(&axis.parameter, v));
            }
        }
    }
    Ok((to_csv(&rows, SWEEP_HEADER)?, rows, diagnostics))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<bool, CliError> {
    let (csv, rows, diagnostics) = sweep_table(cfg)?;
    write(&cfg.output.dir.join(SWEEP_FILE), &csv)?;
    let mut diag = String::new();
    for d in &diagnostics {
        let _ = writeln!(diag, "{d}");
        log::warn!("{d}");
    }
    write(&cfg.output.dir.join(SWEEP_DIAGNOSTICS), &diag)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!(
        "{} rows written to {}, {} failed",
        rows.len(),
        cfg.output.dir.join(SWEEP_FILE).display(),
        failed
    );
    Ok(failed == 0)
}

#[derive(Serialize)]
struct WSample {
    z: f64,
    w: f64,
}

/// Header from the field names (`header` when there are no rows), one
/// record per row.
fn to_csv<T: Serialize>(rows: &[T], header: &str) -> Result<String, CliError> {
    if rows.is_empty() {
        return Ok(format!("{header}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_self_consistent(dir: &Path, sc: &SelfConsistent) -> Result<Certificate, CliError> {
    let cert = certify(&sc.state).map_err(|e| CliError::Certify(e.to_string()))?;
    write(&dir.join("state.json"), &state_json(0, &sc.state, &cert))?;
    write(&dir.join("trace.csv"), &to_csv(&sc.trace, "n,gamma,delta_w")?)?;
    let profile: Vec<WSample> = sc
        .state
        .grid
        .phi_points()
        .iter()
        .zip(&sc.w)
        .map(|(&z, &w)| WSample { z, w })
        .collect();
    write(&dir.join("w_profile.csv"), &to_csv(&profile, "z,w")?)?;
    Ok(cert)
}

/// Self-consistent state, iteration trace and `W` profile.
pub fn cmd_thirring(cfg: &RunConfig) -> Result<bool, CliError> {
    let opts = cfg.nonlinear_options()?;
    let grid = cfg.grid()?;
    match solve_self_consistent_refined(&opts, &grid, &cfg.solver, cfg.solver.n_refine) {
        Ok(sc) => {
            let cert = write_self_consistent(&cfg.output.dir, &sc)?;
            println!("g = {}: converged in {} iterations", opts.coupling, sc.iterations());
            println!("{}", summary_line(0, &sc.state, &cert));
            for f in cert.failures() {
                println!(
                    "       failed {}: {:.3e} (tolerance {:.3e})",
                    f.name, f.value, f.tolerance
                );
            }
            Ok(cert.passed())
        }
        Err(NonlinearError::NotConverged {
            iterations,
            delta_w,
            best,
        }) => {
            write_self_consistent(&cfg.output.dir.join("best_iterate"), &best)?;
            Err(NonlinearError::NotConverged {
                iterations,
                delta_w,
                best,
            }
            .into())
        }
        Err(e) => Err(e.into()),
    }
}

/// Fixture rows for the configured potential.
pub fn oracle_fixtures(cfg: &RunConfig, generated: &str) -> Result<Vec<OracleFixture>, CliError> {
    let spec = cfg.raw_potential()?;
    let pairs = match spec.family() {
        Family::Zero => return Ok(Vec::new()),
        Family::SquareWell { depth, half_width } if !spec.is_inverted() => {
            if cfg.oracle.pairs.is_empty() {
                vec![(*depth, *half_width)]
            } else {
                cfg.oracle.pairs.clone()
            }
        }
        _ => return Err(CliError::Oracle(format!("no closed-form oracle for {spec}"))),
    };
    square_well_fixtures(&pairs, generated).map_err(|e| CliError::Oracle(e.to_string()))
}

/// Rows of `fresh` that have no matching root in `committed`, and vice versa.
pub fn fixture_diff(fresh: &[OracleFixture], committed: &[OracleFixture]) -> Vec<String> {
    let mut out = Vec::new();
    for f in fresh {
        if !committed.iter().any(|c| c.same_root(f)) {
            out.push(format!(
                "+ {} {} {} {} {:.13e}",
                f.family, f.depth, f.half_width, f.parity, f.gamma
            ));
        }
    }
    for c in committed {
        if !fresh.iter().any(|f| f.same_root(c)) {
            out.push(format!(
                "- {} {} {} {} {:.13e}",
                c.family, c.depth, c.half_width, c.parity, c.gamma
            ));
        }
    }
    out
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<bool, CliError> {
    let rows = oracle_fixtures(cfg, &today())?;
    let path = cfg.output.dir.join(ORACLE_FILE);
    write(&path, &write_fixture_table(&rows))?;
    println!("{} oracle roots written to {}", rows.len(), path.display());
    let Some(committed_path) = cfg.fixtures_path() else {
        return Ok(true);
    };
    let text =
        fs::read_to_string(&committed_path).map_err(|e| CliError::Io(format!("{}: {e}", committed_path.display())))?;
    let committed = parse_fixture_table(&text).map_err(|e| CliError::Oracle(e.to_string()))?;
    let diff = fixture_diff(&rows, &committed);
    println!("{} differences against {}", diff.len(), committed_path.display());
    for d in &diff {
        println!("  {d}");
    }
    Ok(diff.is_empty())
}
