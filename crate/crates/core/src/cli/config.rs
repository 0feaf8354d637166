//! Run configuration, read from TOML.

use crate::eigensolver::{Method, SolverOptions};
use crate::grid::{make_grid, Grid, GridShape};
use crate::nonlinear::NonlinearOptions;
use crate::potentials::{PotentialSpec, Table};
use serde::Deserialize;
use std::path::{Path, PathBuf};

use super::CliError;

/// Environment variable overriding `output.dir`.
pub const ENV_OUT: &str = "DIRAC_OUT";
/// Environment variable overriding `jobs`.
pub const ENV_JOBS: &str = "DIRAC_JOBS";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Inline potential; exclusive with `potential_file`.
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    /// Two-column `z f` table, relative to the config file.
    #[serde(default)]
    pub potential_file: Option<PathBuf>,
    /// Replace a tabulated `f` by its even part before solving.
    #[serde(default)]
    pub symmetrize: bool,
    pub grid: GridShape,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub nonlinear: Option<NonlinearConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: Option<SweepAxis>,
    /// Worker threads; `0` uses every core.
    #[serde(default)]
    pub jobs: usize,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_method() -> Method {
    Method::Matrix
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearConfig {
    pub coupling: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub fixed_point_tol: Option<f64>,
    /// Defaults to the run's potential.
    #[serde(default)]
    pub seed_spec: Option<PotentialSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let d = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.max
                } else {
                    self.min + d * k as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// `(V, a)` pairs; defaults to the square well in `potential`.
    #[serde(default)]
    pub pairs: Vec<(f64, f64)>,
    /// Committed fixture table to diff against, relative to the config file.
    #[serde(default)]
    pub fixtures: Option<PathBuf>,
}

/// Command-line and environment overrides, applied in that precedence.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Self::parse(&text, &base).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Flags win over the environment, which wins over the file.
    pub fn apply(&mut self, flags: &Overrides) -> Result<(), CliError> {
        if let Some(out) = flags
            .out
            .clone()
            .or_else(|| std::env::var_os(ENV_OUT).map(PathBuf::from))
        {
            self.output.dir = out;
        }
        let env_jobs = match std::env::var(ENV_JOBS) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| CliError::Config(format!("{ENV_JOBS}=`{v}`: {e}")))?,
            ),
            Err(_) => None,
        };
        if let Some(j) = flags.jobs.or(env_jobs) {
            self.jobs = j;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        match (&self.potential, &self.potential_file) {
            (Some(_), Some(_)) => return bad("give either `potential` or `potential_file`, not both".into()),
            (None, None) => return bad("missing `potential` (or `potential_file`)".into()),
            _ => {}
        }
        self.grid()?;
        self.solver.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(s) = &self.sweep {
            if s.steps < 2 {
                return bad(format!("sweep.steps must be at least 2, got {}", s.steps));
            }
            if !(s.min.is_finite() && s.max.is_finite()) {
                return bad("sweep.min and sweep.max must be finite".into());
            }
            if let Some(spec) = &self.potential {
                spec.parameter(&s.parameter)
                    .map_err(|e| CliError::Config(e.to_string()))?;
            } else {
                return bad("sweeps need an inline parametric `potential`".into());
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        make_grid(self.grid.half_width, self.grid.n_cells).map_err(|e| CliError::Config(e.to_string()))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// The potential as configured, before any symmetrization.
    pub fn raw_potential(&self) -> Result<PotentialSpec, CliError> {
        match (&self.potential, &self.potential_file) {
            (Some(spec), _) => Ok(spec.clone()),
            (None, Some(path)) => {
                let table = Table::load(&self.resolve(path)).map_err(|e| CliError::Config(e.to_string()))?;
                Ok(PotentialSpec::tabulated(table))
            }
            (None, None) => Err(CliError::Config("missing potential".into())),
        }
    }

    /// The potential to solve, symmetrized when `symmetrize` is set.
    pub fn potential(&self) -> Result<PotentialSpec, CliError> {
        Ok(prepare(self.raw_potential()?, self.symmetrize))
    }

    pub fn nonlinear_options(&self) -> Result<NonlinearOptions, CliError> {
        let nl = self
            .nonlinear
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [nonlinear] section".into()))?;
        let seed = match &nl.seed_spec {
            Some(s) => prepare(s.clone(), self.symmetrize),
            None => self.potential()?,
        };
        let mut o = NonlinearOptions::new(nl.coupling, seed);
        if let Some(a) = nl.alpha {
            o.alpha = a;
        }
        if let Some(m) = nl.max_iterations {
            o.max_iterations = m;
        }
        if let Some(t) = nl.fixed_point_tol {
            o.fixed_point_tol = t;
        }
        o.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(o)
    }

    pub fn fixtures_path(&self) -> Option<PathBuf> {
        self.oracle.fixtures.as_deref().map(|p| self.resolve(p))
    }
}

fn prepare(spec: PotentialSpec, symmetrize: bool) -> PotentialSpec {
    if !symmetrize {
        return spec;
    }
    let (even, removed) = spec.symmetrized();
    if removed > 0.0 {
        log::warn!("symmetrize: removed an odd part of size {removed:.3e}");
    }
    even
}
