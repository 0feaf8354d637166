//! Finite symmetric scalar potentials `f(z) = U(z) / m₀c²`.
//!
//! Wells are parametrized by a non-negative depth and are attractive
//! (`f ≤ 0`) unless the spec is `inverted`, which flips the overall sign.

use crate::grid::Grid;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use thiserror::Error;

/// Relative size of `|f|` beyond [`PotentialSpec::z_tail`].
pub const TAIL_EPS: f64 = 1e-10;

/// Relative tolerance of [`validate_symmetry`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("table needs at least two rows, got {0}")]
    TableTooShort(usize),
    #[error("table columns differ in length ({z} z-values, {f} f-values)")]
    TableColumns { z: usize, f: usize },
    #[error("table z-values must be strictly increasing (row {row}: {prev} then {next})")]
    NotIncreasing { row: usize, prev: f64, next: f64 },
    #[error("table has a non-finite entry at row {0}")]
    TableNonFinite(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{name} must be {requirement}, got {value}")]
    Parameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("family `{family}` has no parameter `{name}`")]
    UnknownParameter { family: &'static str, name: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Linearly interpolated potential table with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct Table {
    z: Vec<f64>,
    f: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTable {
    z: Vec<f64>,
    f: Vec<f64>,
}

impl TryFrom<RawTable> for Table {
    type Error = PotentialError;
    fn try_from(r: RawTable) -> Result<Self, PotentialError> {
        Table::new(r.z, r.f)
    }
}

impl Table {
    pub fn new(z: Vec<f64>, f: Vec<f64>) -> Result<Self, PotentialError> {
        if z.len() != f.len() {
            return Err(PotentialError::TableColumns { z: z.len(), f: f.len() });
        }
        if z.len() < 2 {
            return Err(PotentialError::TableTooShort(z.len()));
        }
        if let Some(row) = (0..z.len()).find(|&i| !(z[i].is_finite() && f[i].is_finite())) {
            return Err(PotentialError::TableNonFinite(row));
        }
        if let Some(i) = (1..z.len()).find(|&i| z[i] <= z[i - 1]) {
            return Err(PotentialError::NotIncreasing {
                row: i,
                prev: z[i - 1],
                next: z[i],
            });
        }
        Ok(Self { z, f })
    }

    /// Parses whitespace-separated `z f` rows; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, PotentialError> {
        let mut z = Vec::new();
        let mut f = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(PotentialError::Parse {
                    line: idx + 1,
                    message: format!("expected two columns, found {}", cols.len()),
                });
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|e| PotentialError::Parse {
                    line: idx + 1,
                    message: format!("`{s}`: {e}"),
                })
            };
            z.push(num(cols[0])?);
            f.push(num(cols[1])?);
        }
        Self::new(z, f)
    }

    pub fn load(path: &Path) -> Result<Self, PotentialError> {
        let text = std::fs::read_to_string(path).map_err(|e| PotentialError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# z f\n");
        for (z, f) in self.z.iter().zip(&self.f) {
            s.push_str(&format!("{z} {f}\n"));
        }
        s
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Linear interpolation; zero outside the tabulated range.
    pub fn eval(&self, z: f64) -> f64 {
        let n = self.z.len();
        if z < self.z[0] || z > self.z[n - 1] {
            return 0.0;
        }
        let i = self.z.partition_point(|&x| x <= z);
        if i == n {
            return self.f[n - 1];
        }
        let (z0, z1) = (self.z[i - 1], self.z[i]);
        let t = (z - z0) / (z1 - z0);
        self.f[i - 1] + t * (self.f[i] - self.f[i - 1])
    }

    /// Averages `f(z)` and `f(-z)` on the union of mirrored nodes.
    ///
    /// Returns the symmetric table and the largest deviation removed.
    pub fn symmetrized(&self) -> (Table, f64) {
        let mut nodes: Vec<f64> = self.z.iter().flat_map(|&z| [z.abs(), -z.abs()]).collect();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let mut deviation = 0.0f64;
        let f: Vec<f64> = nodes
            .iter()
            .map(|&z| {
                let (a, b) = (self.eval(z), self.eval(-z));
                deviation = deviation.max((a - b).abs() / 2.0);
                0.5 * (a + b)
            })
            .collect();
        (Table::new(nodes, f).expect("mirrored nodes stay increasing"), deviation)
    }
}

/// Shape of the well. Depths are magnitudes; widths are positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Zero,
    /// `-V` for `|z| < a`, `-V/2` at `|z| = a`, zero outside.
    SquareWell {
        depth: f64,
        half_width: f64,
    },
    /// `-V exp(-(z/w)²)`.
    GaussianWell {
        depth: f64,
        width: f64,
    },
    /// `-V / cosh²(z/w)`.
    PoschlTeller {
        depth: f64,
        width: f64,
    },
    /// `-V / (1 + (z/w)²)`.
    LorentzianWell {
        depth: f64,
        width: f64,
    },
    /// Tabulated values as given, without any sign convention.
    Tabulated {
        table: Table,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Zero => "zero",
            Family::SquareWell { .. } => "square_well",
            Family::GaussianWell { .. } => "gaussian_well",
            Family::PoschlTeller { .. } => "poschl_teller",
            Family::LorentzianWell { .. } => "lorentzian_well",
            Family::Tabulated { .. } => "tabulated",
        }
    }
}

/// A validated potential: a [`Family`] plus an optional sign flip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct PotentialSpec {
    family: Family,
    inverted: bool,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    family: Family,
    #[serde(default)]
    inverted: bool,
}

impl TryFrom<RawSpec> for PotentialSpec {
    type Error = PotentialError;
    fn try_from(r: RawSpec) -> Result<Self, PotentialError> {
        PotentialSpec::new(r.family, r.inverted)
    }
}

impl From<PotentialSpec> for RawSpec {
    fn from(s: PotentialSpec) -> Self {
        RawSpec {
            family: s.family,
            inverted: s.inverted,
        }
    }
}

fn check(name: &'static str, value: f64, ok: bool, requirement: &'static str) -> Result<(), PotentialError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(PotentialError::Parameter {
            name,
            requirement,
            value,
        })
    }
}

impl PotentialSpec {
    pub fn new(family: Family, inverted: bool) -> Result<Self, PotentialError> {
        match &family {
            Family::Zero | Family::Tabulated { .. } => {}
            Family::SquareWell { depth, half_width } => {
                check("depth", *depth, *depth >= 0.0, "non-negative")?;
                check("half_width", *half_width, *half_width > 0.0, "positive")?;
            }
            Family::GaussianWell { depth, width }
            | Family::PoschlTeller { depth, width }
            | Family::LorentzianWell { depth, width } => {
                check("depth", *depth, *depth >= 0.0, "non-negative")?;
                check("width", *width, *width > 0.0, "positive")?;
            }
        }
        Ok(Self { family, inverted })
    }

    pub fn zero() -> Self {
        Self::new(Family::Zero, false).unwrap()
    }

    pub fn square_well(depth: f64, half_width: f64) -> Result<Self, PotentialError> {
        Self::new(Family::SquareWell { depth, half_width }, false)
    }

    pub fn gaussian_well(depth: f64, width: f64) -> Result<Self, PotentialError> {
        Self::new(Family::GaussianWell { depth, width }, false)
    }

    pub fn poschl_teller(depth: f64, width: f64) -> Result<Self, PotentialError> {
        Self::new(Family::PoschlTeller { depth, width }, false)
    }

    pub fn lorentzian_well(depth: f64, width: f64) -> Result<Self, PotentialError> {
        Self::new(Family::LorentzianWell { depth, width }, false)
    }

    pub fn tabulated(table: Table) -> Self {
        Self::new(Family::Tabulated { table }, false).unwrap()
    }

    /// Same family with the overall sign of `f` flipped.
    pub fn inverted(&self) -> Self {
        Self {
            family: self.family.clone(),
            inverted: !self.inverted,
        }
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    fn sign(&self) -> f64 {
        if self.inverted {
            1.0
        } else {
            -1.0
        }
    }

    /// Depth with its sign: negative for wells, positive for inverted wells.
    /// `None` for the zero and tabulated families.
    pub fn signed_depth(&self) -> Option<f64> {
        match self.family {
            Family::SquareWell { depth, .. }
            | Family::GaussianWell { depth, .. }
            | Family::PoschlTeller { depth, .. }
            | Family::LorentzianWell { depth, .. } => Some(self.sign() * depth),
            _ => None,
        }
    }

    /// `f(z)`.
    pub fn eval(&self, z: f64) -> f64 {
        let s = self.sign();
        let x = z.abs();
        match &self.family {
            Family::Zero => 0.0,
            Family::SquareWell { depth, half_width } => {
                if x < *half_width {
                    s * depth
                } else if x == *half_width {
                    0.5 * s * depth
                } else {
                    0.0
                }
            }
            Family::GaussianWell { depth, width } => s * depth * (-(x / width).powi(2)).exp(),
            Family::PoschlTeller { depth, width } => s * depth / (x / width).cosh().powi(2),
            Family::LorentzianWell { depth, width } => s * depth / (1.0 + (x / width).powi(2)),
            // Tabulated values are taken literally (no |z|, no sign flip by
            // default); `inverted` still negates them.
            Family::Tabulated { table } => {
                let v = table.eval(z);
                if self.inverted {
                    -v
                } else {
                    v
                }
            }
        }
    }

    /// Value of `f` at `z` as seen from inside the segment `[lo, hi]`.
    ///
    /// Differs from [`eval`](Self::eval) only at a jump located on a
    /// segment end, where the one-sided limit from the interior is returned.
    /// Segments must not straddle a [`breakpoint`](Self::breakpoints).
    pub fn eval_segment(&self, z: f64, lo: f64, hi: f64) -> f64 {
        match &self.family {
            Family::SquareWell { depth, half_width } => {
                let mid = 0.5 * (lo + hi).abs();
                if mid < *half_width {
                    self.sign() * depth
                } else {
                    0.0
                }
            }
            _ => self.eval(z),
        }
    }

    /// Average of `f` over `[z - h/2, z + h/2]` for discontinuous families,
    /// the point value otherwise. Used to sample the lattice Hamiltonian.
    pub fn cell_sample(&self, z: f64, h: f64) -> f64 {
        match &self.family {
            Family::SquareWell { depth, half_width } => {
                let lo = (z - 0.5 * h).max(-half_width);
                let hi = (z + 0.5 * h).min(*half_width);
                // Lengths are measured with |.| so mirrored cells agree bitwise.
                let inside = (hi - lo).max(0.0);
                let mirrored = ((-z + 0.5 * h).min(*half_width) - (-z - 0.5 * h).max(-half_width)).max(0.0);
                self.sign() * depth * 0.5 * (inside + mirrored) / h
            }
            _ => self.eval(z),
        }
    }

    /// Positive abscissae where `f` or its derivative is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::SquareWell { half_width, .. } => vec![*half_width],
            Family::Tabulated { table } => {
                let mut b: Vec<f64> = table.z().iter().map(|z| z.abs()).filter(|&z| z > 0.0).collect();
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            }
            _ => Vec::new(),
        }
    }

    /// Distance beyond which `|f(z)| ≤ TAIL_EPS · |f(0)|`.
    pub fn z_tail(&self) -> f64 {
        match &self.family {
            Family::Zero => 0.0,
            Family::SquareWell { half_width, .. } => *half_width,
            // exp(-x²) ≤ ε
            Family::GaussianWell { width, .. } => width * (-TAIL_EPS.ln()).sqrt(),
            // cosh²(x) ≥ 1/ε
            Family::PoschlTeller { width, .. } => width * (1.0 / TAIL_EPS.sqrt()).acosh(),
            // 1 + x² ≥ 1/ε
            Family::LorentzianWell { width, .. } => width * (1.0 / TAIL_EPS - 1.0).sqrt(),
            Family::Tabulated { table } => table.z().iter().fold(0.0f64, |m, z| m.max(z.abs())),
        }
    }

    /// Names of the numeric parameters of this family.
    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self.family {
            Family::SquareWell { .. } => &["depth", "half_width"],
            Family::GaussianWell { .. } | Family::PoschlTeller { .. } | Family::LorentzianWell { .. } => {
                &["depth", "width"]
            }
            _ => &[],
        }
    }

    pub fn parameter(&self, name: &str) -> Result<f64, PotentialError> {
        let unknown = || PotentialError::UnknownParameter {
            family: self.family.name(),
            name: name.to_string(),
        };
        match (&self.family, name) {
            (Family::SquareWell { depth, .. }, "depth")
            | (Family::GaussianWell { depth, .. }, "depth")
            | (Family::PoschlTeller { depth, .. }, "depth")
            | (Family::LorentzianWell { depth, .. }, "depth") => Ok(*depth),
            (Family::SquareWell { half_width, .. }, "half_width") => Ok(*half_width),
            (Family::GaussianWell { width, .. }, "width")
            | (Family::PoschlTeller { width, .. }, "width")
            | (Family::LorentzianWell { width, .. }, "width") => Ok(*width),
            _ => Err(unknown()),
        }
    }

    /// Copy of the spec with one numeric parameter replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self, PotentialError> {
        self.parameter(name)?;
        let mut family = self.family.clone();
        match (&mut family, name) {
            (Family::SquareWell { depth, .. }, "depth")
            | (Family::GaussianWell { depth, .. }, "depth")
            | (Family::PoschlTeller { depth, .. }, "depth")
            | (Family::LorentzianWell { depth, .. }, "depth") => *depth = value,
            (Family::SquareWell { half_width, .. }, "half_width") => *half_width = value,
            (Family::GaussianWell { width, .. }, "width")
            | (Family::PoschlTeller { width, .. }, "width")
            | (Family::LorentzianWell { width, .. }, "width") => *width = value,
            _ => unreachable!("checked by parameter()"),
        }
        Self::new(family, self.inverted)
    }

    /// For tabulated specs, the mirror-averaged spec and the deviation removed.
    pub fn symmetrized(&self) -> (Self, f64) {
        match &self.family {
            Family::Tabulated { table } => {
                let (t, dev) = table.symmetrized();
                (
                    Self {
                        family: Family::Tabulated { table: t },
                        inverted: self.inverted,
                    },
                    dev,
                )
            }
            _ => (self.clone(), 0.0),
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inv = if self.inverted { ", inverted" } else { "" };
        match &self.family {
            Family::Zero => write!(f, "zero"),
            Family::SquareWell { depth, half_width } => {
                write!(f, "square_well(depth={depth}, half_width={half_width}{inv})")
            }
            Family::GaussianWell { depth, width }
            | Family::PoschlTeller { depth, width }
            | Family::LorentzianWell { depth, width } => {
                write!(f, "{}(depth={depth}, width={width}{inv})", self.family.name())
            }
            Family::Tabulated { table } => write!(f, "tabulated({} rows{inv})", table.z().len()),
        }
    }
}

/// `f(z)` for a spec.
pub fn eval_potential(spec: &PotentialSpec, z: f64) -> f64 {
    spec.eval(z)
}

/// Outcome of [`validate_symmetry`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// Largest `|f(z) - f(-z)|` over the `φ` and `χ` points.
    pub max_violation: f64,
    /// Non-negative `z` where the largest violation occurs.
    pub location: f64,
    pub tolerance: f64,
}

impl SymmetryReport {
    pub fn is_ok(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("potential is not symmetric: |f(z) - f(-z)| = {} at z = {} (tolerance {})", .0.max_violation, .0.location, .0.tolerance)]
pub struct SymmetryViolation(pub SymmetryReport);

/// Measures the asymmetry of `spec` on the grid points.
pub fn validate_symmetry(spec: &PotentialSpec, grid: &Grid) -> SymmetryReport {
    let mut worst = (0.0f64, 0.0f64);
    let mut fmax = 0.0f64;
    for &z in grid.phi_points().iter().chain(grid.chi_points()) {
        let (a, b) = (spec.eval(z), spec.eval(-z));
        fmax = fmax.max(a.abs());
        let d = (a - b).abs();
        if d > worst.0 {
            worst = (d, z.abs());
        }
    }
    SymmetryReport {
        max_violation: worst.0,
        location: worst.1,
        tolerance: SYMMETRY_TOL * (1.0 + fmax),
    }
}

/// [`validate_symmetry`] as a `Result`.
pub fn require_symmetry(spec: &PotentialSpec, grid: &Grid) -> Result<SymmetryReport, SymmetryViolation> {
    let r = validate_symmetry(spec, grid);
    if r.is_ok() {
        Ok(r)
    } else {
        Err(SymmetryViolation(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;

    #[test]
    fn piecewise_values() {
        assert_eq!(PotentialSpec::zero().eval(3.7), 0.0);
        let sw = PotentialSpec::square_well(0.5, 2.0).unwrap();
        assert_eq!(sw.eval(1.0), -0.5);
        assert_eq!(sw.eval(3.0), 0.0);
        assert_eq!(sw.eval(-2.0), -0.25);
        assert_eq!(PotentialSpec::poschl_teller(1.0, 1.0).unwrap().eval(0.0), -1.0);
        assert_eq!(sw.inverted().eval(1.0), 0.5);
        assert_eq!(sw.signed_depth(), Some(-0.5));
        assert_eq!(sw.inverted().signed_depth(), Some(0.5));
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(PotentialSpec::square_well(-0.1, 1.0).is_err());
        assert!(PotentialSpec::gaussian_well(1.0, 0.0).is_err());
        assert!(PotentialSpec::lorentzian_well(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn malformed_tables() {
        assert!(matches!(
            Table::new(vec![0.0, 1.0, 1.0], vec![0.0; 3]),
            Err(PotentialError::NotIncreasing { row: 2, .. })
        ));
        assert!(matches!(
            Table::new(vec![0.0], vec![0.0]),
            Err(PotentialError::TableTooShort(1))
        ));
        assert!(matches!(
            Table::parse("0 1\n1\n"),
            Err(PotentialError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Table::parse("0 1\n# c\n1 x\n"),
            Err(PotentialError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn table_parse_and_eval() {
        let t = Table::parse("# header\n-1 0\n0 -1\n\n1 0\n").unwrap();
        let spec = PotentialSpec::tabulated(t.clone());
        assert_eq!(spec.eval(0.5), -0.5);
        assert_eq!(spec.eval(-0.25), -0.75);
        assert_eq!(spec.eval(2.0), 0.0);
        assert_eq!(Table::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn parametric_families_validate() {
        let g = make_grid(10.0, 200).unwrap();
        for spec in [
            PotentialSpec::zero(),
            PotentialSpec::square_well(0.5, 2.0).unwrap(),
            PotentialSpec::gaussian_well(2.0, 0.5).unwrap(),
            PotentialSpec::poschl_teller(0.8, 1.0).unwrap(),
            PotentialSpec::lorentzian_well(1.0, 1.3).unwrap().inverted(),
        ] {
            let r = validate_symmetry(&spec, &g);
            assert!(r.is_ok());
            assert_eq!(r.max_violation, 0.0);
        }
    }

    #[test]
    fn asymmetric_table_is_reported() {
        let t = Table::new(vec![-2.0, -1.0, 0.0, 1.0, 2.0], vec![0.0, -0.4, -1.0, -0.5, 0.0]).unwrap();
        let spec = PotentialSpec::tabulated(t);
        let g = make_grid(2.0, 4).unwrap();
        let r = validate_symmetry(&spec, &g);
        assert!(!r.is_ok());
        assert!((r.max_violation - 0.1).abs() < 1e-12);
        assert_eq!(r.location, 1.0);
        assert!(require_symmetry(&spec, &g).is_err());

        let (sym, dev) = spec.symmetrized();
        assert!((dev - 0.05).abs() < 1e-12);
        assert!(validate_symmetry(&sym, &g).is_ok());
        assert!((sym.eval(1.0) + 0.45).abs() < 1e-15);
    }

    #[test]
    fn table_sampled_from_gaussian_is_symmetric() {
        let gw = PotentialSpec::gaussian_well(1.0, 1.0).unwrap();
        let z: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.125).collect();
        let f: Vec<f64> = z.iter().map(|&z| gw.eval(z)).collect();
        let spec = PotentialSpec::tabulated(Table::new(z, f).unwrap());
        let g = make_grid(6.0, 300).unwrap();
        assert!(validate_symmetry(&spec, &g).is_ok());
    }

    #[test]
    fn tails_are_small() {
        for spec in [
            PotentialSpec::square_well(0.5, 2.0).unwrap(),
            PotentialSpec::gaussian_well(2.0, 0.5).unwrap(),
            PotentialSpec::poschl_teller(0.8, 1.0).unwrap(),
            PotentialSpec::lorentzian_well(1.0, 1.3).unwrap(),
        ] {
            let zt = spec.z_tail();
            let f0 = spec.eval(0.0).abs();
            for k in 0..5 {
                let z = zt * (1.0 + 0.5 * k as f64) + 1e-9;
                assert!(spec.eval(z).abs() <= f0 * TAIL_EPS * (1.0 + 1e-9), "{spec} at {z}");
            }
        }
    }

    #[test]
    fn cell_sample_of_square_well() {
        let sw = PotentialSpec::square_well(1.0, 2.0).unwrap();
        assert_eq!(sw.cell_sample(0.0, 0.5), -1.0);
        assert_eq!(sw.cell_sample(2.0, 0.5), -0.5);
        assert!((sw.cell_sample(2.1, 0.4) + 0.25).abs() < 1e-15);
        assert_eq!(sw.cell_sample(3.0, 0.5), 0.0);
        assert_eq!(sw.cell_sample(-2.1, 0.4), sw.cell_sample(2.1, 0.4));
    }

    #[test]
    fn parameters_round_trip_through_with_parameter() {
        let sw = PotentialSpec::square_well(0.5, 2.0).unwrap();
        assert_eq!(
            sw.with_parameter("depth", 0.7).unwrap().parameter("depth").unwrap(),
            0.7
        );
        assert!(sw.with_parameter("width", 1.0).is_err());
        assert!(sw.with_parameter("depth", -1.0).is_err());
    }

    #[test]
    fn serde_shape() {
        let s: PotentialSpec = toml::from_str("family = \"square_well\"\ndepth = 0.5\nhalf_width = 2.0\n").unwrap();
        assert_eq!(s, PotentialSpec::square_well(0.5, 2.0).unwrap());
        let bad: Result<PotentialSpec, _> = toml::from_str("family = \"gaussian_well\"\ndepth = -1\nwidth = 1\n");
        assert!(bad.is_err());
    }

    proptest! {
        #[test]
        fn parametric_families_are_bitwise_even(
            z in -50.0f64..50.0,
            depth in 0.0f64..5.0,
            width in 0.05f64..5.0,
            inverted in any::<bool>(),
        ) {
            for spec in [
                PotentialSpec::square_well(depth, width).unwrap(),
                PotentialSpec::gaussian_well(depth, width).unwrap(),
                PotentialSpec::poschl_teller(depth, width).unwrap(),
                PotentialSpec::lorentzian_well(depth, width).unwrap(),
            ] {
                let spec = if inverted { spec.inverted() } else { spec };
                prop_assert_eq!(spec.eval(z).to_bits(), spec.eval(-z).to_bits());
                prop_assert!(spec.eval(z).abs() <= depth);
            }
        }
    }
}
