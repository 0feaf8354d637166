//! Independent reference solutions used to validate the solvers.

use crate::eigensolver::{assemble_hamiltonian, Parity};
use crate::grid::Grid;
use crate::potentials::PotentialSpec;
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("gamma = {0} lies outside the gap (-1, 1)")]
    OutsideGap(f64),
    #[error("square well needs depth > 0 and half-width > 0 (got {depth}, {half_width})")]
    SquareWellParameters { depth: f64, half_width: f64 },
    #[error("dense cross-check is capped at {cap} cells (got {got})")]
    SizeCap { cap: usize, got: usize },
    #[error("level differences {coarse:e}, {fine:e} are not monotone; order undefined")]
    NonMonotone { coarse: f64, fine: f64 },
    #[error("fixture line {line}: {message}")]
    Fixture { line: usize, message: String },
}

/// Closed-form solution of the free equations (`f ≡ 0`) at a gap energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSolution {
    pub gamma: f64,
    pub kappa: f64,
    pub parity: Parity,
}

impl FreeSolution {
    /// `(φ(z), χ(z))`.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        let (c, s) = ((self.kappa * z).cosh(), (self.kappa * z).sinh());
        let r = self.kappa / (self.gamma + 1.0);
        match self.parity {
            Parity::EvenPhi => (c, r * s),
            Parity::OddPhi => (s, r * c),
        }
    }

    /// `(φ'(z), χ'(z))`.
    pub fn derivative(&self, z: f64) -> (f64, f64) {
        let (c, s) = ((self.kappa * z).cosh(), (self.kappa * z).sinh());
        let k = self.kappa;
        let r = k / (self.gamma + 1.0);
        match self.parity {
            Parity::EvenPhi => (k * s, r * k * c),
            Parity::OddPhi => (k * c, r * k * s),
        }
    }
}

/// Even branch `φ = cosh κz, χ = κ sinh κz / (γ + 1)`, odd branch with
/// `cosh` and `sinh` exchanged; `κ = √(1 − γ²)`.
pub fn free_space_solution(gamma: f64, parity: Parity) -> Result<FreeSolution, OracleError> {
    if !(gamma.abs() < 1.0) {
        return Err(OracleError::OutsideGap(gamma));
    }
    Ok(FreeSolution {
        gamma,
        kappa: (1.0 - gamma * gamma).sqrt(),
        parity,
    })
}

/// Pole-free matching function of the square well.
///
/// Inside (`f = −V`) `φ'' = −k²φ` with `k² = (γ + V)² − 1` and
/// `χ = φ' / (γ + 1 + V)`; outside `φ ∝ e^{−κz}`, `χ = −κφ/(γ + 1)`.
/// Continuity of `χ/φ` at `z = a` gives
///
/// * even φ: `k sin(ka)(γ + 1) − κ (γ + 1 + V) cos(ka) = 0`,
/// * odd φ:  `cos(ka)(γ + 1) + κ (γ + 1 + V) sin(ka)/k = 0`.
pub fn square_well_matching(gamma: f64, depth: f64, half_width: f64, parity: Parity) -> f64 {
    let k = ((gamma + depth).powi(2) - 1.0).max(0.0).sqrt();
    let kappa = (1.0 - gamma * gamma).sqrt();
    let ka = k * half_width;
    match parity {
        Parity::EvenPhi => k * ka.sin() * (gamma + 1.0) - kappa * (gamma + 1.0 + depth) * ka.cos(),
        Parity::OddPhi => {
            let sinc = if ka == 0.0 { half_width } else { ka.sin() / k };
            ka.cos() * (gamma + 1.0) + kappa * (gamma + 1.0 + depth) * sinc
        }
    }
}

const MATCH_SCAN: usize = 20_000;

/// In-gap eigenvalues of the square well for one parity, ascending.
pub fn square_well_spectrum(depth: f64, half_width: f64, parity: Parity) -> Result<Vec<f64>, OracleError> {
    if !(depth > 0.0 && half_width > 0.0 && depth.is_finite() && half_width.is_finite()) {
        return Err(OracleError::SquareWellParameters { depth, half_width });
    }
    // Interior oscillation requires γ > 1 − V.
    let lo = (1.0 - depth).max(-1.0) + 1e-12;
    let hi = 1.0 - 1e-12;
    if lo >= hi {
        return Ok(Vec::new());
    }
    let f = |g: f64| square_well_matching(g, depth, half_width, parity);
    let mesh: Vec<f64> = (0..=MATCH_SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / MATCH_SCAN as f64)
        .collect();
    let mut roots = Vec::new();
    let mut prev = (mesh[0], f(mesh[0]));
    for &g in &mesh[1..] {
        let v = f(g);
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if (prev.1 < 0.0) != (v < 0.0) && v != 0.0 {
            roots.push(bisect(&f, prev.0, g, prev.1));
        }
        prev = (g, v);
    }
    Ok(roots)
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest grid accepted by [`dense_cross_check`].
pub const DENSE_CAP: usize = 2000;

/// In-gap eigenvalues of the assembled Hamiltonian from a full dense
/// symmetric eigendecomposition, sorted ascending.
pub fn dense_cross_check(spec: &PotentialSpec, grid: &Grid) -> Result<Vec<f64>, OracleError> {
    dense_cross_check_window(spec, grid, (-0.999, 0.999))
}

pub fn dense_cross_check_window(
    spec: &PotentialSpec,
    grid: &Grid,
    window: (f64, f64),
) -> Result<Vec<f64>, OracleError> {
    if grid.n_cells() > DENSE_CAP {
        return Err(OracleError::SizeCap {
            cap: DENSE_CAP,
            got: grid.n_cells(),
        });
    }
    let dense = assemble_hamiltonian(spec, grid).to_dense();
    let eig = nalgebra::SymmetricEigen::new(dense);
    let mut v: Vec<f64> = eig
        .eigenvalues
        .iter()
        .copied()
        .filter(|&g| g >= window.0 && g < window.1)
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `log₂(|q_h − q_{h/2}| / |q_{h/2} − q_{h/4}|)`.
pub fn convergence_order(q_h: f64, q_h2: f64, q_h4: f64) -> Result<f64, OracleError> {
    let (coarse, fine) = (q_h - q_h2, q_h2 - q_h4);
    if coarse == 0.0 || fine == 0.0 || coarse.signum() != fine.signum() {
        return Err(OracleError::NonMonotone { coarse, fine });
    }
    Ok((coarse.abs() / fine.abs()).log2())
}

/// One row of the oracle fixture table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleFixture {
    pub family: String,
    pub depth: f64,
    pub half_width: f64,
    pub parity: Parity,
    pub gamma: f64,
    pub generated: String,
}

impl OracleFixture {
    /// Equal up to the generation date.
    pub fn same_root(&self, other: &Self) -> bool {
        self.family == other.family
            && self.depth == other.depth
            && self.half_width == other.half_width
            && self.parity == other.parity
            && format_gamma(self.gamma) == format_gamma(other.gamma)
    }
}

/// 14 significant digits.
pub fn format_gamma(g: f64) -> String {
    format!("{g:.13e}")
}

pub const FIXTURE_HEADER: &str = "# family depth half_width parity gamma generated";

/// Oracle roots for every `(V, a)` pair and both parities.
pub fn square_well_fixtures(pairs: &[(f64, f64)], generated: &str) -> Result<Vec<OracleFixture>, OracleError> {
    let mut rows = Vec::new();
    for &(depth, half_width) in pairs {
        for parity in Parity::BOTH {
            for gamma in square_well_spectrum(depth, half_width, parity)? {
                rows.push(OracleFixture {
                    family: "square_well".into(),
                    depth,
                    half_width,
                    parity,
                    gamma,
                    generated: generated.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_fixture_table(rows: &[OracleFixture]) -> String {
    let mut s = format!("{FIXTURE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            r.family,
            r.depth,
            r.half_width,
            r.parity,
            format_gamma(r.gamma),
            r.generated
        );
    }
    s
}

pub fn parse_fixture_table(text: &str) -> Result<Vec<OracleFixture>, OracleError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| OracleError::Fixture { line: i + 1, message };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", cols.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("`{s}`: {e}")));
        let parity = match cols[3] {
            "even_phi" => Parity::EvenPhi,
            "odd_phi" => Parity::OddPhi,
            other => return Err(err(format!("unknown parity `{other}`"))),
        };
        rows.push(OracleFixture {
            family: cols[0].to_string(),
            depth: num(cols[1])?,
            half_width: num(cols[2])?,
            parity,
            gamma: num(cols[4])?,
            generated: cols[5].to_string(),
        });
    }
    Ok(rows)
}

/// Today's UTC date as `YYYY-MM-DD`.
pub fn today() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = (secs / 86_400) as i64;
    // Civil-from-days (proleptic Gregorian).
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + i64::from(m <= 2);
    format!("{y:04}-{m:02}-{d:02}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn free_solution_special_values() {
        let s = free_space_solution(0.0, Parity::EvenPhi).unwrap();
        assert_eq!(s.kappa, 1.0);
        let (p, c) = s.eval(0.7);
        assert!((p - 0.7f64.cosh()).abs() < 1e-15 && (c - 0.7f64.sinh()).abs() < 1e-15);

        let s = free_space_solution(0.8, Parity::EvenPhi).unwrap();
        assert!((s.kappa - 0.6).abs() < 1e-15);
        let (p, c) = s.eval(40.0);
        assert!((c / p - 1.0 / 3.0).abs() < 1e-12);
        assert!(free_space_solution(1.0, Parity::OddPhi).is_err());
    }

    #[test]
    fn free_solution_satisfies_the_equations() {
        for parity in Parity::BOTH {
            for gamma in [-0.7, 0.1, 0.9] {
                let s = free_space_solution(gamma, parity).unwrap();
                for z in [-2.0, 0.0, 0.3, 1.7] {
                    let (p, c) = s.eval(z);
                    let (dp, dc) = s.derivative(z);
                    assert!((gamma * p - (-dc + p)).abs() < 1e-12);
                    assert!((gamma * c - (dp - c)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn square_well_reference_roots() {
        // Frozen from an independent brentq evaluation of the tan/cot forms.
        let even = square_well_spectrum(0.5, 2.0, Parity::EvenPhi).unwrap();
        assert_eq!(even.len(), 1);
        assert!((even[0] - 0.636_257_088_468_70).abs() < 1e-13);
        let odd = square_well_spectrum(0.5, 2.0, Parity::OddPhi).unwrap();
        assert!((odd[0] - 0.921_737_586_216_78).abs() < 1e-13);
        let two = square_well_spectrum(0.9, 2.0, Parity::EvenPhi).unwrap();
        assert_eq!(two.len(), 2);
        assert!((two[0] - 0.270_471_816_568_22).abs() < 1e-13);
        assert!((two[1] - 0.996_017_270_656_11).abs() < 1e-13);
        assert!(square_well_spectrum(0.2, 1.0, Parity::OddPhi).unwrap().is_empty());
    }

    #[test]
    fn tangent_form_holds_at_roots() {
        for (v, a) in [(0.5, 2.0), (0.3, 3.0), (1.5, 1.0)] {
            for g in square_well_spectrum(v, a, Parity::EvenPhi).unwrap() {
                let k = ((g + v).powi(2) - 1.0f64).sqrt();
                let kappa = (1.0 - g * g).sqrt();
                let lhs = k * (k * a).tan() * (g + 1.0);
                let rhs = kappa * (g + 1.0 + v);
                assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn vanishing_well_binds_nothing_oscillatory() {
        // For V → 0 the only roots approach the continuum edge.
        let r = square_well_spectrum(1e-4, 1.0, Parity::EvenPhi).unwrap();
        assert!(r.iter().all(|&g| g > 0.9999), "{r:?}");
        assert!(square_well_spectrum(0.0, 1.0, Parity::EvenPhi).is_err());
    }

    #[test]
    fn order_definition() {
        let q = |h: f64| 1.0 + 3.0 * h * h;
        assert!((convergence_order(q(0.1), q(0.05), q(0.025)).unwrap() - 2.0).abs() < 1e-9);
        let q = |h: f64| 1.0 + 3.0 * h;
        assert!((convergence_order(q(0.1), q(0.05), q(0.025)).unwrap() - 1.0).abs() < 1e-9);
        assert!(convergence_order(1.0, 0.9, 1.0).is_err());
    }

    #[test]
    fn dense_cap() {
        let g = make_grid(20.0, 2002).unwrap();
        assert!(matches!(
            dense_cross_check(&PotentialSpec::zero(), &g),
            Err(OracleError::SizeCap { .. })
        ));
        let g = make_grid(20.0, 100).unwrap();
        assert!(dense_cross_check(&PotentialSpec::zero(), &g).unwrap().is_empty());
    }

    #[test]
    fn fixture_table_round_trip() {
        let rows = square_well_fixtures(&[(0.5, 2.0)], "2026-01-01").unwrap();
        assert_eq!(rows.len(), 2);
        let text = write_fixture_table(&rows);
        let back = parse_fixture_table(&text).unwrap();
        assert!(rows.iter().zip(&back).all(|(a, b)| a.same_root(b)));
        assert!(parse_fixture_table("square_well 0.5 2 sideways 0.1 x\n").is_err());
    }

    #[test]
    fn today_is_a_date() {
        let t = today();
        assert_eq!(t.len(), 10);
        assert_eq!(&t[4..5], "-");
    }
}
