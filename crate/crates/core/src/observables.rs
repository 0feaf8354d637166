//! Expectation values and the per-state confinement certificate.
//!
//! Products that mix the components are formed on the `φ` points with `χ`
//! interpolated there, and integrated with the trapezoid rule.

use crate::eigensolver::BoundState;
use crate::grid::Grid;
use crate::quadrature::trapezoid;
use crate::spinor::{chi_on_phi, Spinor, SpinorError};
use crate::units::{HALF_COMPTON, OVERLAP_MAGNITUDE};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `|∫ρ − 1|` for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-10;
/// Absolute floor added to every error-derived tolerance (rounding level).
pub const TOL_FLOOR: f64 = 1e-9;
/// Multiplier applied to Richardson error estimates in pass/fail decisions.
pub const ERROR_SAFETY: f64 = 2.0;
/// Upper limit on `|⟨φ, χ̃⟩| / (‖φ‖‖χ̃‖)`.
pub const INDEPENDENCE_LIMIT: f64 = 1.0 - 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("state is not normalized: ∫ρ dz = {0}")]
    NotNormalized(f64),
    #[error(transparent)]
    Spinor(#[from] SpinorError),
}

/// Raw integrals of one spinor on one grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub norm: f64,
    pub mean_z: f64,
    pub abs_first_moment: f64,
    pub second_moment: f64,
    /// `∫ z φ χ̃ dz`.
    pub overlap: f64,
    /// `∫ z φ φ' dz + ½ ∫ φ² dz` (signed).
    pub identity11_phi: f64,
    /// `∫ z χ χ' dz + ½ ∫ χ² dz` (signed).
    pub identity11_chi: f64,
    /// `|⟨φ, χ̃⟩| / (‖φ‖ ‖χ̃‖)`.
    pub independence: f64,
}

impl Moments {
    pub fn of(spinor: &Spinor, grid: &Grid) -> Result<Self, SpinorError> {
        spinor.check_grid(grid)?;
        let h = grid.spacing();
        let z = grid.phi_points();
        let phi = spinor.phi();
        let chi = chi_on_phi(spinor.chi());
        let n = phi.len();
        let rho: Vec<f64> = phi.iter().zip(&chi).map(|(p, c)| p * p + c * c).collect();
        let q = |f: &dyn Fn(usize) -> f64| {
            let v: Vec<f64> = (0..n).map(f).collect();
            trapezoid(&v, h)
        };

        // φ' lives on the midpoints; carried back to the edges like χ.
        let dphi_mid: Vec<f64> = phi.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let dphi = chi_on_phi(&dphi_mid);
        // χ' lives on the interior edges; the two end edges copy their neighbour.
        let raw_chi = spinor.chi();
        let mut dchi = vec![0.0; n];
        for i in 1..n - 1 {
            dchi[i] = (raw_chi[i] - raw_chi[i - 1]) / h;
        }
        dchi[0] = dchi[1];
        dchi[n - 1] = dchi[n - 2];

        let norm = trapezoid(&rho, h);
        let phi_sq = q(&|i| phi[i] * phi[i]);
        let chi_sq = q(&|i| chi[i] * chi[i]);
        let cross = q(&|i| phi[i] * chi[i]);
        Ok(Self {
            norm,
            mean_z: q(&|i| z[i] * rho[i]),
            abs_first_moment: q(&|i| z[i].abs() * rho[i]),
            second_moment: q(&|i| z[i] * z[i] * rho[i]),
            overlap: q(&|i| z[i] * phi[i] * chi[i]),
            identity11_phi: q(&|i| z[i] * phi[i] * dphi[i]) + 0.5 * phi_sq,
            identity11_chi: q(&|i| z[i] * chi[i] * dchi[i]) + 0.5 * chi_sq,
            independence: if phi_sq > 0.0 && chi_sq > 0.0 {
                cross.abs() / (phi_sq * chi_sq).sqrt()
            } else {
                0.0
            },
        })
    }

    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean_z * self.mean_z
    }
}

fn moments(state: &BoundState) -> Moments {
    Moments::of(&state.spinor, &state.grid).expect("bound state spinor matches its grid")
}

/// `⟨z⟩ = ∫ z ρ dz`.
pub fn mean_z(state: &BoundState) -> f64 {
    moments(state).mean_z
}

/// Signed `S = ∫ z φ χ̃ dz`; `|S| = 1/4` for every bound state.
pub fn overlap_integral(state: &BoundState) -> f64 {
    moments(state).overlap
}

/// `(|∫zφφ' + ½∫φ²|, |∫zχχ' + ½∫χ²|)` with staggered derivatives.
pub fn identity11_check(state: &BoundState) -> (f64, f64) {
    let m = moments(state);
    (m.identity11_phi.abs(), m.identity11_chi.abs())
}

/// `⟨z²⟩ − ⟨z⟩²`.
pub fn variance_z(state: &BoundState) -> f64 {
    moments(state).variance()
}

/// `∫ |z| ρ dz`.
pub fn abs_first_moment(state: &BoundState) -> f64 {
    moments(state).abs_first_moment
}

/// `|⟨φ, χ̃⟩| / (‖φ‖ ‖χ̃‖)`; below one unless the components are proportional.
pub fn component_independence(state: &BoundState) -> f64 {
    moments(state).independence
}

/// Discretization error estimate per certified quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimates {
    /// `richardson` when a coarser level was available, else `h_squared`.
    pub source: String,
    pub gamma: Option<f64>,
    pub mean_z: f64,
    pub abs_first_moment: f64,
    #[serde(rename = "overlap_S")]
    pub overlap_s: f64,
    pub variance: f64,
    pub delta_z: f64,
    pub identity11_phi: f64,
    pub identity11_chi: f64,
}

/// One verified identity or inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Quantity compared against `tolerance` (see each check's definition).
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub gamma: f64,
    pub norm_residual: f64,
    pub mean_z: f64,
    pub abs_first_moment: f64,
    #[serde(rename = "overlap_S")]
    pub overlap_s: f64,
    pub variance: f64,
    pub delta_z: f64,
    pub strictness_margin: f64,
    pub identity13_residual: f64,
    pub identity11_residual_phi: f64,
    pub identity11_residual_chi: f64,
    pub ineq14_satisfied: bool,
    pub ineq16_satisfied: bool,
    pub discretization_error_estimates: ErrorEstimates,
    #[serde(skip)]
    pub checks: Vec<Check>,
}

impl Certificate {
    /// True when every check passed.
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Extrapolated value and error estimate of one quantity.
#[derive(Clone, Copy)]
struct Est {
    value: f64,
    err: f64,
}

fn est(fine: f64, coarse: Option<f64>, h: f64) -> Est {
    match coarse {
        Some(c) => Est {
            value: fine + (fine - c) / 3.0,
            err: (fine - c).abs() / 3.0,
        },
        None => Est {
            value: fine,
            err: h * h * fine.abs().max(1.0),
        },
    }
}

/// Checks, in order: normalization, `⟨z⟩ = 0`, `|S| = 1/4`,
/// `∫|z|ρ ≥ 1/2`, `Δz > 1/2`, the integration-by-parts identity for both
/// components, the two chain steps and component independence.
///
/// Reported values are Richardson-extrapolated from the two finest levels
/// when the state carries a refinement; tolerances are the matching error
/// estimates (times [`ERROR_SAFETY`]) plus [`TOL_FLOOR`].
pub fn certify(state: &BoundState) -> Result<Certificate, CertifyError> {
    let fine = Moments::of(&state.spinor, &state.grid)?;
    let norm_residual = (fine.norm - 1.0).abs();
    if norm_residual > 1e-8 {
        return Err(CertifyError::NotNormalized(fine.norm));
    }
    let coarse = match state.refinement.as_ref().and_then(|r| r.coarse.as_ref()) {
        Some(c) => Some(Moments::of(&c.spinor, &c.grid)?),
        None => None,
    };
    let h = state.grid.spacing();
    let pick = |f: fn(&Moments) -> f64| est(f(&fine), coarse.as_ref().map(f), h);

    let mean = pick(|m| m.mean_z);
    let first = pick(|m| m.abs_first_moment);
    let overlap = pick(|m| m.overlap);
    let variance = pick(|m| m.variance());
    let width = pick(|m| m.variance().max(0.0).sqrt());
    let i11_phi = pick(|m| m.identity11_phi);
    let i11_chi = pick(|m| m.identity11_chi);

    let delta_z = variance.value.max(0.0).sqrt();
    let tol = |e: Est| TOL_FLOOR + ERROR_SAFETY * e.err;
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, tolerance: f64, passed: bool| {
        checks.push(Check {
            name: name.to_string(),
            value,
            tolerance,
            passed,
        })
    };

    push("norm", norm_residual, NORM_TOL, norm_residual <= NORM_TOL);
    let mean_tol = 1e-10 * first.value.max(1.0) + ERROR_SAFETY * mean.err;
    push("mean_z", mean.value.abs(), mean_tol, mean.value.abs() <= mean_tol);
    let id13 = (overlap.value.abs() - OVERLAP_MAGNITUDE).abs();
    push("overlap_identity", id13, tol(overlap), id13 <= tol(overlap));
    // value: ∫|z|ρ − 1/2, must exceed −tolerance
    let ineq14 = first.value - HALF_COMPTON >= -tol(first);
    push("first_moment_bound", first.value - HALF_COMPTON, tol(first), ineq14);
    // value: Δz − 1/2, must exceed the error estimate (strict bound)
    let margin = delta_z - HALF_COMPTON;
    let width_err = ERROR_SAFETY * width.err;
    let ineq16 = margin > width_err;
    push("width_bound", margin, width_err, ineq16);
    push(
        "parts_identity_phi",
        i11_phi.value.abs(),
        tol(i11_phi),
        i11_phi.value.abs() <= tol(i11_phi),
    );
    push(
        "parts_identity_chi",
        i11_chi.value.abs(),
        tol(i11_chi),
        i11_chi.value.abs() <= tol(i11_chi),
    );
    // Discrete chain steps hold exactly on the finest grid.
    let am = 2.0 * fine.abs_first_moment - 4.0 * fine.overlap.abs();
    push("chain_arithmetic_mean", am, 1e-12, am >= -1e-12);
    let schwarz = fine.second_moment * fine.norm - fine.abs_first_moment.powi(2);
    push("chain_schwarz", schwarz, 1e-12, schwarz >= -1e-12);
    push(
        "component_independence",
        fine.independence,
        INDEPENDENCE_LIMIT,
        fine.independence < INDEPENDENCE_LIMIT,
    );

    Ok(Certificate {
        gamma: state.gamma,
        norm_residual,
        mean_z: mean.value,
        abs_first_moment: first.value,
        overlap_s: overlap.value,
        variance: variance.value,
        delta_z,
        strictness_margin: margin,
        identity13_residual: id13,
        identity11_residual_phi: i11_phi.value.abs(),
        identity11_residual_chi: i11_chi.value.abs(),
        ineq14_satisfied: ineq14,
        ineq16_satisfied: ineq16,
        discretization_error_estimates: ErrorEstimates {
            source: if coarse.is_some() { "richardson" } else { "h_squared" }.to_string(),
            gamma: state.gamma_error(),
            mean_z: mean.err,
            abs_first_moment: first.err,
            overlap_s: overlap.err,
            variance: variance.err,
            delta_z: width.err,
            identity11_phi: i11_phi.err,
            identity11_chi: i11_chi.err,
        },
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{Method, Parity};
    use crate::grid::make_grid;
    use crate::spinor::normalize;

    /// A normalized fixture wrapped as a state (not an eigenstate).
    fn fixture(grid: &Grid, phi: impl Fn(f64) -> f64, chi: impl Fn(f64) -> f64) -> BoundState {
        let s = normalize(&Spinor::from_fns(grid, phi, chi).unwrap(), grid).unwrap();
        BoundState {
            gamma: 0.0,
            spinor: s,
            parity: Parity::EvenPhi,
            method: Method::Matrix,
            residual: f64::NAN,
            grid: grid.clone(),
            boundary_leak: 0.0,
            parity_overlap: 1.0,
            refinement: None,
        }
    }

    #[test]
    fn shifted_density_has_unit_mean() {
        let g = make_grid(15.0, 3000).unwrap();
        let s = fixture(&g, |z| (-(z - 1.0).powi(2) / 2.0).exp(), |_| 0.0);
        assert!((mean_z(&s) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_density_has_unit_variance() {
        // ρ = 1/(2√3) on [−√3, √3]: the grid ends on the support edges.
        let a = 3f64.sqrt();
        let g = make_grid(a, 20000).unwrap();
        let s = fixture(&g, |_| 1.0, |_| 0.0);
        assert!((variance_z(&s) - 1.0).abs() < 1e-8, "{}", variance_z(&s));
    }

    #[test]
    fn zero_lower_component_has_no_overlap() {
        let g = make_grid(10.0, 1000).unwrap();
        let s = fixture(&g, |z| (-z * z / 2.0).exp(), |_| 0.0);
        assert_eq!(overlap_integral(&s), 0.0);
    }

    #[test]
    fn integration_by_parts_for_a_gaussian() {
        let res = |n: usize| {
            let g = make_grid(12.0, n).unwrap();
            let s = fixture(&g, |z| (-z * z / 2.0).exp(), |z| z * (-z * z / 2.0).exp());
            identity11_check(&s)
        };
        let (p1, c1) = res(400);
        let (p2, c2) = res(800);
        assert!(p1 < 1e-3 && c1 < 1e-3);
        assert!((p1 / p2 - 4.0).abs() < 0.1, "{}", p1 / p2);
        assert!((c1 / c2 - 4.0).abs() < 0.1, "{}", c1 / c2);
    }

    #[test]
    fn proportional_components_fail_certification() {
        let g = make_grid(10.0, 1000).unwrap();
        let s = fixture(&g, |z| (-z * z / 2.0).exp(), |z| 0.3 * (-z * z / 2.0).exp());
        let c = certify(&s).unwrap();
        assert!(!c.passed());
        let names: Vec<&str> = c.failures().map(|f| f.name.as_str()).collect();
        assert!(names.contains(&"overlap_identity"), "{names:?}");
        assert_eq!(c.discretization_error_estimates.source, "h_squared");
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let g = make_grid(10.0, 100).unwrap();
        let mut s = fixture(&g, |z| (-z * z).exp(), |_| 0.0);
        s.spinor = s.spinor.scaled(2.0);
        assert!(matches!(certify(&s), Err(CertifyError::NotNormalized(_))));
    }

    #[test]
    fn certificate_json_has_the_listed_fields() {
        let g = make_grid(10.0, 100).unwrap();
        let s = fixture(&g, |z| (-z * z).exp(), |z| z * (-z * z).exp());
        let v = serde_json::to_value(certify(&s).unwrap()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        let mut want = vec![
            "gamma",
            "norm_residual",
            "mean_z",
            "abs_first_moment",
            "overlap_S",
            "variance",
            "delta_z",
            "strictness_margin",
            "identity13_residual",
            "identity11_residual_phi",
            "identity11_residual_chi",
            "ineq14_satisfied",
            "ineq16_satisfied",
            "discretization_error_estimates",
        ];
        want.sort_unstable();
        assert_eq!(keys, want);
    }

    #[test]
    fn refined_square_well_states_are_certified() {
        use crate::eigensolver::solve_refined;
        use crate::potentials::PotentialSpec;
        let g = make_grid(30.0, 1500).unwrap();
        let spec = PotentialSpec::square_well(0.5, 2.0).unwrap();
        for method in [Method::Matrix, Method::Shooting] {
            let states = solve_refined(&spec, &g, &Default::default(), method).unwrap();
            assert_eq!(states.len(), 2, "{method}");
            for s in &states {
                let c = certify(s).unwrap();
                let bad: Vec<_> = c.failures().collect();
                assert!(c.passed(), "{method} {}: {bad:?}", s.gamma);
                assert!(c.identity13_residual < 1e-6, "{}", c.identity13_residual);
                assert_eq!(c.discretization_error_estimates.source, "richardson");
            }
        }
    }

    #[test]
    fn identity_residual_shrinks_with_the_grid() {
        use crate::eigensolver::find_bound_states;
        use crate::potentials::PotentialSpec;
        let spec = PotentialSpec::square_well(0.5, 2.0).unwrap();
        let res = |n| {
            let g = make_grid(20.0, n).unwrap();
            let s = find_bound_states(&spec, &g, &Default::default()).unwrap().remove(0);
            let m = Moments::of(&s.spinor, &s.grid).unwrap();
            (m.overlap.abs() - 0.25).abs()
        };
        let ratio = res(1000) / res(2000);
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }
}
