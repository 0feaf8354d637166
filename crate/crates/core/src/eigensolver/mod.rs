//! In-gap bound states by two independent routes.
//!
//! * [`find_bound_states`]: the staggered Hamiltonian is symmetric
//!   tridiagonal in interleaved ordering `(φ₀, χ₀, φ₁, …, χₙ₋₁, φₙ)`;
//!   eigenvalues inside the gap come from Sturm-sequence bisection and
//!   eigenvectors from inverse iteration.
//! * [`find_states_shooting`]: RK4 from `z = 0` with parity initial data,
//!   matched to the decaying free tail at `z = L`.
//!
//! [`refine_state`] repeats either solve on doubled grids and extrapolates.

mod hamiltonian;
mod matrix;
mod refine;
mod shooting;
mod tridiag;

pub use hamiltonian::{assemble_hamiltonian, Hamiltonian, PotentialSamples, HARD_WALL_DIAGONAL};
pub use matrix::{find_bound_states, find_bound_states_in, spectrum_in_window};
pub(crate) use refine::assemble_refined;
pub use refine::{refine_state, solve_refined, CoarseLevel, RefineError, Refinement};
pub use shooting::{find_states_shooting, shoot, MatchResidual};
pub use tridiag::SymTridiagonal;

use crate::grid::Grid;
use crate::potentials::SymmetryViolation;
use crate::spinor::{normalize, DensityProfile, Spinor, SpinorError};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Largest admissible `ρ(±L) / max ρ`.
pub const LEAK_THRESHOLD: f64 = 1e-8;

/// Parity of the upper component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// `φ` even, `χ` odd.
    EvenPhi,
    /// `φ` odd, `χ` even.
    OddPhi,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::EvenPhi, Parity::OddPhi];

    /// Mirror factor of `φ` under `z ↦ -z`; `χ` carries the opposite sign.
    pub fn phi_sign(self) -> f64 {
        match self {
            Parity::EvenPhi => 1.0,
            Parity::OddPhi => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Parity::EvenPhi => Parity::OddPhi,
            Parity::OddPhi => Parity::EvenPhi,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::EvenPhi => "even_phi",
            Parity::OddPhi => "odd_phi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Matrix,
    Shooting,
}

impl Method {
    /// Nominal convergence order of the eigenvalue in `h`.
    pub fn order(self) -> u32 {
        match self {
            Method::Matrix => 2,
            Method::Shooting => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Matrix => "matrix",
            Method::Shooting => "shooting",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Open interval of `γ` searched; must lie inside `(-1, 1)`.
    pub gamma_window: (f64, f64),
    /// Grid-doubling passes in [`refine_state`].
    pub n_refine: u32,
    pub bisection_tol: f64,
    pub max_states: usize,
    /// `γ` mesh points per parity for shooting root brackets.
    pub scan_points: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gamma_window: (-0.999, 0.999),
            n_refine: 2,
            bisection_tol: 1e-12,
            max_states: 64,
            scan_points: 2000,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let (lo, hi) = self.gamma_window;
        if !(lo > -1.0 && hi < 1.0 && lo < hi) {
            return Err(SolverError::Options(format!(
                "gamma_window ({lo}, {hi}) must be an interval inside (-1, 1)"
            )));
        }
        if !(self.bisection_tol > 0.0) {
            return Err(SolverError::Options("bisection_tol must be positive".into()));
        }
        if self.scan_points < 2 {
            return Err(SolverError::Options("scan_points must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Symmetry(#[from] SymmetryViolation),
    #[error("invalid solver options: {0}")]
    Options(String),
    #[error("gamma = {0} lies outside the gap (-1, 1)")]
    OutsideGap(f64),
    #[error(
        "all {candidates} in-gap candidates touch the box edge (smallest leak {min_leak:.3e} > {LEAK_THRESHOLD:e}); \
         increase the half-width beyond L = {half_width}"
    )]
    BoxTooSmall {
        candidates: usize,
        min_leak: f64,
        half_width: f64,
    },
    #[error("potential samples do not match the grid: {0}")]
    Samples(String),
    #[error(transparent)]
    Spinor(#[from] SpinorError),
}

/// A normalized in-gap eigenpair on a specific grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundState {
    /// `E / m₀c²`; after refinement, the extrapolated value.
    pub gamma: f64,
    pub spinor: Spinor,
    pub parity: Parity,
    pub method: Method,
    /// `‖Hψ − γψ‖/‖ψ‖` for the matrix route; normalized Wronskian mismatch
    /// at the matching point for shooting.
    pub residual: f64,
    pub grid: Grid,
    /// `max(ρ(-L), ρ(L)) / max ρ`.
    pub boundary_leak: f64,
    /// `⟨ψ, Rψ⟩ / ⟨ψ, ψ⟩` for the reflection `R`; `±1` for a parity eigenstate.
    pub parity_overlap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<Refinement>,
}

impl BoundState {
    /// Largest `|φ(z) - sφ(-z)|` and `|χ(z) + sχ(-z)|` with `s` the parity sign.
    pub fn parity_residual(&self) -> f64 {
        let s = self.parity.phi_sign();
        let phi = self.spinor.phi();
        let chi = self.spinor.chi();
        let a = (0..phi.len())
            .map(|i| (phi[i] - s * phi[phi.len() - 1 - i]).abs())
            .fold(0.0, f64::max);
        let b = (0..chi.len())
            .map(|j| (chi[j] + s * chi[chi.len() - 1 - j]).abs())
            .fold(0.0, f64::max);
        a.max(b)
    }

    /// Estimated absolute error of `gamma` (from refinement, if any).
    pub fn gamma_error(&self) -> Option<f64> {
        self.refinement.as_ref().map(|r| r.gamma_error)
    }
}

/// Boundary leak of a density.
pub(crate) fn leak(rho: &[f64]) -> f64 {
    let max = rho.iter().fold(0.0f64, |m, &x| m.max(x));
    if max == 0.0 {
        return f64::INFINITY;
    }
    rho[0].max(rho[rho.len() - 1]) / max
}

/// Common post-processing: parity label, reproducible global sign,
/// normalization, leak.
pub(crate) fn finish_state(
    gamma: f64,
    raw: Spinor,
    grid: &Grid,
    method: Method,
    residual: f64,
) -> Result<BoundState, SolverError> {
    let overlap = raw.dot(&raw.reflected()) / raw.dot(&raw);
    let parity = if overlap >= 0.0 {
        Parity::EvenPhi
    } else {
        Parity::OddPhi
    };
    let c = grid.centre();
    let probe = match parity {
        Parity::EvenPhi => raw.phi()[c],
        Parity::OddPhi => 0.5 * (raw.chi()[c - 1] + raw.chi()[c]),
    };
    let scale = raw.phi().iter().chain(raw.chi()).fold(0.0f64, |m, x| m.max(x.abs()));
    let sign_ref = if probe.abs() > 1e-12 * scale {
        probe
    } else {
        // Fallback: the largest entry on the non-negative half.
        let (phi, chi) = (&raw.phi()[c..], &raw.chi()[c..]);
        phi.iter()
            .chain(chi)
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m })
    };
    let spinor = normalize(&raw, grid)?;
    let spinor = if sign_ref < 0.0 { spinor.scaled(-1.0) } else { spinor };
    let rho = DensityProfile::new(&spinor, grid)?;
    Ok(BoundState {
        gamma,
        boundary_leak: leak(&rho.rho),
        spinor,
        parity,
        method,
        residual,
        grid: grid.clone(),
        parity_overlap: overlap,
        refinement: None,
    })
}

/// Keeps leak-free states, or reports a box that is too small.
pub(crate) fn filter_leaky(
    candidates: Vec<BoundState>,
    grid: &Grid,
    max_states: usize,
) -> Result<Vec<BoundState>, SolverError> {
    let n = candidates.len();
    let min_leak = candidates.iter().map(|s| s.boundary_leak).fold(f64::INFINITY, f64::min);
    let mut kept: Vec<BoundState> = candidates
        .into_iter()
        .filter(|s| {
            let ok = s.boundary_leak <= LEAK_THRESHOLD;
            if !ok {
                log::debug!("dropping gamma = {} (leak {:.2e})", s.gamma, s.boundary_leak);
            }
            ok
        })
        .collect();
    if n > 0 && kept.is_empty() {
        return Err(SolverError::BoxTooSmall {
            candidates: n,
            min_leak,
            half_width: grid.half_width(),
        });
    }
    kept.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
    kept.truncate(max_states);
    Ok(kept)
}
