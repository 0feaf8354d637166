//! Grid doubling with Richardson extrapolation of `γ`.

use super::matrix::matrix_candidates;
use super::shooting::shooting_candidates;
use super::{find_bound_states, find_states_shooting, BoundState, Method, SolverError, SolverOptions};
use crate::exec;
use crate::grid::Grid;
use crate::potentials::PotentialSpec;
use crate::spinor::Spinor;
use serde::Serialize;
use thiserror::Error;

/// Differences below this are treated as converged to rounding.
const CONVERGED: f64 = 1e-13;

/// Second-finest level, kept so observables can be error-estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseLevel {
    pub grid: Grid,
    pub spinor: Spinor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    /// `(n_cells, γ)` per level, coarsest first.
    pub levels: Vec<(usize, f64)>,
    /// Estimated error of the finest-grid `γ`.
    pub gamma_error: f64,
    /// `log₂` of successive difference ratios, when three levels exist.
    pub observed_order: Option<f64>,
    /// `false` if the level differences did not shrink monotonically; the
    /// finest value is then kept without extrapolation.
    pub monotone: bool,
    /// Order assumed by the extrapolation.
    pub assumed_order: u32,
    #[serde(skip)]
    pub coarse: Option<CoarseLevel>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("no {parity} state near gamma = {gamma} on the {n_cells}-cell grid during refinement")]
    StateLost {
        gamma: f64,
        parity: super::Parity,
        n_cells: usize,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Window half-width used to re-locate a state on a finer grid.
const TRACK: f64 = 1e-2;

fn relocate(
    state: &BoundState,
    spec: &PotentialSpec,
    grid: &Grid,
    opts: &SolverOptions,
) -> Result<BoundState, RefineError> {
    let found = match state.method {
        Method::Matrix => matrix_candidates(spec, grid, opts)?,
        Method::Shooting => {
            let (lo, hi) = opts.gamma_window;
            let narrow = SolverOptions {
                gamma_window: ((state.gamma - TRACK).max(lo), (state.gamma + TRACK).min(hi)),
                scan_points: 200,
                ..opts.clone()
            };
            shooting_candidates(spec, grid, &narrow, &[state.parity])?
        }
    };
    pick_nearest(found, state, grid)
}

fn pick_nearest(found: Vec<BoundState>, like: &BoundState, grid: &Grid) -> Result<BoundState, RefineError> {
    found
        .into_iter()
        .filter(|s| s.parity == like.parity && (s.gamma - like.gamma).abs() < TRACK)
        .min_by(|a, b| (a.gamma - like.gamma).abs().total_cmp(&(b.gamma - like.gamma).abs()))
        .ok_or(RefineError::StateLost {
            gamma: like.gamma,
            parity: like.parity,
            n_cells: grid.n_cells(),
        })
}

/// Extrapolates a level sequence (coarsest first) assuming error `∝ h^order`.
///
/// Returns `(value, error estimate, observed order, monotone)`.
pub(crate) fn extrapolate(values: &[f64], order: u32) -> (f64, f64, Option<f64>, bool) {
    let k = values.len();
    let fine = values[k - 1];
    if k < 2 {
        return (fine, f64::NAN, None, true);
    }
    let factor = f64::from(2u32.pow(order) - 1);
    let d_fine = fine - values[k - 2];
    let (monotone, observed) = if k >= 3 {
        let d_coarse = values[k - 2] - values[k - 3];
        if d_fine.abs() < CONVERGED && d_coarse.abs() < CONVERGED {
            (true, None)
        } else {
            let ok =
                d_fine.abs() < d_coarse.abs() && (d_fine.abs() < CONVERGED || d_fine.signum() == d_coarse.signum());
            (
                ok,
                crate::oracles::convergence_order(values[k - 3], values[k - 2], fine).ok(),
            )
        }
    } else {
        (true, None)
    };
    if monotone {
        (fine + d_fine / factor, d_fine.abs() / factor, observed, true)
    } else {
        (fine, d_fine.abs(), observed, false)
    }
}

/// Re-solves `state` on `n_refine` successively doubled grids and replaces
/// its eigenvalue with the Richardson extrapolation; the spinor comes from
/// the finest grid.
pub fn refine_state(state: &BoundState, spec: &PotentialSpec, opts: &SolverOptions) -> Result<BoundState, RefineError> {
    let mut chain = vec![state.clone()];
    for level in 1..=opts.n_refine {
        let grid = state.grid.refined(level);
        let next = relocate(chain.last().unwrap(), spec, &grid, opts)?;
        chain.push(next);
    }
    Ok(assemble_refined(chain, state.method.order()))
}

/// Folds a chain of the same state on grids `h, h/2, …` into one refined state.
pub(crate) fn assemble_refined(mut chain: Vec<BoundState>, order: u32) -> BoundState {
    if chain.len() < 2 {
        return chain.pop().unwrap();
    }
    let gammas: Vec<f64> = chain.iter().map(|s| s.gamma).collect();
    let levels = chain.iter().map(|s| (s.grid.n_cells(), s.gamma)).collect();
    let (gamma, gamma_error, observed_order, monotone) = extrapolate(&gammas, order);
    if !monotone {
        log::warn!("non-monotone refinement of gamma: {gammas:?}");
    }
    let mut finest = chain.pop().unwrap();
    let coarse = chain.pop().map(|s| CoarseLevel {
        grid: s.grid,
        spinor: s.spinor,
    });
    finest.gamma = gamma;
    finest.refinement = Some(Refinement {
        levels,
        gamma_error,
        observed_order,
        monotone,
        assumed_order: order,
        coarse,
    });
    finest
}

/// Solves on `grid` with the chosen method and refines every state found.
pub fn solve_refined(
    spec: &PotentialSpec,
    grid: &Grid,
    opts: &SolverOptions,
    method: Method,
) -> Result<Vec<BoundState>, RefineError> {
    let states = match method {
        Method::Matrix => find_bound_states(spec, grid, opts)?,
        Method::Shooting => find_states_shooting(spec, grid, opts)?,
    };
    exec::map(&states, |s| refine_state(s, spec, opts))
        .into_iter()
        .collect()
}
