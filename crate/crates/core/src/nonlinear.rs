//! Self-consistent states with a density-dependent potential `W = g ρ`.
//!
//! `W` is added to the scalar potential in both component equations, so the
//! linear machinery applies unchanged to the frozen `f_seed + W`.

use crate::eigensolver::assemble_refined;
use crate::eigensolver::{
    find_bound_states_in, BoundState, Hamiltonian, Parity, PotentialSamples, SolverError, SolverOptions,
};
use crate::exec;
use crate::grid::Grid;
use crate::potentials::{require_symmetry, Family, PotentialSpec};
use crate::spinor::chi_on_phi;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearOptions {
    /// `g`; attractive for `g < 0`.
    pub coupling: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tol")]
    pub fixed_point_tol: f64,
    #[serde(default = "PotentialSpec::zero")]
    pub seed_spec: PotentialSpec,
}

fn default_alpha() -> f64 {
    0.3
}

fn default_max_iterations() -> usize {
    500
}

fn default_tol() -> f64 {
    1e-10
}

impl NonlinearOptions {
    pub fn new(coupling: f64, seed_spec: PotentialSpec) -> Self {
        Self {
            coupling,
            alpha: default_alpha(),
            max_iterations: default_max_iterations(),
            fixed_point_tol: default_tol(),
            seed_spec,
        }
    }

    pub fn validate(&self) -> Result<(), NonlinearError> {
        let bad = |m: String| Err(NonlinearError::Options(m));
        if !self.coupling.is_finite() {
            return bad(format!("coupling must be finite, got {}", self.coupling));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.fixed_point_tol > 0.0) {
            return bad(format!(
                "fixed_point_tol must be positive, got {}",
                self.fixed_point_tol
            ));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if matches!(self.seed_spec.family(), Family::Zero) && self.coupling >= 0.0 {
            return bad("a zero seed needs an attractive coupling (g < 0)".into());
        }
        Ok(())
    }
}

/// One iterate: `γ_n` of the selected state and `‖W_{n+1} − W_n‖∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub gamma: f64,
    pub delta_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfConsistent {
    /// Lowest even-`φ` state of `f_seed + w`.
    pub state: BoundState,
    /// `W` on the `φ` points.
    pub w: Vec<f64>,
    pub trace: Vec<TraceRow>,
}

impl SelfConsistent {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Largest `|W(z) − W(−z)|`.
    pub fn w_evenness(&self) -> f64 {
        let n = self.w.len();
        (0..n)
            .map(|i| (self.w[i] - self.w[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonlinearError {
    #[error("invalid nonlinear options: {0}")]
    Options(String),
    #[error("no even bound state at iteration {iteration}")]
    NoBoundState { iteration: usize },
    #[error("no fixed point after {iterations} iterations (last |dW| = {delta_w:.3e})")]
    NotConverged {
        iterations: usize,
        delta_w: f64,
        /// Iterate with the smallest `‖ΔW‖∞`.
        best: Box<SelfConsistent>,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Normalized `sech²(z/2)/4`, used when the seed has no bound state.
fn trial_density(grid: &Grid) -> Vec<f64> {
    grid.phi_points()
        .iter()
        .map(|&z| 0.25 / (0.5 * z).cosh().powi(2))
        .collect()
}

fn density(state: &BoundState) -> Vec<f64> {
    let chi = chi_on_phi(state.spinor.chi());
    state
        .spinor
        .phi()
        .iter()
        .zip(&chi)
        .map(|(p, c)| p * p + c * c)
        .collect()
}

fn lowest_even(
    base: &PotentialSamples,
    w: &[f64],
    grid: &Grid,
    solver: &SolverOptions,
) -> Result<Option<BoundState>, SolverError> {
    let h = Hamiltonian::from_samples(grid, &base.plus_phi_profile(w))?;
    let states = match find_bound_states_in(&h, solver) {
        Ok(s) => s,
        Err(SolverError::BoxTooSmall { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    Ok(states.into_iter().find(|s| s.parity == Parity::EvenPhi))
}

/// [`solve_self_consistent_with`] under default solver options.
pub fn solve_self_consistent(opts: &NonlinearOptions, grid: &Grid) -> Result<SelfConsistent, NonlinearError> {
    solve_self_consistent_with(opts, grid, &SolverOptions::default())
}

/// Under-relaxed fixed-point iteration `W ← (1−α) W + α g ρ[W]`.
///
/// The returned state and `w` belong to the same iterate, one whose update
/// `‖ΔW‖∞` fell below `fixed_point_tol`.
pub fn solve_self_consistent_with(
    opts: &NonlinearOptions,
    grid: &Grid,
    solver: &SolverOptions,
) -> Result<SelfConsistent, NonlinearError> {
    opts.validate()?;
    solver.validate()?;
    require_symmetry(&opts.seed_spec, grid).map_err(SolverError::from)?;
    let g = opts.coupling;
    let base = PotentialSamples::from_spec(&opts.seed_spec, grid);
    let zero = vec![0.0; grid.phi_points().len()];
    let rho0 = match lowest_even(&base, &zero, grid, solver)? {
        Some(s) => density(&s),
        None => trial_density(grid),
    };
    let mut w: Vec<f64> = rho0.iter().map(|r| g * r).collect();
    let mut trace = Vec::new();
    let mut best: Option<(f64, SelfConsistent)> = None;
    for n in 1..=opts.max_iterations {
        let state = lowest_even(&base, &w, grid, solver)?.ok_or(NonlinearError::NoBoundState { iteration: n })?;
        let rho = density(&state);
        let next: Vec<f64> = w
            .iter()
            .zip(&rho)
            .map(|(w, r)| (1.0 - opts.alpha) * w + opts.alpha * g * r)
            .collect();
        let delta_w = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        trace.push(TraceRow {
            n,
            gamma: state.gamma,
            delta_w,
        });
        log::debug!("iteration {n}: gamma = {:.12}, |dW| = {delta_w:.3e}", state.gamma);
        if delta_w < opts.fixed_point_tol {
            return Ok(SelfConsistent { state, w, trace });
        }
        if best.as_ref().is_none_or(|(d, _)| delta_w < *d) {
            best = Some((
                delta_w,
                SelfConsistent {
                    state,
                    w: w.clone(),
                    trace: trace.clone(),
                },
            ));
        }
        w = next;
    }
    let (_, best) = best.expect("at least one iteration ran");
    Err(NonlinearError::NotConverged {
        iterations: opts.max_iterations,
        delta_w: trace.last().map_or(f64::NAN, |t| t.delta_w),
        best: Box::new(best),
    })
}

/// Runs the iteration on `grid` and `levels` successive doublings, then
/// extrapolates `γ` as for a linear matrix state. `w` and the trace are
/// those of the finest grid.
pub fn solve_self_consistent_refined(
    opts: &NonlinearOptions,
    grid: &Grid,
    solver: &SolverOptions,
    levels: u32,
) -> Result<SelfConsistent, NonlinearError> {
    let grids: Vec<Grid> = (0..=levels).map(|k| grid.refined(k)).collect();
    let runs = exec::map(&grids, |g| solve_self_consistent_with(opts, g, solver))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut runs = runs;
    let finest = runs.pop().expect("at least one level");
    let mut chain: Vec<BoundState> = runs.into_iter().map(|r| r.state).collect();
    chain.push(finest.state);
    Ok(SelfConsistent {
        state: assemble_refined(chain, 2),
        w: finest.w,
        trace: finest.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::find_bound_states;
    use crate::grid::make_grid;
    use crate::observables::certify;

    fn soliton_opts() -> NonlinearOptions {
        NonlinearOptions::new(-1.0, PotentialSpec::zero())
    }

    #[test]
    fn zero_coupling_reproduces_the_linear_state() {
        let g = make_grid(20.0, 800).unwrap();
        let spec = PotentialSpec::square_well(0.5, 2.0).unwrap();
        let sc = solve_self_consistent(&NonlinearOptions::new(0.0, spec.clone()), &g).unwrap();
        assert_eq!(sc.iterations(), 1);
        let linear = find_bound_states(&spec, &g, &SolverOptions::default())
            .unwrap()
            .remove(0);
        assert_eq!(sc.state, linear);
        assert!(sc.w.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn attractive_soliton_from_zero_seed() {
        let g = make_grid(25.0, 1000).unwrap();
        let sc = solve_self_consistent(&soliton_opts(), &g).unwrap();
        assert!(sc.state.gamma.abs() < 1.0);
        assert!((sc.state.gamma - 0.8776).abs() < 1e-3, "{}", sc.state.gamma);
        assert!(sc.w_evenness() <= 1e-10);
        assert!(sc.trace.last().unwrap().delta_w < 1e-10);
        assert!(sc.w.iter().all(|&w| w <= 0.0));
    }

    #[test]
    fn full_mixing_reaches_the_same_fixed_point() {
        let g = make_grid(25.0, 600).unwrap();
        let slow = solve_self_consistent(&soliton_opts(), &g).unwrap();
        let fast = solve_self_consistent(
            &NonlinearOptions {
                alpha: 1.0,
                ..soliton_opts()
            },
            &g,
        )
        .unwrap();
        assert!(fast.iterations() < slow.iterations());
        assert!((fast.state.gamma - slow.state.gamma).abs() < 1e-8);
    }

    #[test]
    fn weak_coupling_limit() {
        let g = make_grid(20.0, 800).unwrap();
        let spec = PotentialSpec::square_well(0.5, 2.0).unwrap();
        let linear = find_bound_states(&spec, &g, &SolverOptions::default())
            .unwrap()
            .remove(0);
        let mut last = f64::NAN;
        for c in [-1e-2, -1e-4, -1e-6] {
            let sc = solve_self_consistent(&NonlinearOptions::new(c, spec.clone()), &g).unwrap();
            let d = (sc.state.gamma - linear.gamma).abs();
            assert!(last.is_nan() || d <= last);
            last = d;
        }
        assert!(last <= 1e-4);
    }

    #[test]
    fn refined_soliton_is_certified() {
        let g = make_grid(25.0, 1000).unwrap();
        let sc = solve_self_consistent_refined(&soliton_opts(), &g, &SolverOptions::default(), 2).unwrap();
        let c = certify(&sc.state).unwrap();
        let bad: Vec<_> = c.failures().collect();
        assert!(c.passed(), "{bad:?}");
        assert!(c.identity13_residual <= 1e-5);
        assert!(c.delta_z > 0.5);
    }

    #[test]
    fn option_validation() {
        let g = make_grid(10.0, 100).unwrap();
        let bad = [
            NonlinearOptions {
                alpha: 0.0,
                ..soliton_opts()
            },
            NonlinearOptions {
                alpha: 1.5,
                ..soliton_opts()
            },
            NonlinearOptions {
                fixed_point_tol: 0.0,
                ..soliton_opts()
            },
            NonlinearOptions::new(0.5, PotentialSpec::zero()),
        ];
        for o in bad {
            assert!(matches!(solve_self_consistent(&o, &g), Err(NonlinearError::Options(_))));
        }
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let g = make_grid(25.0, 400).unwrap();
        let o = NonlinearOptions {
            max_iterations: 3,
            ..soliton_opts()
        };
        match solve_self_consistent(&o, &g) {
            Err(NonlinearError::NotConverged { iterations, best, .. }) => {
                assert_eq!(iterations, 3);
                assert!(best.iterations() >= 1);
            }
            other => panic!("{other:?}"),
        }
    }
}
