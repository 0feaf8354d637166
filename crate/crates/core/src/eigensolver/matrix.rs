use super::hamiltonian::{assemble_hamiltonian, Hamiltonian};
use super::{filter_leaky, finish_state, BoundState, Method, SolverError, SolverOptions};
use crate::exec;
use crate::grid::Grid;
use crate::potentials::{require_symmetry, PotentialSpec};

/// Eigenvalues of `h` inside `[lo, hi)`, ascending, by Sturm bisection.
pub fn spectrum_in_window(h: &Hamiltonian, window: (f64, f64)) -> Vec<f64> {
    let t = h.tridiagonal();
    let (a, b) = (t.count_below(window.0), t.count_below(window.1));
    let idx: Vec<usize> = (a..b).collect();
    exec::map(&idx, |&k| t.kth_eigenvalue(k, window.0, window.1))
}

/// In-gap bound states of the lattice Hamiltonian on `grid`, ascending in `γ`.
///
/// States whose density reaches the box edge are discarded; if that removes
/// every candidate the box is reported as too small.
pub fn find_bound_states(
    spec: &PotentialSpec,
    grid: &Grid,
    opts: &SolverOptions,
) -> Result<Vec<BoundState>, SolverError> {
    opts.validate()?;
    require_symmetry(spec, grid)?;
    find_bound_states_in(&assemble_hamiltonian(spec, grid), opts)
}

/// As [`find_bound_states`] for an already assembled Hamiltonian.
pub fn find_bound_states_in(h: &Hamiltonian, opts: &SolverOptions) -> Result<Vec<BoundState>, SolverError> {
    let candidates = candidates_in(h, opts)?;
    filter_leaky(candidates, h.grid(), opts.max_states)
}

/// Every in-window eigenpair, leaky or not.
pub(crate) fn matrix_candidates(
    spec: &PotentialSpec,
    grid: &Grid,
    opts: &SolverOptions,
) -> Result<Vec<BoundState>, SolverError> {
    opts.validate()?;
    require_symmetry(spec, grid)?;
    candidates_in(&assemble_hamiltonian(spec, grid), opts)
}

fn candidates_in(h: &Hamiltonian, opts: &SolverOptions) -> Result<Vec<BoundState>, SolverError> {
    opts.validate()?;
    let gammas = spectrum_in_window(h, opts.gamma_window);
    let t = h.tridiagonal();
    exec::map(&gammas, |&gamma| {
        let v = t.eigenvector(gamma);
        let raw = h.from_vector(&v)?;
        let residual = h.residual(gamma, &raw);
        finish_state(gamma, raw, h.grid(), Method::Matrix, residual)
    })
    .into_iter()
    .collect()
}
