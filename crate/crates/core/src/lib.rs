//! Bound states of the one-dimensional Dirac equation in finite symmetric
//! scalar wells, together with numerical certificates for the overlap
//! identity `|∫ z φ χ dz| = 1/4` and the localization bound `Δz > 1/2`.
//!
//! All quantities are dimensionless: lengths in Compton lengths, energies
//! in units of the rest energy (see [`units`]).
//!
//! The stationary equations solved throughout are
//!
//! ```text
//! γ φ = -χ' + (1 + f) φ
//! γ χ =  φ' - (1 - f) χ
//! ```
//!
//! Two independent solvers are provided: a staggered-grid Hamiltonian
//! diagonalized by Sturm bisection ([`eigensolver::find_bound_states`]) and
//! parity shooting with RK4 ([`eigensolver::find_states_shooting`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod eigensolver;
pub mod exec;
pub mod grid;
pub mod nonlinear;
pub mod observables;
pub mod oracles;
pub mod potentials;
pub mod quadrature;
pub mod spinor;
pub mod units;

pub use eigensolver::{BoundState, Method, Parity, SolverOptions};
pub use grid::Grid;
pub use observables::{certify, Certificate};
pub use potentials::PotentialSpec;
pub use spinor::Spinor;
