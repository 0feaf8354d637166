//! Unit convention.
//!
//! Every public quantity in this crate is dimensionless:
//!
//! * lengths are measured in Compton lengths `λ_C = ħ / m₀c`,
//! * energies (the eigenvalue `γ`) in units of `m₀c²`,
//! * potentials as `f(z) = U(z) / m₀c²`.
//!
//! The spectral gap is therefore `(-1, 1)` and the localization bound is
//! `Δz > 1/2`.

/// Zero-sized marker for the dimensionless convention above.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Units;

/// Upper edge of the spectral gap; the lower edge is its negative.
pub const GAP_EDGE: f64 = 1.0;

/// Half a Compton length, the strict lower bound on `Δz`.
pub const HALF_COMPTON: f64 = 0.5;

/// Exact magnitude of `∫ z φ χ dz` for any bound state.
pub const OVERLAP_MAGNITUDE: f64 = 0.25;
