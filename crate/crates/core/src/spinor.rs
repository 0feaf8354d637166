//! Real two-component spinors sampled on a staggered grid.

use crate::grid::Grid;
use crate::quadrature::trapezoid;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinorError {
    #[error("spinor does not fit the grid: {phi} phi / {chi} chi samples for {n_cells} cells")]
    LengthMismatch { phi: usize, chi: usize, n_cells: usize },
    #[error("spinor has a non-finite entry")]
    NonFinite,
    #[error("spinor is identically zero")]
    Zero,
}

/// `(φ, χ)` with `φ` on the `n + 1` cell edges and `χ` on the `n` midpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpinor")]
pub struct Spinor {
    phi: Vec<f64>,
    chi: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSpinor {
    phi: Vec<f64>,
    chi: Vec<f64>,
}

impl TryFrom<RawSpinor> for Spinor {
    type Error = SpinorError;
    fn try_from(r: RawSpinor) -> Result<Self, SpinorError> {
        Spinor::new(r.phi, r.chi)
    }
}

impl Spinor {
    pub fn new(phi: Vec<f64>, chi: Vec<f64>) -> Result<Self, SpinorError> {
        if phi.len() != chi.len() + 1 || chi.is_empty() {
            return Err(SpinorError::LengthMismatch {
                phi: phi.len(),
                chi: chi.len(),
                n_cells: chi.len(),
            });
        }
        if phi.iter().chain(chi.iter()).any(|x| !x.is_finite()) {
            return Err(SpinorError::NonFinite);
        }
        Ok(Self { phi, chi })
    }

    /// Samples `φ(z)` and `χ(z)` at their respective grid points.
    pub fn from_fns(grid: &Grid, phi: impl Fn(f64) -> f64, chi: impl Fn(f64) -> f64) -> Result<Self, SpinorError> {
        Self::new(
            grid.phi_points().iter().map(|&z| phi(z)).collect(),
            grid.chi_points().iter().map(|&z| chi(z)).collect(),
        )
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn n_cells(&self) -> usize {
        self.chi.len()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<(), SpinorError> {
        if self.chi.len() != grid.n_cells() {
            return Err(SpinorError::LengthMismatch {
                phi: self.phi.len(),
                chi: self.chi.len(),
                n_cells: grid.n_cells(),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            phi: self.phi.iter().map(|x| x * factor).collect(),
            chi: self.chi.iter().map(|x| x * factor).collect(),
        }
    }

    /// The reflection `(φ(z), χ(z)) ↦ (φ(-z), -χ(-z))`, which commutes with
    /// the Hamiltonian of a symmetric potential.
    pub fn reflected(&self) -> Self {
        Self {
            phi: self.phi.iter().rev().copied().collect(),
            chi: self.chi.iter().rev().map(|x| -x).collect(),
        }
    }

    /// Euclidean inner product over all stored samples.
    pub(crate) fn dot(&self, other: &Self) -> f64 {
        let p: f64 = self.phi.iter().zip(&other.phi).map(|(a, b)| a * b).sum();
        let c: f64 = self.chi.iter().zip(&other.chi).map(|(a, b)| a * b).sum();
        p + c
    }
}

/// `χ` carried onto the `φ` points by two-point averaging.
///
/// The two endpoints copy the nearest midpoint value.
pub fn interpolate_chi_to_phi(spinor: &Spinor, grid: &Grid) -> Result<Vec<f64>, SpinorError> {
    spinor.check_grid(grid)?;
    Ok(chi_on_phi(&spinor.chi))
}

pub(crate) fn chi_on_phi(chi: &[f64]) -> Vec<f64> {
    let n = chi.len();
    let mut out = Vec::with_capacity(n + 1);
    out.push(chi[0]);
    out.extend(chi.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    out.push(chi[n - 1]);
    out
}

/// `ρ = φ² + χ̃²` on the `φ` points.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub rho: Vec<f64>,
}

impl DensityProfile {
    pub fn new(spinor: &Spinor, grid: &Grid) -> Result<Self, SpinorError> {
        let chi = interpolate_chi_to_phi(spinor, grid)?;
        let rho = spinor.phi.iter().zip(&chi).map(|(p, c)| p * p + c * c).collect();
        Ok(Self { rho })
    }

    pub fn integral(&self, grid: &Grid) -> f64 {
        trapezoid(&self.rho, grid.spacing())
    }

    /// Largest `|ρ(z) - ρ(-z)|` over the grid.
    pub fn evenness_residual(&self) -> f64 {
        let n = self.rho.len();
        (0..n / 2)
            .map(|i| (self.rho[i] - self.rho[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Rescales by a positive factor so that `∫ (φ² + χ̃²) dz = 1`.
pub fn normalize(spinor: &Spinor, grid: &Grid) -> Result<Spinor, SpinorError> {
    let norm = DensityProfile::new(spinor, grid)?.integral(grid);
    if !(norm > 0.0) {
        return Err(SpinorError::Zero);
    }
    let s = spinor.scaled(1.0 / norm.sqrt());
    // One corrective pass absorbs the rounding of the square root.
    let second = DensityProfile::new(&s, grid)?.integral(grid);
    Ok(s.scaled(1.0 / second.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn gaussian(grid: &Grid) -> Spinor {
        Spinor::from_fns(grid, |z| (-z * z / 2.0).exp(), |_| 0.0).unwrap()
    }

    #[test]
    fn constant_and_linear_chi_are_reproduced() {
        let g = make_grid(3.0, 30).unwrap();
        let s = Spinor::from_fns(&g, |_| 0.0, |_| 2.5).unwrap();
        let c = interpolate_chi_to_phi(&s, &g).unwrap();
        assert!(c.iter().all(|&x| x == 2.5));

        let s = Spinor::from_fns(&g, |_| 0.0, |z| z).unwrap();
        let c = interpolate_chi_to_phi(&s, &g).unwrap();
        for i in 1..g.n_cells() {
            assert!((c[i] - g.phi_points()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_is_second_order() {
        let err = |n: usize| {
            let g = make_grid(3.0, n).unwrap();
            let s = Spinor::from_fns(&g, |_| 0.0, f64::sin).unwrap();
            let c = interpolate_chi_to_phi(&s, &g).unwrap();
            (1..n)
                .map(|i| (c[i] - g.phi_points()[i].sin()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(100), err(200), err(400));
        assert!((e1 / e2 - 4.0).abs() < 0.05, "{}", e1 / e2);
        assert!((e2 / e3 - 4.0).abs() < 0.05, "{}", e2 / e3);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let g = make_grid(1.0, 4).unwrap();
        let s = Spinor::new(vec![0.0; 7], vec![0.0; 6]).unwrap();
        assert!(matches!(
            interpolate_chi_to_phi(&s, &g),
            Err(SpinorError::LengthMismatch { .. })
        ));
        assert!(Spinor::new(vec![0.0; 4], vec![0.0; 4]).is_err());
        assert_eq!(Spinor::new(vec![0.0, f64::NAN], vec![0.0]), Err(SpinorError::NonFinite));
    }

    #[test]
    fn gaussian_normalization_prefactor() {
        let g = make_grid(10.0, 2000).unwrap();
        let s = normalize(&gaussian(&g), &g).unwrap();
        let prefactor = s.phi()[g.centre()];
        let exact = std::f64::consts::PI.powf(-0.25);
        assert!((prefactor - exact).abs() < 1e-10, "{prefactor} vs {exact}");
        let norm = DensityProfile::new(&s, &g).unwrap().integral(&g);
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent_and_scale_free() {
        let g = make_grid(10.0, 200).unwrap();
        let s = Spinor::from_fns(&g, |z| (-z * z).exp(), |z| 0.3 * z * (-z * z).exp()).unwrap();
        let once = normalize(&s, &g).unwrap();
        let twice = normalize(&once, &g).unwrap();
        let scaled = normalize(&s.scaled(7.0), &g).unwrap();
        for (a, b) in once.phi().iter().zip(twice.phi()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
        for (a, b) in once.chi().iter().zip(scaled.chi()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn zero_spinor_cannot_be_normalized() {
        let g = make_grid(1.0, 4).unwrap();
        let s = Spinor::new(vec![0.0; 5], vec![0.0; 4]).unwrap();
        assert_eq!(normalize(&s, &g), Err(SpinorError::Zero));
    }
}
