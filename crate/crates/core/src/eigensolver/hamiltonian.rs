//! Staggered-grid Dirac Hamiltonian.
//!
//! In block form over `(φ on edges, χ on midpoints)`:
//!
//! ```text
//! H = [ diag(1 + f)      -D        ]      (Dχ)_i = (χ_{i+½} − χ_{i−½}) / h
//!     [   -Dᵀ       -diag(1 − f)   ]
//! ```
//!
//! Interleaving `(φ₀, χ₀, φ₁, χ₁, …, χₙ₋₁, φₙ)` makes `H` tridiagonal with
//! couplings `-1/h` between `φᵢ` and `χᵢ` and `+1/h` between `χᵢ` and
//! `φᵢ₊₁`. The hard walls `φ(±L) = 0` are imposed by decoupling the two end
//! rows and parking their diagonal at [`HARD_WALL_DIAGONAL`], outside the gap.

use super::tridiag::SymTridiagonal;
use super::SolverError;
use crate::grid::Grid;
use crate::potentials::PotentialSpec;
use crate::spinor::Spinor;
use nalgebra::DMatrix;

/// Diagonal entry of the decoupled hard-wall rows.
pub const HARD_WALL_DIAGONAL: f64 = 2.0;

/// Potential sampled on the `φ` and `χ` points of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSamples {
    pub phi: Vec<f64>,
    pub chi: Vec<f64>,
}

impl PotentialSamples {
    /// Cell-averaged samples of `spec` (point values for smooth families).
    pub fn from_spec(spec: &PotentialSpec, grid: &Grid) -> Self {
        let h = grid.spacing();
        Self {
            phi: grid.phi_points().iter().map(|&z| spec.cell_sample(z, h)).collect(),
            chi: grid.chi_points().iter().map(|&z| spec.cell_sample(z, h)).collect(),
        }
    }

    /// Adds a profile given on the `φ` points; midpoint values are averaged.
    pub fn plus_phi_profile(&self, w: &[f64]) -> Self {
        Self {
            phi: self.phi.iter().zip(w).map(|(f, w)| f + w).collect(),
            chi: self
                .chi
                .iter()
                .zip(w.windows(2))
                .map(|(f, w)| f + 0.5 * (w[0] + w[1]))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    grid: Grid,
    matrix: SymTridiagonal,
}

impl Hamiltonian {
    pub fn from_samples(grid: &Grid, f: &PotentialSamples) -> Result<Self, SolverError> {
        let n = grid.n_cells();
        if f.phi.len() != n + 1 || f.chi.len() != n {
            return Err(SolverError::Samples(format!(
                "{} phi / {} chi samples for {n} cells",
                f.phi.len(),
                f.chi.len()
            )));
        }
        let inv_h = 1.0 / grid.spacing();
        let mut diag = Vec::with_capacity(2 * n + 1);
        let mut off = Vec::with_capacity(2 * n);
        for j in 0..n {
            diag.push(1.0 + f.phi[j]);
            off.push(-inv_h);
            diag.push(-(1.0 - f.chi[j]));
            off.push(inv_h);
        }
        diag.push(1.0 + f.phi[n]);
        // Hard walls.
        diag[0] = HARD_WALL_DIAGONAL;
        diag[2 * n] = HARD_WALL_DIAGONAL;
        off[0] = 0.0;
        off[2 * n - 1] = 0.0;
        Ok(Self {
            grid: grid.clone(),
            matrix: SymTridiagonal::new(diag, off),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Order `2 n_cells + 1`.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn tridiagonal(&self) -> &SymTridiagonal {
        &self.matrix
    }

    /// Dense copy in interleaved ordering.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.matrix.diag()[i];
        }
        for (k, &e) in self.matrix.off().iter().enumerate() {
            m[(k, k + 1)] = e;
            m[(k + 1, k)] = e;
        }
        m
    }

    pub fn to_vector(&self, s: &Spinor) -> Vec<f64> {
        let n = self.grid.n_cells();
        let mut v = Vec::with_capacity(2 * n + 1);
        for j in 0..n {
            v.push(s.phi()[j]);
            v.push(s.chi()[j]);
        }
        v.push(s.phi()[n]);
        v
    }

    pub fn from_vector(&self, v: &[f64]) -> Result<Spinor, SolverError> {
        let phi = v.iter().step_by(2).copied().collect();
        let chi = v.iter().skip(1).step_by(2).copied().collect();
        Ok(Spinor::new(phi, chi)?)
    }

    /// `‖Hψ − γψ‖₂ / ‖ψ‖₂`.
    pub fn residual(&self, gamma: f64, s: &Spinor) -> f64 {
        let v = self.to_vector(s);
        let hv = self.matrix.apply(&v);
        let r: f64 = hv.iter().zip(&v).map(|(a, b)| (a - gamma * b).powi(2)).sum();
        let n: f64 = v.iter().map(|x| x * x).sum();
        (r / n).sqrt()
    }
}

/// Lattice Hamiltonian of `spec` on `grid`.
pub fn assemble_hamiltonian(spec: &PotentialSpec, grid: &Grid) -> Hamiltonian {
    Hamiltonian::from_samples(grid, &PotentialSamples::from_spec(spec, grid)).expect("samples built from the same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn dense_matrix_is_exactly_symmetric() {
        let g = make_grid(5.0, 40).unwrap();
        let h = assemble_hamiltonian(&PotentialSpec::gaussian_well(1.0, 1.0).unwrap(), &g);
        let d = h.to_dense();
        assert_eq!(d.nrows(), 81);
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn blocks_discretize_the_dirac_operator() {
        // Apply H to a smooth spinor away from the walls and compare with
        // γ-free right-hand sides of the ODEs.
        let g = make_grid(4.0, 400).unwrap();
        let spec = PotentialSpec::poschl_teller(0.7, 1.0).unwrap();
        let h = assemble_hamiltonian(&spec, &g);
        let phi = |z: f64| (-z * z).exp();
        let chi = |z: f64| z * (-z * z).exp();
        let dphi = |z: f64| -2.0 * z * (-z * z).exp();
        let dchi = |z: f64| (1.0 - 2.0 * z * z) * (-z * z).exp();
        let s = Spinor::from_fns(&g, phi, chi).unwrap();
        let hv = h.tridiagonal().apply(&h.to_vector(&s));
        let out = h.from_vector(&hv).unwrap();
        for i in 100..300 {
            let z = g.phi_points()[i];
            let expect = -dchi(z) + (1.0 + spec.eval(z)) * phi(z);
            assert!((out.phi()[i] - expect).abs() < 1e-3);
        }
        for j in 100..300 {
            let z = g.chi_points()[j];
            let expect = dphi(z) - (1.0 - spec.eval(z)) * chi(z);
            assert!((out.chi()[j] - expect).abs() < 1e-3);
        }
    }

    #[test]
    fn sample_length_checked() {
        let g = make_grid(1.0, 4).unwrap();
        let bad = PotentialSamples {
            phi: vec![0.0; 4],
            chi: vec![0.0; 4],
        };
        assert!(Hamiltonian::from_samples(&g, &bad).is_err());
    }
}
