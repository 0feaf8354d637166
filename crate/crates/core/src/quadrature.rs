//! Trapezoidal quadrature on the `φ` points.

use crate::grid::Grid;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expected {expected} samples, got {got}")]
pub struct LengthMismatch {
    pub expected: usize,
    pub got: usize,
}

/// Trapezoidal integral over `[-L, L]` of values sampled on `grid.phi_points()`.
pub fn quadrature(values: &[f64], grid: &Grid) -> Result<f64, LengthMismatch> {
    let expected = grid.n_cells() + 1;
    if values.len() != expected {
        return Err(LengthMismatch {
            expected,
            got: values.len(),
        });
    }
    Ok(trapezoid(values, grid.spacing()))
}

/// Trapezoid rule for uniformly spaced samples; the caller guarantees at
/// least two samples.
///
/// Mirror-image samples are paired before summation so that an odd
/// integrand on a symmetric grid cancels to rounding.
pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    let mut sum = 0.5 * (values[0] + values[n]);
    let (mut lo, mut hi) = (1, n - 1);
    while lo < hi {
        sum += values[lo] + values[hi];
        lo += 1;
        hi -= 1;
    }
    if lo == hi {
        sum += values[lo];
    }
    sum * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn constant_integrand() {
        let g = make_grid(10.0, 40).unwrap();
        let ones = vec![1.0; 41];
        assert!((quadrature(&ones, &g).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = make_grid(10.0, 400).unwrap();
        let v: Vec<f64> = g.phi_points().iter().map(|z| z * (1.0 + z * z).sin()).collect();
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let q = quadrature(&v, &g).unwrap();
        assert!(q.abs() <= 1e-13 * max * 20.0, "q = {q}");
    }

    #[test]
    fn quadratic_converges_at_second_order() {
        // ∫_{-1}^{1} z² dz = 2/3
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let g = make_grid(1.0, n).unwrap();
                let v: Vec<f64> = g.phi_points().iter().map(|z| z * z).collect();
                (quadrature(&v, &g).unwrap() - 2.0 / 3.0).abs()
            })
            .collect();
        assert!((errs[0] / errs[1] - 4.0).abs() < 1e-6);
        assert!((errs[1] / errs[2] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn wrong_length() {
        let g = make_grid(1.0, 4).unwrap();
        assert_eq!(quadrature(&[1.0; 4], &g), Err(LengthMismatch { expected: 5, got: 4 }));
    }
}
