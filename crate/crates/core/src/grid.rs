//! Staggered computational grid on `[-L, L]`.
//!
//! `φ` lives on the `n + 1` cell edges, `χ` on the `n` cell midpoints.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("half-width must be positive and finite, got {0}")]
    HalfWidth(f64),
    #[error("cell count must be even, got {0}")]
    OddCells(usize),
    #[error("cell count must be at least 2, got {0}")]
    TooFewCells(usize),
}

/// Uniform staggered grid. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridShape", into = "GridShape")]
pub struct Grid {
    half_width: f64,
    n_cells: usize,
    spacing: f64,
    phi_points: Vec<f64>,
    chi_points: Vec<f64>,
}

/// Wire form of a grid: just its two defining parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridShape {
    pub half_width: f64,
    pub n_cells: usize,
}

impl TryFrom<GridShape> for Grid {
    type Error = GridError;
    fn try_from(s: GridShape) -> Result<Self, GridError> {
        Grid::new(s.half_width, s.n_cells)
    }
}

impl From<Grid> for GridShape {
    fn from(g: Grid) -> Self {
        g.shape()
    }
}

impl Grid {
    /// Builds a grid with `h = 2L / n_cells`.
    ///
    /// `n_cells` must be even so that `z = 0` is a `φ` point.
    pub fn new(half_width: f64, n_cells: usize) -> Result<Self, GridError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(GridError::HalfWidth(half_width));
        }
        if n_cells < 2 {
            return Err(GridError::TooFewCells(n_cells));
        }
        if !n_cells.is_multiple_of(2) {
            return Err(GridError::OddCells(n_cells));
        }
        let spacing = 2.0 * half_width / n_cells as f64;
        let half = n_cells / 2;
        // Built from the centre outwards so that the point sets are exactly
        // symmetric: z_{half+k} = -z_{half-k} bit for bit.
        let mut phi_points = vec![0.0; n_cells + 1];
        for k in 1..=half {
            let z = k as f64 * spacing;
            phi_points[half + k] = z;
            phi_points[half - k] = -z;
        }
        phi_points[0] = -half_width;
        phi_points[n_cells] = half_width;
        let mut chi_points = vec![0.0; n_cells];
        for k in 0..half {
            let z = (k as f64 + 0.5) * spacing;
            chi_points[half + k] = z;
            chi_points[half - 1 - k] = -z;
        }
        Ok(Self {
            half_width,
            n_cells,
            spacing,
            phi_points,
            chi_points,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Cell width `h`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn phi_points(&self) -> &[f64] {
        &self.phi_points
    }

    pub fn chi_points(&self) -> &[f64] {
        &self.chi_points
    }

    /// Index of `z = 0` among the `φ` points.
    pub fn centre(&self) -> usize {
        self.n_cells / 2
    }

    pub fn shape(&self) -> GridShape {
        GridShape {
            half_width: self.half_width,
            n_cells: self.n_cells,
        }
    }

    /// Same box, `2^levels` times as many cells.
    pub fn refined(&self, levels: u32) -> Self {
        Grid::new(self.half_width, self.n_cells << levels).expect("refining a valid grid")
    }
}

/// Builds a grid, rejecting odd cell counts and non-positive half-widths.
pub fn make_grid(half_width: f64, n_cells: usize) -> Result<Grid, GridError> {
    Grid::new(half_width, n_cells)
}
