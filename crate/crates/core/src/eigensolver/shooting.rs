//! Parity shooting with classical RK4.
//!
//! On `z ≥ 0` the stationary equations read `φ' = (γ + 1 − f) χ`,
//! `χ' = (1 + f − γ) φ`. Integration starts from `φ(0) = 1, χ(0) = 0`
//! (even `φ`) or `φ(0) = 0, χ(0) = 1` (odd `φ`) with step `h/2`, so that
//! every step ends on a `φ` or `χ` sample of the grid. Steps are split at
//! the potential's breakpoints.

use super::{filter_leaky, finish_state, BoundState, Method, Parity, SolverError, SolverOptions};
use crate::exec;
use crate::grid::Grid;
use crate::potentials::{require_symmetry, PotentialSpec};
use crate::spinor::Spinor;
use serde::Serialize;

/// Renormalization threshold for `|φ| + |χ|` during integration.
const RESCALE_ABOVE: f64 = 1e100;

/// Shooting discrepancy `F(γ) = χ(L) + κ φ(L) / (γ + 1 − f(L))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchResidual {
    pub gamma: f64,
    pub value: f64,
    pub parity: Parity,
    pub diverged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Substep {
    z0: f64,
    z1: f64,
    f0: f64,
    fm: f64,
    f1: f64,
}

/// Precomputed potential samples along `[0, L]`.
#[derive(Debug, Clone)]
struct Mesh {
    steps: Vec<Substep>,
    /// `ends[k]` is the index of the last substep of macro step `k`.
    ends: Vec<usize>,
    f_tail: f64,
}

impl Mesh {
    fn new(spec: &PotentialSpec, grid: &Grid) -> Self {
        let n = grid.n_cells();
        let s = 0.5 * grid.spacing();
        let breaks = spec.breakpoints();
        let mut steps = Vec::with_capacity(n + breaks.len());
        let mut ends = Vec::with_capacity(n);
        let node = |k: usize| if k == n { grid.half_width() } else { k as f64 * s };
        let eps = 1e-9 * s;
        let mut next_break = 0;
        for k in 0..n {
            let (a, b) = (node(k), node(k + 1));
            let mut lo = a;
            while next_break < breaks.len() && breaks[next_break] <= lo + eps {
                next_break += 1;
            }
            while next_break < breaks.len() && breaks[next_break] < b - eps {
                let bp = breaks[next_break];
                steps.push(substep(spec, lo, bp));
                lo = bp;
                next_break += 1;
            }
            steps.push(substep(spec, lo, b));
            ends.push(steps.len() - 1);
        }
        Self {
            steps,
            ends,
            f_tail: spec.eval(grid.half_width()),
        }
    }

    /// Decay rate and `χ/φ` of the evanescent tail at `L`, if `γ` is in the
    /// local gap there.
    fn tail(&self, gamma: f64) -> Option<(f64, f64)> {
        let a = gamma + 1.0 - self.f_tail;
        let b = 1.0 + self.f_tail - gamma;
        (a > 0.0 && b > 0.0).then(|| {
            let kappa = (a * b).sqrt();
            (kappa, -kappa / a)
        })
    }
}

fn substep(spec: &PotentialSpec, z0: f64, z1: f64) -> Substep {
    Substep {
        z0,
        z1,
        f0: spec.eval_segment(z0, z0, z1),
        fm: spec.eval_segment(0.5 * (z0 + z1), z0, z1),
        f1: spec.eval_segment(z1, z0, z1),
    }
}

type Pair = [f64; 2];

#[inline]
fn rhs(y: Pair, f: f64, gamma: f64) -> Pair {
    [(gamma + 1.0 - f) * y[1], (1.0 + f - gamma) * y[0]]
}

#[inline]
fn rk4(y: Pair, dz: f64, fa: f64, fm: f64, fb: f64, gamma: f64) -> Pair {
    let k1 = rhs(y, fa, gamma);
    let k2 = rhs([y[0] + 0.5 * dz * k1[0], y[1] + 0.5 * dz * k1[1]], fm, gamma);
    let k3 = rhs([y[0] + 0.5 * dz * k2[0], y[1] + 0.5 * dz * k2[1]], fm, gamma);
    let k4 = rhs([y[0] + dz * k3[0], y[1] + dz * k3[1]], fb, gamma);
    [
        y[0] + dz / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dz / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn initial(parity: Parity) -> Pair {
    match parity {
        Parity::EvenPhi => [1.0, 0.0],
        Parity::OddPhi => [0.0, 1.0],
    }
}

/// Divides `y` (and any recorded history) by its size when it gets large.
fn rescale(y: &mut Pair, history: &mut [Pair]) {
    let size = y[0].abs() + y[1].abs();
    if size > RESCALE_ABOVE {
        y[0] /= size;
        y[1] /= size;
        for h in history.iter_mut() {
            h[0] /= size;
            h[1] /= size;
        }
    }
}

impl Mesh {
    fn discrepancy(&self, gamma: f64, parity: Parity) -> MatchResidual {
        let mut y = initial(parity);
        for st in &self.steps {
            y = rk4(y, st.z1 - st.z0, st.f0, st.fm, st.f1, gamma);
            rescale(&mut y, &mut []);
        }
        let diverged = !(y[0].is_finite() && y[1].is_finite());
        match (self.tail(gamma), diverged) {
            (Some((_, ratio)), false) => {
                let size = y[0].abs() + y[1].abs();
                MatchResidual {
                    gamma,
                    value: (y[1] - ratio * y[0]) / size.max(f64::MIN_POSITIVE),
                    parity,
                    diverged: false,
                }
            }
            _ => MatchResidual {
                gamma,
                value: f64::NAN,
                parity,
                diverged: true,
            },
        }
    }

    /// Solution at the `n + 1` macro nodes `z = k h/2`, from outward
    /// integration up to node `stop` and inward integration beyond it.
    fn two_sided(&self, spec: &PotentialSpec, grid: &Grid, gamma: f64, parity: Parity) -> (Vec<Pair>, f64) {
        let n = self.ends.len();
        let s = 0.5 * grid.spacing();
        // Match at the outer classical turning point, where the outward
        // solution is still accurate and the inward one has grown.
        let stop = (0..n)
            .rev()
            .find(|&k| {
                let f = spec.eval(k as f64 * s);
                (gamma - f).powi(2) > 1.0
            })
            .unwrap_or(0)
            .max(1)
            .min(n - 1);

        let mut out = vec![initial(parity)];
        let mut y = out[0];
        let mut step = 0;
        for k in 0..stop {
            while step <= self.ends[k] {
                let st = &self.steps[step];
                y = rk4(y, st.z1 - st.z0, st.f0, st.fm, st.f1, gamma);
                step += 1;
            }
            out.push(y);
            rescale(&mut y, &mut out);
            *out.last_mut().unwrap() = y;
        }

        let ratio = self.tail(gamma).map_or(-1.0, |t| t.1);
        let mut inward = vec![[0.0; 2]; n + 1 - stop];
        let mut y = [1.0, ratio];
        inward[n - stop] = y;
        let mut step = self.steps.len();
        for k in (stop..n).rev() {
            let first = if k == 0 { 0 } else { self.ends[k - 1] + 1 };
            while step > first {
                step -= 1;
                let st = &self.steps[step];
                y = rk4(y, st.z0 - st.z1, st.f1, st.fm, st.f0, gamma);
            }
            inward[k - stop] = y;
            rescale(&mut y, &mut inward[k - stop..]);
            inward[k - stop] = y;
        }

        let (yo, yi) = (out[stop], inward[0]);
        let scale = (yo[0] * yi[0] + yo[1] * yi[1]) / (yi[0] * yi[0] + yi[1] * yi[1]);
        let mismatch = (yo[0] * yi[1] - yo[1] * yi[0]).abs() / ((yo[0].hypot(yo[1])) * (yi[0].hypot(yi[1])));
        let mut nodes = out;
        nodes.extend(inward[1..].iter().map(|p| [p[0] * scale, p[1] * scale]));
        (nodes, mismatch)
    }
}

/// Integrates outward at a single `γ` and returns the tail discrepancy.
pub fn shoot(spec: &PotentialSpec, gamma: f64, parity: Parity, grid: &Grid) -> Result<MatchResidual, SolverError> {
    if !(gamma.abs() < 1.0) {
        return Err(SolverError::OutsideGap(gamma));
    }
    Ok(Mesh::new(spec, grid).discrepancy(gamma, parity))
}

fn bisect(mesh: &Mesh, parity: Parity, mut lo: MatchResidual, mut hi: MatchResidual, tol: f64) -> f64 {
    while hi.gamma - lo.gamma > tol {
        let mid = 0.5 * (lo.gamma + hi.gamma);
        if mid <= lo.gamma || mid >= hi.gamma {
            break;
        }
        let m = mesh.discrepancy(mid, parity);
        if m.diverged {
            break;
        }
        if m.value == 0.0 {
            return mid;
        }
        if (m.value < 0.0) == (lo.value < 0.0) {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo.gamma + hi.gamma)
}

/// Roots of `F` for the given parities, with reconstructed spinors; states
/// touching the box edge are dropped.
pub(crate) fn shooting_states(
    spec: &PotentialSpec,
    grid: &Grid,
    opts: &SolverOptions,
    parities: &[Parity],
) -> Result<Vec<BoundState>, SolverError> {
    let candidates = shooting_candidates(spec, grid, opts, parities)?;
    filter_leaky(candidates, grid, opts.max_states)
}

/// As [`shooting_states`] without the leak filter.
pub(crate) fn shooting_candidates(
    spec: &PotentialSpec,
    grid: &Grid,
    opts: &SolverOptions,
    parities: &[Parity],
) -> Result<Vec<BoundState>, SolverError> {
    opts.validate()?;
    require_symmetry(spec, grid)?;
    let mesh = Mesh::new(spec, grid);
    let (lo, hi) = opts.gamma_window;
    let m = opts.scan_points;
    let gammas: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();

    let mut roots = Vec::new();
    for &parity in parities {
        let scan = exec::map(&gammas, |&g| mesh.discrepancy(g, parity));
        for w in scan.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.diverged || b.diverged {
                continue;
            }
            if a.value == 0.0 {
                roots.push((a.gamma, parity));
            } else if (a.value < 0.0) != (b.value < 0.0) && b.value != 0.0 {
                roots.push((bisect(&mesh, parity, a, b, opts.bisection_tol), parity));
            }
        }
        if let Some(last) = scan.last() {
            if !last.diverged && last.value == 0.0 {
                roots.push((last.gamma, parity));
            }
        }
    }

    exec::map(&roots, |&(gamma, parity)| reconstruct(&mesh, spec, grid, gamma, parity))
        .into_iter()
        .collect()
}

fn reconstruct(
    mesh: &Mesh,
    spec: &PotentialSpec,
    grid: &Grid,
    gamma: f64,
    parity: Parity,
) -> Result<BoundState, SolverError> {
    let (nodes, mismatch) = mesh.two_sided(spec, grid, gamma, parity);
    let n = grid.n_cells();
    let c = grid.centre();
    let ps = parity.phi_sign();
    let mut phi = vec![0.0; n + 1];
    let mut chi = vec![0.0; n];
    for (k, y) in nodes.iter().enumerate() {
        if k % 2 == 0 {
            let i = c + k / 2;
            phi[i] = y[0];
            phi[n - i] = ps * y[0];
        } else {
            let j = c + (k - 1) / 2;
            chi[j] = y[1];
            chi[n - 1 - j] = -ps * y[1];
        }
    }
    let raw = Spinor::new(phi, chi)?;
    let mut state = finish_state(gamma, raw, grid, Method::Shooting, mismatch)?;
    // By construction the reflection overlap is exactly the parity sign.
    state.parity = parity;
    Ok(state)
}

/// All in-gap states found by scanning `F(γ)` on a uniform mesh per parity
/// and bisecting each sign change.
pub fn find_states_shooting(
    spec: &PotentialSpec,
    grid: &Grid,
    opts: &SolverOptions,
) -> Result<Vec<BoundState>, SolverError> {
    shooting_states(spec, grid, opts, &Parity::BOTH)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn free_particle_discrepancy_is_positive() {
        let g = make_grid(10.0, 200).unwrap();
        let zero = PotentialSpec::zero();
        for gamma in [-0.9, -0.3, 0.0, 0.5, 0.95] {
            for parity in Parity::BOTH {
                let m = shoot(&zero, gamma, parity, &g).unwrap();
                assert!(!m.diverged);
                assert!(m.value > 0.0, "{gamma} {parity}: {}", m.value);
            }
        }
        assert!(find_states_shooting(&zero, &g, &SolverOptions::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn free_particle_closed_form() {
        // F = κ e^{κL}/(γ+1) before normalization by |φ| + |χ|.
        let g = make_grid(5.0, 1000).unwrap();
        let gamma: f64 = 0.5;
        let kappa = (1.0 - gamma * gamma).sqrt();
        let l = 5.0;
        let phi = (kappa * l).cosh();
        let chi = kappa * (kappa * l).sinh() / (gamma + 1.0);
        let expect = (chi + kappa * phi / (gamma + 1.0)) / (phi.abs() + chi.abs());
        let m = shoot(&PotentialSpec::zero(), gamma, Parity::EvenPhi, &g).unwrap();
        assert!((m.value - expect).abs() < 1e-10 * expect);
        assert!((expect - kappa * (kappa * l).exp() / (gamma + 1.0) / (phi + chi)).abs() < 1e-12);
    }

    #[test]
    fn outside_gap_rejected() {
        let g = make_grid(5.0, 100).unwrap();
        assert!(matches!(
            shoot(&PotentialSpec::zero(), 1.0, Parity::EvenPhi, &g),
            Err(SolverError::OutsideGap(_))
        ));
    }

    #[test]
    fn square_well_sign_change_at_oracle_root() {
        let g = make_grid(20.0, 4000).unwrap();
        let sw = PotentialSpec::square_well(0.5, 2.0).unwrap();
        let root = 0.636_257_088_468_70;
        let below = shoot(&sw, root - 1e-6, Parity::EvenPhi, &g).unwrap();
        let above = shoot(&sw, root + 1e-6, Parity::EvenPhi, &g).unwrap();
        assert!(below.value * above.value < 0.0);
    }

    #[test]
    fn misaligned_breakpoint_is_split() {
        let g = make_grid(20.0, 4000).unwrap();
        let spec = PotentialSpec::square_well(0.5, 2.0137).unwrap();
        let mesh = Mesh::new(&spec, &g);
        assert_eq!(mesh.steps.len(), g.n_cells() + 1);
        let aligned = Mesh::new(&PotentialSpec::square_well(0.5, 2.0).unwrap(), &g);
        assert_eq!(aligned.steps.len(), g.n_cells());
    }
}
