//! Symmetric tridiagonal eigenvalues by Sturm bisection, eigenvectors by
//! inverse iteration.

/// `diag[i]` on the diagonal, `off[i]` coupling rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Infinity norm, which also bounds the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = self.off.get(i).map_or(0.0, |x| x.abs());
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `x` (Sturm count of the `LDLᵀ`
    /// pivots of `T - x`).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.sqrt() * (1.0 + self.norm_hint());
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.dim() {
            if i > 0 {
                let e = self.off[i - 1];
                q = self.diag[i] - x - if e == 0.0 { 0.0 } else { e * e / q };
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn norm_hint(&self) -> f64 {
        self.off.iter().fold(0.0f64, |m, e| m.max(e.abs()))
    }

    /// The `k`-th smallest eigenvalue (0-based), known to lie in `[lo, hi]`.
    pub fn kth_eigenvalue(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues in `[lo, hi)`, ascending.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (a, b) = (self.count_below(lo), self.count_below(hi));
        (a..b).map(|k| self.kth_eigenvalue(k, lo, hi)).collect()
    }

    /// Unit eigenvector for an accurately known eigenvalue.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        let lu = ShiftedLu::new(self, lambda);
        // A fixed, non-symmetric start vector so that both parities are reached.
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7 + 0.3).sin()).collect();
        normalize(&mut x);
        for _ in 0..4 {
            x = lu.solve(&x);
            normalize(&mut x);
        }
        x
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Partial-pivoting LU of `T - σI`; `U` has two superdiagonals.
struct ShiftedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(t: &SymTridiagonal, sigma: f64) -> Self {
        let n = t.dim();
        let tiny = f64::EPSILON * t.norm_inf().max(1.0);
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - sigma).collect();
        let mut up: Vec<f64> = t.off.clone();
        up.push(0.0);
        let low = &t.off;
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        // At step i the working row i has entries only in columns i and i+1,
        // so fill-in appears solely in the pivot row (u2) after a swap.
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if d[i].abs() < tiny { tiny } else { d[i] };
                break;
            }
            let below = low[i];
            if d[i].abs() >= below.abs() {
                let piv = if d[i].abs() < tiny { tiny } else { d[i] };
                let m = below / piv;
                u0[i] = piv;
                u1[i] = up[i];
                mult[i] = m;
                d[i + 1] -= m * up[i];
            } else {
                // Swap rows i and i+1: row i+1 is (below, d[i+1], up[i+1]).
                let m = d[i] / below;
                u0[i] = below;
                u1[i] = d[i + 1];
                u2[i] = up[i + 1];
                mult[i] = m;
                swapped[i] = true;
                d[i + 1] = up[i] - m * d[i + 1];
                up[i + 1] *= -m;
            }
        }
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        let mut y = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let t = laplacian(n);
        let ev = t.eigenvalues_in(-1.0, 5.0);
        assert_eq!(ev.len(), n);
        for (k, &l) in ev.iter().enumerate() {
            let theta = (k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = 2.0 - 2.0 * theta.cos();
            assert!((l - exact).abs() < 1e-13, "{k}: {l} vs {exact}");
        }
    }

    #[test]
    fn eigenvectors_have_small_residual() {
        // Mixed signs and a decoupled row, as in the Dirac Hamiltonian.
        let n = 41;
        let diag: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 - 0.3 } else { -1.0 }).collect();
        let mut off: Vec<f64> = (0..n - 1).map(|k| if k % 2 == 0 { -4.0 } else { 4.0 }).collect();
        off[0] = 0.0;
        let t = SymTridiagonal::new(diag, off);
        for l in t.eigenvalues_in(-20.0, 20.0) {
            let v = t.eigenvector(l);
            let tv = t.apply(&v);
            let r: f64 = tv.iter().zip(&v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt();
            assert!(r < 1e-12, "lambda {l}: residual {r}");
        }
    }

    #[test]
    fn lu_solves_shifted_system() {
        let t = SymTridiagonal::new(vec![0.1, -3.0, 2.0, 0.5, 1.0], vec![5.0, 0.2, -7.0, 1.0]);
        let lu = ShiftedLu::new(&t, 0.4);
        let b = [1.0, -2.0, 0.5, 3.0, -1.0];
        let x = lu.solve(&b);
        let tx = t.apply(&x);
        for i in 0..5 {
            assert!((tx[i] - 0.4 * x[i] - b[i]).abs() < 1e-12);
        }
    }
}
