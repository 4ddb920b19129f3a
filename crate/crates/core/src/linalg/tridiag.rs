//! Symmetric tridiagonal eigenvalue tools: Sturm counts with bisection, implicit
//! QL for the full spectrum, and inverse iteration for individual eigenvectors.

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples rows `i` and `i + 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Dimension {
                context: "tridiagonal off-diagonal",
                expected: diag.len().saturating_sub(1),
                got: off.len(),
            });
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
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

    /// Dense entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            0.0
        }
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma` (Sturm sequence count).
    pub fn count_below(&self, sigma: f64) -> usize {
        let scale = self.gershgorin().1.abs().max(1.0);
        let tiny = f64::EPSILON * scale;
        let mut count = 0;
        let mut q = self.diag[0] - sigma;
        for i in 0..self.dim() {
            if i > 0 {
                q = self.diag[i] - sigma - self.off[i - 1] * self.off[i - 1] / q;
            }
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue with ascending index `k` by bisection on the Sturm count.
    pub fn eigenvalue_by_index(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs());
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues strictly below `upper`, ascending.
    pub fn eigenvalues_below(&self, upper: f64) -> Vec<f64> {
        (0..self.count_below(upper))
            .map(|k| self.eigenvalue_by_index(k))
            .collect()
    }

    /// Full spectrum by the implicit QL algorithm with Wilkinson-type shifts.
    pub fn eigenvalues_ql(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::Numerical(
                        "tridiagonal QL iteration did not converge".into(),
                    ));
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut i = m;
                let mut deflated = false;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(|a, b| a.total_cmp(b));
        Ok(d)
    }

    /// Solves `(T − sigma·I) x = b` by Gaussian elimination with partial pivoting.
    /// Exactly zero pivots are replaced by a tiny multiple of the matrix scale so
    /// the routine can be used for inverse iteration at a computed eigenvalue.
    pub fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let tiny = f64::EPSILON * self.gershgorin().1.abs().max(1.0);
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - sigma).collect();
        let mut du = self.off.clone();
        let mut dl = self.off.clone();
        let mut x = b.to_vec();
        if n == 1 {
            let p = if d[0] == 0.0 { tiny } else { d[0] };
            return vec![x[0] / p];
        }
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                x[i + 1] -= fact * x[i];
                dl[i] = 0.0;
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                } else {
                    dl[i] = 0.0;
                }
                du[i] = temp;
                let t = x[i];
                x[i] = x[i + 1];
                x[i + 1] = t - fact * x[i + 1];
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        x[n - 1] /= d[n - 1];
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - dl[i] * x[i + 2]) / d[i];
        }
        x
    }

    /// Unit-norm eigenvector for an (accurately computed) isolated eigenvalue.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin())
            .collect();
        normalize(&mut v);
        for _ in 0..3 {
            v = self.solve_shifted(lambda, &v);
            normalize(&mut v);
        }
        v
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Richardson extrapolation of a quantity computed at spacings `h` and `h/2`
/// with leading error order `order`.
pub fn richardson(coarse: f64, fine: f64, order: i32) -> f64 {
    let f = 2f64.powi(order);
    fine + (fine - coarse) / (f - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymmetricEigen;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn discrete_laplacian_eigenvalues_match_closed_form() {
        let n = 50;
        let t = laplacian(n);
        let exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        let ql = t.eigenvalues_ql().unwrap();
        let bis = t.eigenvalues_below(10.0);
        for k in 0..n {
            assert!((ql[k] - exact[k]).abs() < 1e-13, "ql {k}");
            assert!((bis[k] - exact[k]).abs() < 1e-13, "bisection {k}");
        }
    }

    #[test]
    fn random_tridiagonal_matches_dense_solver() {
        let n = 40;
        let diag: Vec<f64> = (0..n)
            .map(|i| ((i * 7919) % 13) as f64 * 0.3 - 1.0)
            .collect();
        let off: Vec<f64> = (0..n - 1)
            .map(|i| ((i * 104729) % 11) as f64 * 0.2 - 0.9)
            .collect();
        let t = SymTridiagonal::new(diag, off).unwrap();
        let dense = SymmetricEigen::eigenvalues(n, |i, j| t.entry(i, j)).unwrap();
        let ql = t.eigenvalues_ql().unwrap();
        for k in 0..n {
            assert!((ql[k] - dense[k]).abs() < 1e-12);
            assert!((t.eigenvalue_by_index(k) - dense[k]).abs() < 1e-12);
        }
        assert_eq!(t.count_below(dense[10] + 1e-9), 11);
    }

    #[test]
    fn inverse_iteration_residual() {
        let t = laplacian(200);
        let lambda = t.eigenvalue_by_index(3);
        let v = t.eigenvector(lambda);
        let tv = t.apply(&v);
        let res: f64 = tv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn pivoted_solve_inverts_matrix() {
        let t = SymTridiagonal::new(vec![0.0, 1.0, 0.0, 2.0], vec![3.0, -1.0, 0.5]).unwrap();
        let b = vec![1.0, -2.0, 0.5, 4.0];
        let x = t.solve_shifted(0.0, &b);
        let tx = t.apply(&x);
        for (a, c) in tx.iter().zip(&b) {
            assert!((a - c).abs() < 1e-13);
        }
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        let exact = 1.5;
        let coarse = exact + 0.3 * 0.1f64.powi(2);
        let fine = exact + 0.3 * 0.05f64.powi(2);
        assert!((richardson(coarse, fine, 2) - exact).abs() < 1e-15);
    }
}
