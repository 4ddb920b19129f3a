//! Uniform half-line grid realizing the odd sector: interior points
//! `x_i = (i+1)h`, `h = L/(N+1)`, with Dirichlet conditions at `0` and `L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Largest admissible `h·m`.
pub const RESOLUTION_LIMIT: f64 = 0.1;
/// Smallest admissible `L·κ` for a potential decaying like `e^{−κ|x|}`.
pub const TAIL_LIMIT: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    length: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Grid(format!(
                "half-line length L must be positive, got {length}"
            )));
        }
        if n < 2 {
            return Err(Error::Grid(format!(
                "need at least 2 interior points, got {n}"
            )));
        }
        Ok(Self { length, n })
    }

    /// Grid with spacing as close as possible to `h` (rounded so that `L` is hit exactly).
    pub fn with_spacing(length: f64, h: f64) -> Result<Self> {
        let n = (length / h).round() as usize;
        Self::new(length, n.saturating_sub(1))
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.length / (self.n as f64 + 1.0)
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 1.0) * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Points `0, x_1, …, x_N, L` including both boundary points.
    pub fn closed_points(&self) -> Vec<f64> {
        (0..self.n + 2).map(|i| i as f64 * self.h()).collect()
    }

    /// Interior points of the full-line grid on `(−L, L)` with the same spacing:
    /// `x_j = −L + (j+1)h`, `j = 0..2N+1`, symmetric about the centre index `N`.
    pub fn full_line_points(&self) -> Vec<f64> {
        let h = self.h();
        (0..2 * self.n + 1)
            .map(|j| (j as f64 - self.n as f64) * h)
            .collect()
    }

    /// Enforces `h·√m² ≤ 0.1`.
    pub fn check_resolution(&self, m2: f64) -> Result<()> {
        let hm = self.h() * m2.sqrt();
        if hm > RESOLUTION_LIMIT {
            return Err(Error::Grid(format!(
                "resolution guard: h·m = {hm:.4} exceeds {RESOLUTION_LIMIT} (h = {:.4e}); increase N",
                self.h()
            )));
        }
        Ok(())
    }

    /// Enforces `L·κ ≥ 20`.
    pub fn check_tail(&self, kappa: f64) -> Result<()> {
        let lk = self.length * kappa;
        if !(lk >= TAIL_LIMIT) {
            return Err(Error::Grid(format!(
                "tail guard: L·κ = {lk:.3} is below {TAIL_LIMIT} (L = {}, κ = {kappa:.4}); increase L",
                self.length
            )));
        }
        Ok(())
    }

    /// Full-line inner product `⟨f, g⟩ = 2h Σ f_i conj(g_i)` of odd functions
    /// sampled on the half-line interior points.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        let s: C64 = f.iter().zip(g).map(|(a, b)| a * b.conj()).sum();
        s * (2.0 * self.h())
    }

    pub fn inner_real(&self, f: &[f64], g: &[f64]) -> f64 {
        2.0 * self.h() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self, f: &[C64]) -> f64 {
        (2.0 * self.h() * f.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_points() {
        let g = GridSpec::new(40.0, 7999).unwrap();
        assert!((g.h() - 0.005).abs() < 1e-15);
        assert!((g.x(g.n() - 1) - (40.0 - 0.005)).abs() < 1e-12);
        let f = g.full_line_points();
        assert_eq!(f.len(), 2 * 7999 + 1);
        assert_eq!(f[7999], 0.0);
        assert!((f[0] + f[f.len() - 1]).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let g = GridSpec::new(10.0, 99).unwrap();
        assert!(g.check_resolution(2.0).is_err());
        let g = GridSpec::new(10.0, 999).unwrap();
        g.check_resolution(2.0).unwrap();
        assert!(g.check_tail(1.0).is_err());
        g.check_tail(2.0).unwrap();
        assert!(GridSpec::new(-1.0, 10).is_err());
    }

    #[test]
    fn full_line_norm_doubles_half_line_sum() {
        let g = GridSpec::new(1.0, 3).unwrap();
        let f = vec![C64::new(1.0, 0.0); 3];
        assert!((g.norm(&f).powi(2) - 1.5).abs() < 1e-15);
    }
}
