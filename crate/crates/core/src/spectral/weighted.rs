//! Polynomially weighted `L²₋ₛ` norms with weight `⟨x⟩^{−s}`, `⟨x⟩ = (1 + x²)^{1/2}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedNorm {
    s: f64,
}

impl WeightedNorm {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 1.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "weight exponent must satisfy s > 1, got {s}"
            )));
        }
        Ok(Self { s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `⟨x⟩^{−s}`.
    pub fn weight(&self, x: f64) -> f64 {
        (1.0 + x * x).powf(-0.5 * self.s)
    }

    pub fn weights(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.weight(x)).collect()
    }

    /// Trapezoid rule for `∫ ⟨x⟩^{−2s} |f|²` over the sorted nodes `xs`, square-rooted.
    pub fn norm(&self, xs: &[f64], f: &[C64]) -> Result<f64> {
        if xs.len() != f.len() {
            return Err(Error::Dimension {
                context: "weighted norm samples",
                expected: xs.len(),
                got: f.len(),
            });
        }
        let ys: Vec<f64> = xs
            .iter()
            .zip(f)
            .map(|(&x, z)| self.weight(x).powi(2) * z.norm_sqr())
            .collect();
        Ok(crate::quadrature::trapezoid(xs, &ys).sqrt())
    }

    /// Half-line norm of interior grid samples, with the Dirichlet zeros at `0`
    /// and `L` closing the trapezoid.
    pub fn grid_norm(&self, grid: &GridSpec, f: &[C64]) -> f64 {
        let h = grid.h();
        let sum: f64 = f
            .iter()
            .enumerate()
            .map(|(i, z)| self.weight(grid.x(i)).powi(2) * z.norm_sqr())
            .sum();
        (h * sum).sqrt()
    }

    pub fn grid_norm_real(&self, grid: &GridSpec, f: &[f64]) -> f64 {
        let h = grid.h();
        let sum: f64 = f
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(grid.x(i)).powi(2) * v * v)
            .sum();
        (h * sum).sqrt()
    }
}

/// `(∫ ⟨x⟩^{−2s}|f|²)^{1/2}` by the trapezoid rule on the nodes `xs`.
pub fn weighted_norm(xs: &[f64], f: &[f64], s: f64) -> Result<f64> {
    let z: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
    WeightedNorm::new(s)?.norm(xs, &z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_function_has_unit_norm_at_three_halves() {
        let xs: Vec<f64> = (0..=400_000).map(|i| i as f64 * 0.01).collect();
        let ones = vec![1.0; xs.len()];
        // The tail beyond 4000 contributes about 1/(2·4000²).
        let n = weighted_norm(&xs, &ones, 1.5).unwrap();
        assert!((n - 1.0).abs() < 1e-6, "{n}");
    }

    #[test]
    fn zero_and_domain() {
        let xs = [0.0, 1.0, 2.0];
        assert_eq!(weighted_norm(&xs, &[0.0; 3], 2.0).unwrap(), 0.0);
        assert!(matches!(
            weighted_norm(&xs, &[1.0; 3], 1.0),
            Err(Error::Domain(_))
        ));
        assert!(weighted_norm(&xs, &[1.0; 2], 2.0).is_err());
    }

    #[test]
    fn weights_positive_and_decreasing() {
        let w = WeightedNorm::new(1.5).unwrap();
        let ws = w.weights(&[0.0, 0.5, 1.0, 10.0, 100.0]);
        assert!(ws.iter().all(|&v| v > 0.0));
        assert!(ws.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn grid_norm_matches_trapezoid() {
        let grid = GridSpec::new(10.0, 99).unwrap();
        let f: Vec<C64> = grid
            .points()
            .iter()
            .map(|&x| C64::new(x.sin(), x.cos()))
            .collect();
        let mut xs = vec![0.0];
        xs.extend(grid.points());
        xs.push(10.0);
        let mut g = vec![C64::new(0.0, 0.0)];
        g.extend(f.iter().copied());
        g.push(C64::new(0.0, 0.0));
        let w = WeightedNorm::new(2.0).unwrap();
        assert!((w.grid_norm(&grid, &f) - w.norm(&xs, &g).unwrap()).abs() < 1e-14);
    }
}
