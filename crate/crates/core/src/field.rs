//! Phase-space states `(ψ, ψ̇)` of the linearized field on the odd-sector grid.

use crate::error::{Error, Result};
use crate::gl::GridOperator;
use crate::grid::GridSpec;
use crate::linalg::C64;
use crate::spectral::WeightedNorm;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub psi: Vec<C64>,
    pub dpsi: Vec<C64>,
}

impl FieldState {
    pub fn zeros(n: usize) -> Self {
        Self {
            psi: vec![C64::new(0.0, 0.0); n],
            dpsi: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn new(psi: Vec<C64>, dpsi: Vec<C64>) -> Result<Self> {
        if psi.len() != dpsi.len() {
            return Err(Error::Dimension {
                context: "field state components",
                expected: psi.len(),
                got: dpsi.len(),
            });
        }
        if psi
            .iter()
            .chain(&dpsi)
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Validation(
                "field state has non-finite samples".into(),
            ));
        }
        Ok(Self { psi, dpsi })
    }

    pub fn real(psi: &[f64], dpsi: &[f64]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(c(psi), c(dpsi))
    }

    /// Samples `(ψ0(x_i), ψ̇0(x_i))` of closed-form initial data.
    pub fn sample(grid: &GridSpec, psi: impl Fn(f64) -> f64, dpsi: impl Fn(f64) -> f64) -> Self {
        let xs = grid.points();
        let p: Vec<f64> = xs.iter().map(|&x| psi(x)).collect();
        let d: Vec<f64> = xs.iter().map(|&x| dpsi(x)).collect();
        Self::real(&p, &d).unwrap_or_else(|_| Self::zeros(xs.len()))
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.psi
            .iter()
            .chain(&self.dpsi)
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Dimension {
                context: "field state difference",
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self {
            psi: self
                .psi
                .iter()
                .zip(&other.psi)
                .map(|(a, b)| a - b)
                .collect(),
            dpsi: self
                .dpsi
                .iter()
                .zip(&other.dpsi)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Concatenation `(ψ, ψ̇)` as one vector of length `2N`.
    pub fn stacked(&self) -> Vec<C64> {
        self.psi.iter().chain(&self.dpsi).copied().collect()
    }

    pub fn from_stacked(v: &[C64]) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::Validation(
                "stacked state must have even length".into(),
            ));
        }
        let (a, b) = v.split_at(v.len() / 2);
        Self::new(a.to_vec(), b.to_vec())
    }

    /// `‖ΛX‖ = (⟨Sψ, ψ⟩ + ‖ψ̇‖²)^{1/2}` in the full-line inner product.
    pub fn energy_norm(&self, op: &GridOperator) -> f64 {
        let grid = op.grid();
        let spsi = op.apply_complex(&self.psi);
        let potential = grid.inner(&spsi, &self.psi).re;
        let kinetic = grid.inner(&self.dpsi, &self.dpsi).re;
        (potential + kinetic).max(0.0).sqrt()
    }

    /// `(‖ψ‖²₋ₛ + ‖ψ̇‖²₋ₛ)^{1/2}`.
    pub fn weighted_norm(&self, grid: &GridSpec, norm: &WeightedNorm) -> f64 {
        norm.grid_norm(grid, &self.psi)
            .hypot(norm.grid_norm(grid, &self.dpsi))
    }
}

/// Splits full-line samples on `(j − N)h`, `j = 0..2N`, into the odd part on the
/// half-line interior points and the relative size of the even part.
pub fn odd_part(grid: &GridSpec, full: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = grid.n();
    if full.len() != 2 * n + 1 {
        return Err(Error::Dimension {
            context: "full-line samples",
            expected: 2 * n + 1,
            got: full.len(),
        });
    }
    let total: f64 = full.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut even = full[n] * full[n];
    let mut odd = Vec::with_capacity(n);
    for i in 0..n {
        let (r, l) = (full[n + 1 + i], full[n - 1 - i]);
        odd.push(0.5 * (r - l));
        even += 2.0 * (0.5 * (r + l)).powi(2);
    }
    let rel = if total > 0.0 {
        even.sqrt() / total
    } else {
        0.0
    };
    Ok((odd, rel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_part_of_odd_and_even_data() {
        let grid = GridSpec::new(5.0, 49).unwrap();
        let xs = grid.full_line_points();
        let odd: Vec<f64> = xs.iter().map(|x| x * (-x * x).exp()).collect();
        let (half, rel) = odd_part(&grid, &odd).unwrap();
        assert!(rel < 1e-15);
        assert!((half[0] - odd[50]).abs() < 1e-15);
        let even: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        assert!((odd_part(&grid, &even).unwrap().1 - 1.0).abs() < 1e-12);
    }
}
