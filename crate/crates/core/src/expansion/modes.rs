//! Vector modes `h_ω = (1, −i sgn ω)ᵀ e_ω` and `a_ω = Λ⁻¹h_ω = (e_ω/|ω|, −i sgn ω e_ω)`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::gl::GridOperator;
use crate::grid::GridSpec;
use crate::linalg::{C64, I};
use crate::spectral::{ContinuumMode, DiscreteMode, Smearable, WeightedNorm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `⟨h_ω, h_ω′⟩ = 2π δ(ω − ω′)`, `‖h_k‖² = 2`. Serialized as `paper-2pi`.
    #[serde(rename = "paper-2pi")]
    TwoPi,
    /// `h_ω` rescaled by `√(|ω|/2π)`: `⟨h_ω, h_ω′⟩ = |ω| δ(ω − ω′)`.
    Symplectic,
}

impl Normalization {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::TwoPi => "paper-2pi",
            Self::Symplectic => "symplectic",
        }
    }

    /// Continuum density `n(ω)` in `⟨h_ω, h_ω′⟩ = n(ω) δ(ω − ω′)`.
    pub fn density(&self, omega: f64) -> f64 {
        match self {
            Self::TwoPi => 2.0 * PI,
            Self::Symplectic => omega.abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spectrum {
    Discrete { index: usize },
    Continuum,
}

#[derive(Clone, Debug)]
pub struct VectorMode {
    omega: f64,
    spectrum: Spectrum,
    grid: GridSpec,
    scalar: Arc<Vec<f64>>,
    boundary: f64,
    scale: f64,
    normalization: Normalization,
}

impl VectorMode {
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn sign(&self) -> f64 {
        self.omega.signum()
    }

    pub fn spectrum(&self) -> Spectrum {
        self.spectrum
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Factor applied to the `h_ω` in the 2π normalization.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Scalar profile `e_ω` (or `φ_k`) before scaling.
    pub fn scalar(&self) -> &[f64] {
        &self.scalar
    }

    pub(crate) fn shares_scalar(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.scalar, &other.scalar)
    }

    /// `−i sgn ω`.
    pub fn rotation(&self) -> C64 {
        -I * self.sign()
    }

    pub fn h(&self) -> FieldState {
        let first: Vec<C64> = self
            .scalar
            .iter()
            .map(|&e| C64::new(self.scale * e, 0.0))
            .collect();
        let second = first.iter().map(|z| z * self.rotation()).collect();
        FieldState {
            psi: first,
            dpsi: second,
        }
    }

    pub fn a(&self) -> FieldState {
        let w = self.omega.abs();
        let base: Vec<C64> = self
            .scalar
            .iter()
            .map(|&e| C64::new(self.scale * e, 0.0))
            .collect();
        FieldState {
            psi: base.iter().map(|z| z / w).collect(),
            dpsi: base.iter().map(|z| z * self.rotation()).collect(),
        }
    }

    /// `‖h‖²` in the full-line inner product (finite for discrete modes only).
    pub fn h_norm_sqr(&self) -> f64 {
        2.0 * self.scale * self.scale * self.grid.inner_real(&self.scalar, &self.scalar)
    }

    /// `⟨X, h_ω⟩`.
    pub fn pair_with_h(&self, x: &FieldState) -> C64 {
        let g = &self.grid;
        let mut p = C64::new(0.0, 0.0);
        let mut q = C64::new(0.0, 0.0);
        for ((a, b), &e) in x.psi.iter().zip(&x.dpsi).zip(self.scalar.iter()) {
            p += a * e;
            q += b * e;
        }
        // ⟨ψ, s e⟩ + ⟨ψ̇, −i sgn s e⟩ with the conjugate on the second slot.
        (p + q * self.rotation().conj()) * (2.0 * g.h() * self.scale)
    }

    /// `‖A a + iω a‖₋ₛ / ‖a‖₋ₛ` with `A = [[0, I], [−S, 0]]` on the grid.
    pub fn eigen_residual(&self, op: &GridOperator, norm: &WeightedNorm) -> Result<f64> {
        if op.grid() != &self.grid {
            return Err(Error::Validation(
                "mode and operator live on different grids".into(),
            ));
        }
        let w = self.omega.abs();
        let a1: Vec<f64> = self.scalar.iter().map(|e| self.scale * e / w).collect();
        let s_a1 = op.apply_with_boundary(&a1, 0.0, self.scale * self.boundary / w);
        let a = self.a();
        let iw = I * self.omega;
        // First component: a₂ + iω a₁.
        let r1: Vec<C64> = a
            .dpsi
            .iter()
            .zip(&a.psi)
            .map(|(x2, x1)| x2 + iw * x1)
            .collect();
        // Second component: −S a₁ + iω a₂.
        let r2: Vec<C64> = s_a1
            .iter()
            .zip(&a.dpsi)
            .map(|(s, x2)| -s + iw * x2)
            .collect();
        let r = norm
            .grid_norm(&self.grid, &r1)
            .hypot(norm.grid_norm(&self.grid, &r2));
        Ok(r / a.weighted_norm(&self.grid, norm))
    }

    fn rescaled(&self, normalization: Normalization) -> Result<Self> {
        if self.normalization == normalization {
            return Err(Error::Validation(format!(
                "mode at omega = {} already carries the {} normalization; double renormalization is not allowed",
                self.omega,
                normalization.tag()
            )));
        }
        let factor = match (self.spectrum, normalization) {
            (Spectrum::Continuum, Normalization::Symplectic) => {
                (self.omega.abs() / (2.0 * PI)).sqrt()
            }
            (Spectrum::Continuum, Normalization::TwoPi) => (2.0 * PI / self.omega.abs()).sqrt(),
            // ‖h_k‖² = 2 → |ω_k| under the symplectic convention.
            (Spectrum::Discrete { .. }, Normalization::Symplectic) => {
                (0.5 * self.omega.abs()).sqrt()
            }
            (Spectrum::Discrete { .. }, Normalization::TwoPi) => (2.0 / self.omega.abs()).sqrt(),
        };
        Ok(Self {
            scale: self.scale * factor,
            normalization,
            ..self.clone()
        })
    }
}

impl Smearable for VectorMode {
    fn frequency(&self) -> f64 {
        self.omega
    }

    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn sample_len(&self) -> usize {
        2 * self.scalar.len()
    }

    fn accumulate(&self, coef: C64, out: &mut [C64]) {
        let n = self.scalar.len();
        let (first, second) = out.split_at_mut(n);
        let c = coef * self.scale;
        let cr = c * self.rotation();
        for ((f, s), &e) in first
            .iter_mut()
            .zip(second.iter_mut())
            .zip(self.scalar.iter())
        {
            *f += c * e;
            *s += cr * e;
        }
    }
}

/// `a_ω` view of a vector mode, for packets of the form `∫ρ a_ω dω`.
#[derive(Clone, Copy, Debug)]
pub struct AMode<'a>(pub &'a VectorMode);

impl Smearable for AMode<'_> {
    fn frequency(&self) -> f64 {
        self.0.omega
    }

    fn grid(&self) -> &GridSpec {
        &self.0.grid
    }

    fn sample_len(&self) -> usize {
        2 * self.0.scalar.len()
    }

    fn accumulate(&self, coef: C64, out: &mut [C64]) {
        let m = self.0;
        let n = m.scalar.len();
        let (first, second) = out.split_at_mut(n);
        let c = coef * m.scale;
        let c1 = c / m.omega.abs();
        let c2 = c * m.rotation();
        for ((f, s), &e) in first.iter_mut().zip(second.iter_mut()).zip(m.scalar.iter()) {
            *f += c1 * e;
            *s += c2 * e;
        }
    }
}

/// Lifts scalar modes on `grid` to vector modes in the 2π normalization.
/// Each continuum mode keeps its signed `ω` (pass `e.mirrored()` for the
/// negative branch); each discrete mode yields the pair `±ω_k`.
pub fn lift_modes(
    grid: &GridSpec,
    continuum: &[ContinuumMode],
    discrete: &[DiscreteMode],
) -> Result<Vec<VectorMode>> {
    let mut out = Vec::with_capacity(continuum.len() + 2 * discrete.len());
    for (index, d) in discrete.iter().enumerate() {
        out.extend(lift_discrete_pair(grid, index, d)?);
    }
    for e in continuum {
        if e.grid() != grid {
            return Err(Error::Validation(
                "continuum mode lives on a different grid".into(),
            ));
        }
        out.push(lift_continuum(e)?);
    }
    Ok(out)
}

pub fn lift_continuum(e: &ContinuumMode) -> Result<VectorMode> {
    if e.omega() == 0.0 {
        return Err(Error::Domain(
            "omega = 0 cannot carry a continuum mode".into(),
        ));
    }
    Ok(VectorMode {
        omega: e.omega(),
        spectrum: Spectrum::Continuum,
        grid: *e.grid(),
        scalar: e.shared_samples(),
        boundary: e.boundary_value(),
        scale: 1.0,
        normalization: Normalization::TwoPi,
    })
}

/// `a_{±k} = (φ_k/ω_k, ∓i φ_k)`.
pub fn lift_discrete_pair(
    grid: &GridSpec,
    index: usize,
    d: &DiscreteMode,
) -> Result<[VectorMode; 2]> {
    if d.samples.len() != grid.n() {
        return Err(Error::Dimension {
            context: "discrete mode samples",
            expected: grid.n(),
            got: d.samples.len(),
        });
    }
    if !(d.omega > 0.0) {
        return Err(Error::Domain(format!(
            "discrete mode {index} has omega = {}; omega = 0 is excluded by positivity",
            d.omega
        )));
    }
    let make = |omega: f64| VectorMode {
        omega,
        spectrum: Spectrum::Discrete { index },
        grid: *grid,
        scalar: Arc::clone(&d.samples),
        boundary: 0.0,
        scale: 1.0,
        normalization: Normalization::TwoPi,
    };
    Ok([make(d.omega), make(-d.omega)])
}

/// Rescales 2π-normalized modes to the symplectic normalization.
pub fn renormalize_symplectic(modes: &[VectorMode]) -> Result<Vec<VectorMode>> {
    modes
        .iter()
        .map(|m| m.rescaled(Normalization::Symplectic))
        .collect()
}

/// Symplectic pairing `⟨X₁, J X₂⟩` with `J = [[0, I], [−I, 0]]`.
pub fn symplectic_pairing(grid: &GridSpec, x1: &FieldState, x2: &FieldState) -> C64 {
    // J(ψ, ψ̇) = (ψ̇, −ψ).
    let minus: Vec<C64> = x2.psi.iter().map(|z| -z).collect();
    grid.inner(&x1.psi, &x2.dpsi) + grid.inner(&x1.dpsi, &minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl::FreePotential;

    fn free_mode(omega: f64) -> (GridSpec, VectorMode) {
        let grid = GridSpec::new(30.0, 2999).unwrap();
        let e = ContinuumMode::free(&grid, 1.0, omega).unwrap();
        (grid, lift_continuum(&e).unwrap())
    }

    #[test]
    fn second_component_is_rotated_first() {
        let (_, m) = free_mode(2.0);
        let h = m.h();
        for (a, b) in h.psi.iter().zip(&h.dpsi) {
            assert!((b - a * C64::new(0.0, -1.0)).norm() < 1e-15);
        }
        let (_, n) = free_mode(-2.0);
        let hn = n.h();
        assert!((hn.dpsi[5] - hn.psi[5] * C64::new(0.0, 1.0)).norm() < 1e-15);
        let a = m.a();
        assert!((a.psi[7] * 2.0 - h.psi[7]).norm() < 1e-15);
    }

    #[test]
    fn free_vector_mode_residual_is_second_order() {
        let (grid, m) = free_mode(2.0);
        let op = GridOperator::schrodinger(&FreePotential, 1.0, &grid).unwrap();
        let r = m
            .eigen_residual(&op, &WeightedNorm::new(1.5).unwrap())
            .unwrap();
        // k = √3, h = 0.01: (k²)²h²/12 relative to ω.
        assert!(r < 1e-4 && r > 1e-7, "{r}");
    }

    #[test]
    fn renormalization_scales_and_refuses_twice() {
        let (_, m) = free_mode(2.0 * PI);
        let s = renormalize_symplectic(std::slice::from_ref(&m)).unwrap();
        assert!((s[0].scale() - 1.0).abs() < 1e-15);
        let err = renormalize_symplectic(&s).unwrap_err();
        assert!(err.to_string().contains("symplectic"));
        let (_, m) = free_mode(3.0);
        let s = renormalize_symplectic(&[m]).unwrap();
        assert!((s[0].scale() - (3.0 / (2.0 * PI)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn discrete_pair_pairing() {
        let grid = GridSpec::new(10.0, 99).unwrap();
        let samples: Vec<f64> = grid.points().iter().map(|x| x * (-x * x).exp()).collect();
        let norm = grid.inner_real(&samples, &samples).sqrt();
        let d = DiscreteMode {
            lambda: 1.5,
            omega: 1.5f64.sqrt(),
            samples: Arc::new(samples.iter().map(|v| v / norm).collect()),
            residual: 0.0,
        };
        let [p, m] = lift_discrete_pair(&grid, 0, &d).unwrap();
        assert!((p.h_norm_sqr() - 2.0).abs() < 1e-12);
        let s = renormalize_symplectic(&[p, m]).unwrap();
        let a = s[0].a();
        let b = s[1].a();
        assert!((symplectic_pairing(&grid, &a, &a) - I).norm() < 1e-12);
        assert!((symplectic_pairing(&grid, &b, &b) + I).norm() < 1e-12);
        assert!(symplectic_pairing(&grid, &a, &b).norm() < 1e-12);
    }
}
