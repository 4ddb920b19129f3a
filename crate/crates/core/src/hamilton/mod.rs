//! Finite-dimensional Hamilton systems `Ẋ = JBX` with positive energy `B ≥ δ > 0`.
//!
//! The Krein transformation `Λ = B^{1/2}` turns the generator `A = JB` into
//! `ΛAΛ⁻¹ = ΛJΛ = −iH` with `H = Λ(iJ)Λ` Hermitian, so the dynamics is
//! `X(t) = Λ⁻¹ e^{−iHt} Λ X(0)` and conserves the energy norm `‖ΛX‖`.

mod nls;
pub mod random;

pub use nls::build_nls_linearization;
pub use random::SystemSampler;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, ComplexMatrix, HermitianEigen, C64, I};
use crate::quadrature::simpson_rule;

/// Default relative tolerance for the structural checks on `J` and `B`.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Result of checking condition P.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionP {
    pub holds: bool,
    pub min_eig: f64,
}

/// Checks that the spectrum of the Hermitian matrix `b` lies in `[delta, ∞)`.
pub fn check_condition_p(b: &ComplexMatrix, delta: f64) -> Result<ConditionP> {
    check_condition_p_with_tol(b, delta, STRUCTURE_TOL)
}

pub fn check_condition_p_with_tol(b: &ComplexMatrix, delta: f64, tol: f64) -> Result<ConditionP> {
    let defect = b.hermitian_defect();
    let allowed = tol * b.norm_max().max(1.0);
    if defect > allowed {
        return Err(Error::Symmetry {
            property: "Hermitian (B = B*)",
            defect,
            tol: allowed,
        });
    }
    let min_eig = b
        .hermitian_eigenvalues()?
        .first()
        .copied()
        .unwrap_or(f64::INFINITY);
    Ok(ConditionP {
        holds: min_eig >= delta,
        min_eig,
    })
}

/// A pair `(J, B)` with `J* = −J`, `J² = −I`, `B = B*` and `σ(B) ⊂ [δ, ∞)`.
#[derive(Clone, Debug)]
pub struct HamiltonSystem {
    j: ComplexMatrix,
    b: ComplexMatrix,
    delta: f64,
}

impl HamiltonSystem {
    pub fn new(j: ComplexMatrix, b: ComplexMatrix, delta: f64) -> Result<Self> {
        Self::with_tolerance(j, b, delta, STRUCTURE_TOL)
    }

    pub fn with_tolerance(
        j: ComplexMatrix,
        b: ComplexMatrix,
        delta: f64,
        tol: f64,
    ) -> Result<Self> {
        if j.dim() != b.dim() {
            return Err(Error::Dimension {
                context: "J and B",
                expected: j.dim(),
                got: b.dim(),
            });
        }
        if !j.is_finite() || !b.is_finite() {
            return Err(Error::Validation("J and B must have finite entries".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::Validation(format!(
                "spectral floor delta must be positive, got {delta}"
            )));
        }
        let skew = j.skew_defect();
        if skew > tol {
            return Err(Error::Symmetry {
                property: "skew-adjoint (J* = −J)",
                defect: skew,
                tol,
            });
        }
        let square = j
            .mul(&j)?
            .add(&ComplexMatrix::identity(j.dim()))?
            .norm_max();
        if square > tol {
            return Err(Error::Symmetry {
                property: "a complex structure (J² = −I)",
                defect: square,
                tol,
            });
        }
        let p = check_condition_p_with_tol(&b, delta, tol)?;
        if !p.holds {
            return Err(Error::ConditionP {
                min_eig: p.min_eig,
                delta,
            });
        }
        Ok(Self { j, b, delta })
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn j(&self) -> &ComplexMatrix {
        &self.j
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The generator `A = JB`.
    pub fn generator(&self) -> ComplexMatrix {
        self.j
            .mul(&self.b)
            .expect("dimensions checked at construction")
    }

    /// True when `J` and `B` are complexifications of real matrices.
    pub fn is_real(&self, tol: f64) -> bool {
        self.j.max_imag() <= tol && self.b.max_imag() <= tol * self.b.norm_max().max(1.0)
    }

    /// `‖JB − BJ‖` in the Frobenius norm.
    pub fn commutator_defect(&self) -> f64 {
        let jb = self.j.mul(&self.b).expect("dimensions checked");
        let bj = self.b.mul(&self.j).expect("dimensions checked");
        jb.sub(&bj).expect("dimensions checked").norm_fro()
    }
}

/// Frobenius norm of `JB − BJ`.
pub fn commutator_defect(system: &HamiltonSystem) -> f64 {
    system.commutator_defect()
}

/// Whether a phase vector represents a complexified real state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Abstract,
    RealForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector {
    pub components: Vec<C64>,
    pub flavor: Flavor,
}

impl PhaseVector {
    pub fn new(components: Vec<C64>) -> Self {
        Self {
            components,
            flavor: Flavor::Abstract,
        }
    }

    pub fn real(values: &[f64]) -> Self {
        Self {
            components: values.iter().map(|&v| C64::new(v, 0.0)).collect(),
            flavor: Flavor::RealForm,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.components
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.components)
    }

    pub fn distance(&self, other: &PhaseVector) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `Λ = B^{1/2}`, its inverse, and `H = Λ(iJ)Λ` with the eigendecomposition of `H`.
#[derive(Clone, Debug)]
pub struct KreinFactors {
    pub lambda: ComplexMatrix,
    pub lambda_inv: ComplexMatrix,
    pub h: ComplexMatrix,
    h_eigen: HermitianEigen,
}

/// Builds the Krein factors of a system.
pub fn krein_factors(system: &HamiltonSystem) -> Result<KreinFactors> {
    let be = system.b.hermitian_eigen()?;
    let min_eig = be.values.first().copied().unwrap_or(f64::INFINITY);
    if !(min_eig >= system.delta) {
        return Err(Error::ConditionP {
            min_eig,
            delta: system.delta,
        });
    }
    let lambda = be.apply_fn(|l| C64::new(l.sqrt(), 0.0));
    let lambda_inv = be.apply_fn(|l| C64::new(1.0 / l.sqrt(), 0.0));
    let ij = system.j.scale(I);
    let h = lambda.mul(&ij)?.mul(&lambda)?;
    let h_eigen = h.hermitian_eigen()?;
    Ok(KreinFactors {
        lambda,
        lambda_inv,
        h,
        h_eigen,
    })
}

impl KreinFactors {
    /// Eigenvalues `ω_j` of `H` (ascending).
    pub fn frequencies(&self) -> &[f64] {
        &self.h_eigen.values
    }

    /// `‖ΛX‖`.
    pub fn energy_norm(&self, x: &[C64]) -> f64 {
        norm2(&self.lambda.mul_vec(x).expect("dimension checked by caller"))
    }

    /// `‖A + iΛ⁻¹HΛ‖_max / ‖A‖_max`.
    pub fn similarity_defect(&self, system: &HamiltonSystem) -> f64 {
        let a = system.generator();
        let rhs = self
            .lambda_inv
            .mul(&self.h)
            .and_then(|m| m.mul(&self.lambda))
            .expect("dimensions agree")
            .scale(I);
        a.add(&rhs).expect("dimensions agree").norm_max() / a.norm_max().max(f64::MIN_POSITIVE)
    }

    /// `‖H − H*‖_max / ‖H‖_max`.
    pub fn hermitian_defect(&self) -> f64 {
        self.h.hermitian_defect() / self.h.norm_max().max(f64::MIN_POSITIVE)
    }

    /// `X(t) = Λ⁻¹ e^{−iHt} Λ X0` through the eigendecomposition of `H`.
    pub fn propagate(&self, x0: &PhaseVector, t: f64) -> Result<PhaseVector> {
        let n = self.h.dim();
        if x0.len() != n {
            return Err(Error::Dimension {
                context: "initial state",
                expected: n,
                got: x0.len(),
            });
        }
        if t == 0.0 {
            return Ok(x0.clone());
        }
        let y = self.lambda.mul_vec(&x0.components)?;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        for (k, &w) in self.h_eigen.values.iter().enumerate() {
            let v = self.h_eigen.vector(k);
            let c = dot(&y, &v) * C64::from_polar(1.0, -w * t);
            for (a, vi) in acc.iter_mut().zip(&v) {
                *a += c * vi;
            }
        }
        let components = self.lambda_inv.mul_vec(&acc)?;
        Ok(PhaseVector {
            components,
            flavor: x0.flavor,
        })
    }

    /// Direct spectral sum `Σ_j e^{−iω_j t} ⟨ΛX0, φ_j⟩ Λ⁻¹φ_j` over the eigenpairs
    /// of `H`, assembled independently of [`KreinFactors::propagate`].
    pub fn spectral_sum(&self, x0: &PhaseVector, t: f64) -> Result<PhaseVector> {
        let y = self.lambda.mul_vec(&x0.components)?;
        let n = y.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, &w) in self.h_eigen.values.iter().enumerate() {
            let phi = self.h_eigen.vector(k);
            let mode = self.lambda_inv.mul_vec(&phi)?;
            let c = C64::from_polar(1.0, -w * t) * dot(&y, &phi);
            for (o, m) in out.iter_mut().zip(&mode) {
                *o += c * m;
            }
        }
        Ok(PhaseVector {
            components: out,
            flavor: x0.flavor,
        })
    }
}

/// Propagates `x0` to time `t`.
pub fn propagate(system: &HamiltonSystem, x0: &PhaseVector, t: f64) -> Result<PhaseVector> {
    krein_factors(system)?.propagate(x0, t)
}

/// Real-form propagation: checks that the system and data are real and
/// propagates without discarding the imaginary part, so the returned vector's
/// imaginary residue measures how well real data stays real.
pub fn propagate_real(system: &HamiltonSystem, xr0: &PhaseVector, t: f64) -> Result<PhaseVector> {
    propagate_real_with(system, &krein_factors(system)?, xr0, t)
}

pub fn propagate_real_with(
    system: &HamiltonSystem,
    factors: &KreinFactors,
    xr0: &PhaseVector,
    t: f64,
) -> Result<PhaseVector> {
    if !system.is_real(STRUCTURE_TOL) {
        return Err(Error::Validation(
            "real-form propagation needs J and B with real entries".into(),
        ));
    }
    if xr0.max_imag() > STRUCTURE_TOL * xr0.norm().max(1.0) {
        return Err(Error::Validation(
            "real-form propagation needs a real initial state".into(),
        ));
    }
    let mut out = factors.propagate(xr0, t)?;
    out.flavor = Flavor::RealForm;
    Ok(out)
}

/// Real energy `½⟨B X, X⟩`.
pub fn real_energy(system: &HamiltonSystem, x: &PhaseVector) -> f64 {
    let bx = system
        .b
        .mul_vec(&x.components)
        .expect("dimension checked by caller");
    0.5 * dot(&bx, &x.components).re
}

/// `‖A⁻¹[X(t) − X0] − Simpson(∫₀ᵗ X(s) ds)‖` with `n_quad` Simpson panels.
pub fn mild_solution_residual(
    system: &HamiltonSystem,
    x0: &PhaseVector,
    t: f64,
    n_quad: usize,
) -> Result<f64> {
    mild_solution_residual_with(system, &krein_factors(system)?, x0, t, n_quad)
}

pub fn mild_solution_residual_with(
    system: &HamiltonSystem,
    factors: &KreinFactors,
    x0: &PhaseVector,
    t: f64,
    n_quad: usize,
) -> Result<f64> {
    if n_quad < 2 {
        return Err(Error::Validation(format!(
            "n_quad must be at least 2, got {n_quad}"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let xt = factors.propagate(x0, t)?;
    let diff: Vec<C64> = xt
        .components
        .iter()
        .zip(&x0.components)
        .map(|(a, b)| a - b)
        .collect();
    let lhs = system
        .generator()
        .solve(&diff)
        .map_err(|_| Error::Numerical("generator A is singular".into()))?;
    let rule = simpson_rule(0.0, t, n_quad)?;
    let mut integral = vec![C64::new(0.0, 0.0); x0.len()];
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let xs = factors.propagate(x0, s)?;
        for (acc, v) in integral.iter_mut().zip(&xs.components) {
            *acc += v * w;
        }
    }
    Ok(lhs
        .iter()
        .zip(&integral)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn canonical_j() -> ComplexMatrix {
        ComplexMatrix::from_real_fn(2, |i, j| match (i, j) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        })
    }

    fn oscillator() -> HamiltonSystem {
        HamiltonSystem::new(canonical_j(), ComplexMatrix::identity(2), 1.0).unwrap()
    }

    #[test]
    fn condition_p_on_diagonal_matrices() {
        let p = check_condition_p(&ComplexMatrix::identity(3).scale(c(2.0)), 1.0).unwrap();
        assert!(p.holds);
        assert!((p.min_eig - 2.0).abs() < 1e-14);
        let p = check_condition_p(&ComplexMatrix::diagonal(&[0.5, 3.0]), 1.0).unwrap();
        assert!(!p.holds);
        assert!((p.min_eig - 0.5).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_b_is_rejected() {
        let mut b = ComplexMatrix::identity(2);
        b.set(0, 1, c(1.0));
        let err = check_condition_p(&b, 0.5).unwrap_err();
        assert!(matches!(err, Error::Symmetry { property, .. } if property.contains("Hermitian")));
    }

    #[test]
    fn invalid_structure_is_rejected() {
        let not_skew = ComplexMatrix::identity(2);
        assert!(matches!(
            HamiltonSystem::new(not_skew, ComplexMatrix::identity(2), 1.0),
            Err(Error::Symmetry { .. })
        ));
        let half = canonical_j().scale(c(0.5));
        let err = HamiltonSystem::new(half, ComplexMatrix::identity(2), 1.0).unwrap_err();
        assert!(matches!(err, Error::Symmetry { property, .. } if property.contains("J²")));
        let err = HamiltonSystem::new(canonical_j(), ComplexMatrix::diagonal(&[0.5, 3.0]), 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::ConditionP { min_eig, .. } if (min_eig - 0.5).abs() < 1e-14));
    }

    #[test]
    fn identity_energy_gives_h_equal_ij() {
        let sys = oscillator();
        let f = krein_factors(&sys).unwrap();
        assert!(
            f.lambda
                .sub(&ComplexMatrix::identity(2))
                .unwrap()
                .norm_max()
                < 1e-15
        );
        assert!(f.h.sub(&canonical_j().scale(I)).unwrap().norm_max() < 1e-15);
    }

    #[test]
    fn diagonal_energy_factors_by_hand() {
        let sys =
            HamiltonSystem::new(canonical_j(), ComplexMatrix::diagonal(&[4.0, 1.0]), 0.5).unwrap();
        let f = krein_factors(&sys).unwrap();
        assert!(
            f.lambda
                .sub(&ComplexMatrix::diagonal(&[2.0, 1.0]))
                .unwrap()
                .norm_max()
                < 1e-14
        );
        let expected = ComplexMatrix::from_rows(&[
            vec![c(0.0), C64::new(0.0, 2.0)],
            vec![C64::new(0.0, -2.0), c(0.0)],
        ])
        .unwrap();
        assert!(f.h.sub(&expected).unwrap().norm_max() < 1e-14);
        assert!(f.similarity_defect(&sys) < 1e-15);
    }

    #[test]
    fn oscillator_quarter_and_full_period() {
        let sys = oscillator();
        let x0 = PhaseVector::real(&[1.0, 0.0]);
        assert_eq!(propagate(&sys, &x0, 0.0).unwrap(), x0);
        let xq = propagate(&sys, &x0, FRAC_PI_2).unwrap();
        assert!(xq.distance(&PhaseVector::real(&[0.0, -1.0])) < 1e-14);
        let xf = propagate_real(&sys, &x0, 2.0 * PI).unwrap();
        assert!(xf.distance(&x0) < 1e-10);
        assert!(xf.max_imag() < 1e-12);
        assert_eq!(xf.flavor, Flavor::RealForm);
    }

    #[test]
    fn real_propagation_rejects_complex_data() {
        let sys = oscillator();
        let x0 = PhaseVector::new(vec![C64::new(1.0, 1.0), c(0.0)]);
        assert!(matches!(
            propagate_real(&sys, &x0, 1.0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn commutator_defect_by_hand() {
        assert_eq!(oscillator().commutator_defect(), 0.0);
        let sys =
            HamiltonSystem::new(canonical_j(), ComplexMatrix::diagonal(&[1.0, 2.0]), 0.5).unwrap();
        assert!((commutator_defect(&sys) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mild_solution_residual_is_small_and_fourth_order() {
        let sys = oscillator();
        let x0 = PhaseVector::real(&[1.0, 0.0]);
        assert_eq!(mild_solution_residual(&sys, &x0, 0.0, 8).unwrap(), 0.0);
        assert!(mild_solution_residual(&sys, &x0, 1.0, 64).unwrap() <= 1e-8);
        let r16 = mild_solution_residual(&sys, &x0, 1.0, 16).unwrap();
        let r32 = mild_solution_residual(&sys, &x0, 1.0, 32).unwrap();
        assert!((r16 / r32 - 16.0).abs() < 16.0 * 0.2, "ratio {}", r16 / r32);
        assert!(mild_solution_residual(&sys, &x0, 1.0, 1).is_err());
    }

    #[test]
    fn spectral_sum_matches_propagation() {
        let sys =
            HamiltonSystem::new(canonical_j(), ComplexMatrix::diagonal(&[4.0, 1.0]), 0.5).unwrap();
        let f = krein_factors(&sys).unwrap();
        let x0 = PhaseVector::real(&[0.3, -1.2]);
        for t in [0.1, 1.7, 5.0] {
            let a = f.propagate(&x0, t).unwrap();
            let b = f.spectral_sum(&x0, t).unwrap();
            assert!(a.distance(&b) < 1e-13);
        }
    }
}
