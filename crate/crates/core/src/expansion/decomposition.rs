//! Projection of initial data onto the modes and synthesis of
//! `X(t) = Σ_k e^{−iω_k t} C_k a_k + ∫_{m≤|ω|≤M} e^{−iωt} C(ω) a_ω dω`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{odd_part, FieldState};
use crate::linalg::{C64, I};
use crate::spectral::WeightedNorm;

use super::modes::{Normalization, VectorMode};
use super::set::ModeSet;

/// Largest admissible relative even component of full-line initial data.
pub const EVEN_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    set: Arc<ModeSet>,
    /// Aligned with `set.discrete()`.
    discrete: Vec<C64>,
    /// Aligned with `set.continuum()`.
    continuum: Vec<C64>,
    cutoff: f64,
    /// `‖ΛX0‖²`.
    energy_sqr: f64,
}

/// One row of the coefficient table.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientRow {
    pub kind: &'static str,
    pub omega: f64,
    pub weight: f64,
    pub re: f64,
    pub im: f64,
}

/// `C(ω) = ⟨ΛX0, h_ω⟩/n(ω)` and `C_k = ⟨ΛX0, h_k⟩/‖h_k‖²`, with `ΛX0 = (S^{1/2}ψ0, ψ̇0)`
/// through the grid eigendecomposition.
pub fn project(x0: &FieldState, set: &Arc<ModeSet>) -> Result<SpectralDecomposition> {
    let grid = set.grid();
    if x0.len() != grid.n() {
        return Err(Error::Dimension {
            context: "initial data samples",
            expected: grid.n(),
            got: x0.len(),
        });
    }
    let y = FieldState {
        psi: set.calculus().sqrt(&x0.psi),
        dpsi: x0.dpsi.clone(),
    };
    let energy_sqr = grid.inner(&y.psi, &y.psi).re + grid.inner(&y.dpsi, &y.dpsi).re;
    let normalization = set.normalization();
    let discrete = set
        .discrete()
        .iter()
        .map(|m| m.pair_with_h(&y) / m.h_norm_sqr())
        .collect();
    let continuum = set
        .continuum()
        .par_iter()
        .map(|m| m.pair_with_h(&y) / normalization.density(m.omega()))
        .collect();
    Ok(SpectralDecomposition {
        set: Arc::clone(set),
        discrete,
        continuum,
        cutoff: set.cutoff(),
        energy_sqr,
    })
}

/// Like [`project`] for full-line samples on `(j − N)h`; rejects data whose even
/// part exceeds [`EVEN_TOL`] relative to the whole.
pub fn project_full_line(
    psi: &[f64],
    dpsi: &[f64],
    set: &Arc<ModeSet>,
) -> Result<SpectralDecomposition> {
    let (p, ep) = odd_part(set.grid(), psi)?;
    let (d, ed) = odd_part(set.grid(), dpsi)?;
    let even = ep.max(ed);
    if even > EVEN_TOL {
        return Err(Error::Validation(format!(
            "initial data has an even component of relative size {even:.3e} > {EVEN_TOL:e}; only odd data can be expanded"
        )));
    }
    project(&FieldState::real(&p, &d)?, set)
}

impl SpectralDecomposition {
    pub fn set(&self) -> &Arc<ModeSet> {
        &self.set
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn normalization(&self) -> Normalization {
        self.set.normalization()
    }

    pub fn discrete_coefficients(&self) -> &[C64] {
        &self.discrete
    }

    pub fn continuum_coefficients(&self) -> &[C64] {
        &self.continuum
    }

    /// `‖ΛX0‖²`.
    pub fn energy_sqr(&self) -> f64 {
        self.energy_sqr
    }

    fn active(&self, i: usize) -> bool {
        self.set.continuum()[i].omega().abs() <= self.cutoff * (1.0 + 1e-12)
    }

    /// The same decomposition with the continuum cut at `|ω| ≤ cutoff`.
    pub fn truncated(&self, cutoff: f64) -> Result<Self> {
        let m = self.set.m2().sqrt();
        if !(cutoff > m) || cutoff > self.set.cutoff() * (1.0 + 1e-12) {
            return Err(Error::Validation(format!(
                "truncation cutoff {cutoff} must lie in (m, M] = ({m}, {}]",
                self.set.cutoff()
            )));
        }
        Ok(Self {
            cutoff,
            ..self.clone()
        })
    }

    /// `Σ_k |C_k|²‖h_k‖² + Quad(n(ω)|C(ω)|²)`.
    pub fn spectral_mass(&self) -> f64 {
        let disc: f64 = self
            .set
            .discrete()
            .iter()
            .zip(&self.discrete)
            .map(|(m, c)| c.norm_sqr() * m.h_norm_sqr())
            .sum();
        let n = self.normalization();
        let cont: f64 = (0..self.continuum.len())
            .filter(|&i| self.active(i))
            .map(|i| {
                let m = &self.set.continuum()[i];
                self.set.weight(i) * n.density(m.omega()) * self.continuum[i].norm_sqr()
            })
            .sum();
        disc + cont
    }

    /// `‖ΛX0‖² − spectral mass`; nonnegative up to discretization (Bessel).
    pub fn parseval_gap(&self) -> f64 {
        self.energy_sqr - self.spectral_mass()
    }

    /// `X(t)` as the pair `(ψ(t), ψ̇(t))`.
    pub fn synthesize(&self, t: f64) -> Result<FieldState> {
        if !t.is_finite() {
            return Err(Error::Validation(format!(
                "synthesis time must be finite, got {t}"
            )));
        }
        // Each scalar profile carries the terms of both signs.
        let mut terms: Vec<(&[f64], C64, C64)> = Vec::new();
        for (pair, coefs) in self.set.discrete().chunks(2).zip(self.discrete.chunks(2)) {
            terms.push(pair_term(pair, coefs, 1.0, t));
        }
        for (j, (pair, coefs)) in self
            .set
            .continuum()
            .chunks(2)
            .zip(self.continuum.chunks(2))
            .enumerate()
        {
            if self.active(2 * j) {
                terms.push(pair_term(pair, coefs, self.set.weights()[j], t));
            }
        }
        let n = self.set.grid().n();
        let chunk = 256;
        let mut psi = vec![C64::new(0.0, 0.0); n];
        let mut dpsi = vec![C64::new(0.0, 0.0); n];
        psi.par_chunks_mut(chunk)
            .zip(dpsi.par_chunks_mut(chunk))
            .enumerate()
            .for_each(|(b, (p, d))| {
                let start = b * chunk;
                for (e, alpha, beta) in &terms {
                    let e = &e[start..start + p.len()];
                    for ((pp, dd), &v) in p.iter_mut().zip(d.iter_mut()).zip(e) {
                        *pp += alpha * v;
                        *dd += beta * v;
                    }
                }
            });
        Ok(FieldState { psi, dpsi })
    }

    /// Coefficient table `(kind, ω, weight, Re C, Im C)`.
    pub fn rows(&self) -> Vec<CoefficientRow> {
        let mut rows = Vec::new();
        for (m, c) in self.set.discrete().iter().zip(&self.discrete) {
            rows.push(CoefficientRow {
                kind: "discrete",
                omega: m.omega(),
                weight: 1.0,
                re: c.re,
                im: c.im,
            });
        }
        let mut cont: Vec<CoefficientRow> = (0..self.continuum.len())
            .filter(|&i| self.active(i))
            .map(|i| CoefficientRow {
                kind: "continuum",
                omega: self.set.continuum()[i].omega(),
                weight: self.set.weight(i),
                re: self.continuum[i].re,
                im: self.continuum[i].im,
            })
            .collect();
        cont.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        rows.extend(cont);
        rows
    }

    /// Continuum coefficient at the node closest to `omega` (for diagnostics).
    pub fn coefficient_near(&self, omega: f64) -> Option<(f64, C64)> {
        self.set
            .continuum()
            .iter()
            .zip(&self.continuum)
            .min_by(|a, b| {
                (a.0.omega() - omega)
                    .abs()
                    .total_cmp(&(b.0.omega() - omega).abs())
            })
            .map(|(m, c)| (m.omega(), *c))
    }
}

/// `(e, α, β)` such that the `±ω` pair contributes `ψ += α e`, `ψ̇ += β e`.
fn pair_term<'a>(
    pair: &'a [VectorMode],
    coefs: &[C64],
    weight: f64,
    t: f64,
) -> (&'a [f64], C64, C64) {
    let mut alpha = C64::new(0.0, 0.0);
    let mut beta = C64::new(0.0, 0.0);
    for (m, c) in pair.iter().zip(coefs) {
        let term = c * weight * m.scale() * (-I * (m.omega() * t)).exp();
        alpha += term / m.omega().abs();
        beta += term * m.rotation();
    }
    debug_assert!(pair.len() < 2 || pair[0].shares_scalar(&pair[1]));
    (pair[0].scalar(), alpha, beta)
}

pub fn synthesize(dec: &SpectralDecomposition, t: f64) -> Result<FieldState> {
    dec.synthesize(t)
}

pub fn parseval_gap(dec: &SpectralDecomposition) -> f64 {
    dec.parseval_gap()
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationPoint {
    pub cutoff: f64,
    /// `‖Λ(X_M − X_{M_max})‖ / ‖ΛX0‖`.
    pub energy_error: f64,
    /// `‖X_M − X_{M_max}‖₋ₛ / ‖ΛX0‖`.
    pub weighted_error: f64,
}

/// Errors of the truncated syntheses at time `t` against the largest cutoff of the ladder.
pub fn truncation_convergence(
    dec: &SpectralDecomposition,
    t: f64,
    ladder: &[f64],
    norm: &WeightedNorm,
) -> Result<Vec<TruncationPoint>> {
    if ladder.is_empty() {
        return Ok(Vec::new());
    }
    if ladder.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::Validation(
            "truncation ladder must be strictly increasing".into(),
        ));
    }
    let top = ladder[ladder.len() - 1];
    let reference = dec.truncated(top)?.synthesize(t)?;
    let scale = dec.energy_sqr().sqrt().max(f64::MIN_POSITIVE);
    let op = dec.set().operator();
    let grid = dec.set().grid();
    ladder
        .iter()
        .map(|&m| {
            let x = dec.truncated(m)?.synthesize(t)?;
            let d = x.sub(&reference)?;
            Ok(TruncationPoint {
                cutoff: m,
                energy_error: d.energy_norm(op) / scale,
                weighted_error: d.weighted_norm(grid, norm) / scale,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::OnceLock;

    use super::*;
    use crate::expansion::{lift_continuum, ExpansionSpec};
    use crate::gl::make_cubic_model;
    use crate::grid::GridSpec;
    use crate::spectral::{Bump, LatticeModeSolver};

    fn cubic_set() -> &'static Arc<ModeSet> {
        static SET: OnceLock<Arc<ModeSet>> = OnceLock::new();
        SET.get_or_init(|| {
            let grid = GridSpec::new(40.0, 1999).unwrap();
            let spec = ExpansionSpec {
                cutoff: Some(12.0),
                ..ExpansionSpec::default()
            };
            Arc::new(ModeSet::for_model(&make_cubic_model(), &grid, &spec).unwrap())
        })
    }

    fn packet_data(grid: &GridSpec) -> FieldState {
        FieldState::sample(grid, |x| x * (-x * x / 2.0).exp(), |_| 0.0)
    }

    #[test]
    fn zero_data_has_zero_coefficients() {
        let set = cubic_set();
        let dec = project(&FieldState::zeros(set.grid().n()), set).unwrap();
        assert!(dec
            .discrete_coefficients()
            .iter()
            .chain(dec.continuum_coefficients())
            .all(|c| c.norm() == 0.0));
        assert_eq!(dec.parseval_gap(), 0.0);
    }

    #[test]
    fn single_discrete_mode_rotates() {
        let set = cubic_set();
        let mode = &set.discrete()[0];
        let dec = project(&mode.a(), set).unwrap();
        let c = dec.discrete_coefficients();
        assert!((c[0] - 1.0).norm() < 1e-10, "{}", c[0]);
        assert!(c[1].norm() < 1e-10);
        let leak = dec
            .continuum_coefficients()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(leak < 1e-6, "{leak}");
        assert!(dec.parseval_gap().abs() < 1e-8 * dec.energy_sqr());
        let t = 2.7;
        let x = dec.synthesize(t).unwrap();
        let phase = (-I * (mode.omega() * t)).exp();
        let a = mode.a();
        let err = x
            .psi
            .iter()
            .zip(&a.psi)
            .chain(x.dpsi.iter().zip(&a.dpsi))
            .map(|(u, v)| (u - v * phase).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn real_packet_round_trip_and_bessel() {
        let set = cubic_set();
        let x0 = packet_data(set.grid());
        let dec = project(&x0, set).unwrap();
        let gap = dec.parseval_gap() / dec.energy_sqr();
        assert!(gap > -1e-6 && gap < 1e-3, "{gap}");
        let back = dec.synthesize(0.0).unwrap();
        let err = back.sub(&x0).unwrap().energy_norm(set.operator()) / dec.energy_sqr().sqrt();
        assert!(err < 1e-4, "{err}");
        let x = dec.synthesize(5.0).unwrap();
        assert!(x.max_imag() < 1e-10);
        // C(−ω) = conj(C(ω)) for real data.
        let c = dec.continuum_coefficients();
        let sym = c
            .chunks(2)
            .map(|p| (p[1] - p[0].conj()).norm())
            .fold(0.0, f64::max);
        assert!(sym < 1e-12);
    }

    #[test]
    fn positive_frequency_packet_recovers_its_profile() {
        // The box must hold the spatial tails of the packet; lattice modes are
        // exact at any spacing, so a long coarse grid is enough.
        let grid = GridSpec::new(120.0, 2399).unwrap();
        let spec = ExpansionSpec {
            cutoff: Some(6.0),
            ..ExpansionSpec::default()
        };
        let set = &Arc::new(ModeSet::for_model(&make_cubic_model(), &grid, &spec).unwrap());
        let solver = LatticeModeSolver::new(set.operator()).unwrap();
        let bump = Bump { half_width: 0.2 };
        let dw = 0.002;
        let n = set.grid().n();
        let mut x0 = FieldState::zeros(n);
        for j in 0..=200 {
            let w = 1.8 + j as f64 * dw;
            let g = bump.value(w - 2.0);
            if g == 0.0 {
                continue;
            }
            let a = lift_continuum(&solver.solve(w).unwrap()).unwrap().a();
            for i in 0..n {
                x0.psi[i] += a.psi[i] * (g * dw);
                x0.dpsi[i] += a.dpsi[i] * (g * dw);
            }
        }
        let dec = project(&x0, set).unwrap();
        let peak = bump.value(0.0);
        for (m, c) in set.continuum().iter().zip(dec.continuum_coefficients()) {
            let want = if m.omega() > 0.0 {
                bump.value(m.omega() - 2.0)
            } else {
                0.0
            };
            assert!(
                (c - want).norm() < 1e-2 * peak,
                "omega {} got {c} want {want}",
                m.omega()
            );
        }
    }

    #[test]
    fn even_data_is_rejected() {
        let set = cubic_set();
        let full: Vec<f64> = set
            .grid()
            .full_line_points()
            .iter()
            .map(|&x| (-x * x).exp())
            .collect();
        let zero = vec![0.0; full.len()];
        let err = project_full_line(&full, &zero, set).unwrap_err();
        assert!(err.to_string().contains("even component"));
        let odd: Vec<f64> = set
            .grid()
            .full_line_points()
            .iter()
            .map(|&x| x * (-x * x).exp())
            .collect();
        assert!(project_full_line(&odd, &zero, set).is_ok());
    }

    #[test]
    fn truncation_errors_decrease() {
        let set = cubic_set();
        let dec = project(&packet_data(set.grid()), set).unwrap();
        let ladder = [3.0, 6.0, 12.0];
        let pts =
            truncation_convergence(&dec, 4.0, &ladder, &WeightedNorm::new(1.5).unwrap()).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts[0].energy_error > pts[1].energy_error);
        assert_eq!(pts[2].energy_error, 0.0);
        assert!(
            truncation_convergence(&dec, 4.0, &[6.0, 3.0], &WeightedNorm::new(1.5).unwrap())
                .is_err()
        );
        assert!(dec.truncated(20.0).is_err());
    }
}
