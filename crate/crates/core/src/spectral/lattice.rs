//! Continuum modes of the grid operator itself. The three-term recurrence of
//! the tridiagonal `S_h` is solved exactly from `e(0) = 0`; beyond the potential
//! the solution is `A sin(κx) + B cos(κx)` with the lattice wavenumber
//! `2(1 − cos κh)/h² = ω² − m²`, and the density of states `dκ/dω = hω/sin κh`
//! fixes the amplitude so that `⟨e_ω, e_ω′⟩ = π δ(|ω| − |ω′|)` holds for the grid
//! inner product.
//!
//! These modes are generalized eigenvectors of the grid `S` to rounding, so
//! expansions built from them obey Bessel's inequality and conserve the grid
//! energy exactly; they converge to the ODE modes at `O(h²)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gl::GridOperator;
use crate::grid::GridSpec;

use super::continuum::{
    check_edge_margin, wavenumber, ContinuumMode, ModeRoute, EDGE_MARGIN, FAR_FIELD_TOL,
};

#[derive(Clone, Debug)]
pub struct LatticeModeSolver {
    grid: GridSpec,
    m2: f64,
    /// `h²·diag(S_h)`.
    scaled_diag: Vec<f64>,
    edge_margin: f64,
}

impl LatticeModeSolver {
    pub fn new(op: &GridOperator) -> Result<Self> {
        let grid = *op.grid();
        let n = grid.n();
        let start = n - n / 4;
        let tail = op.potential()[start..]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if tail >= FAR_FIELD_TOL {
            return Err(Error::Grid(format!(
                "potential has not decayed on the far-field window [{:.3}, L]: max|V| = {tail:.3e} ≥ {FAR_FIELD_TOL:e}; increase L",
                grid.x(start)
            )));
        }
        let h2 = grid.h() * grid.h();
        Ok(Self {
            grid,
            m2: op.m2(),
            scaled_diag: op.tridiagonal().diag.iter().map(|d| d * h2).collect(),
            edge_margin: EDGE_MARGIN,
        })
    }

    pub fn with_edge_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) {
            return Err(Error::Validation(format!(
                "edge margin must be nonnegative, got {margin}"
            )));
        }
        self.edge_margin = margin;
        Ok(self)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn solve(&self, omega: f64) -> Result<ContinuumMode> {
        check_edge_margin(omega, self.m2, self.edge_margin)?;
        self.solve_in_band(omega)
    }

    pub fn solve_many(&self, omegas: &[f64]) -> Result<Vec<ContinuumMode>> {
        omegas.par_iter().map(|&w| self.solve(w)).collect()
    }

    pub(crate) fn solve_many_in_band(&self, omegas: &[f64]) -> Result<Vec<ContinuumMode>> {
        omegas.par_iter().map(|&w| self.solve_in_band(w)).collect()
    }

    pub(crate) fn solve_in_band(&self, omega: f64) -> Result<ContinuumMode> {
        let k = wavenumber(omega, self.m2)?;
        let h = self.grid.h();
        let cos_kh = 1.0 - 0.5 * (h * k).powi(2);
        if !(cos_kh > -1.0) {
            return Err(Error::Grid(format!(
                "omega = {omega} lies above the grid band (need k·h < 2, got {:.4}); refine the grid",
                k * h
            )));
        }
        let kappa = cos_kh.acos() / h;
        let sin_kh = (kappa * h).sin();
        let n = self.grid.n();
        let w2h2 = omega * omega * h * h;
        // e[i] at x = (i + 1)h for i < n, e[n] at x = L.
        let mut e = vec![0.0; n + 1];
        e[0] = h;
        let mut prev = 0.0;
        for i in 0..n {
            let next = (self.scaled_diag[i] - w2h2) * e[i] - prev;
            prev = e[i];
            e[i + 1] = next;
        }
        let start = n - n / 4;
        let (mut a, mut b) = (0.0, 0.0);
        for i in start..n {
            let (s0, c0) = (kappa * self.grid.x(i)).sin_cos();
            let (s1, c1) = (kappa * (self.grid.x(i) + h)).sin_cos();
            a += (e[i + 1] * c0 - e[i] * c1) / sin_kh;
            b += (e[i] * s1 - e[i + 1] * s0) / sin_kh;
        }
        let count = (n - start) as f64;
        let (a, b) = (a / count, b / count);
        let raw = a.hypot(b);
        if !(raw > 0.0) || !raw.is_finite() {
            return Err(Error::Numerical(format!(
                "far-field fit failed at omega = {omega}"
            )));
        }
        let amplitude = (h * omega.abs() / sin_kh).sqrt();
        let boundary = e[n];
        e.truncate(n);
        Ok(ContinuumMode::from_normalized(
            omega,
            kappa,
            b.atan2(a),
            amplitude,
            raw,
            ModeRoute::Lattice,
            &self.grid,
            e,
            boundary,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl::{build_s_operator, make_cubic_model, FreePotential};
    use crate::spectral::{ModeSolver, WeightedNorm};

    #[test]
    fn free_lattice_mode_is_a_sampled_sine() {
        let grid = GridSpec::new(20.0, 999).unwrap();
        let op = GridOperator::schrodinger(&FreePotential, 1.0, &grid).unwrap();
        let e = LatticeModeSolver::new(&op).unwrap().solve(3.0).unwrap();
        assert!(e.phase().abs() < 1e-10);
        let c = e.amplitude();
        let err = grid
            .points()
            .iter()
            .zip(e.samples())
            .map(|(&x, u)| (u - c * (e.k() * x).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        assert!(e.k() > 8f64.sqrt());
    }

    #[test]
    fn cubic_lattice_mode_is_a_grid_eigenvector_close_to_shooting() {
        let model = make_cubic_model();
        let grid = GridSpec::new(40.0, 3999).unwrap();
        let op = build_s_operator(&model, &grid).unwrap();
        let norm = WeightedNorm::new(1.5).unwrap();
        let lattice = LatticeModeSolver::new(&op).unwrap().solve(2.0).unwrap();
        let res = lattice.eigen_residual(&op, &norm).unwrap();
        assert!(res < 1e-9, "{res}");
        assert!(lattice.far_field_defect() < 1e-9);
        let ode = ModeSolver::for_model(&model, &grid)
            .unwrap()
            .solve(2.0)
            .unwrap();
        let diff: Vec<f64> = lattice
            .samples()
            .iter()
            .zip(ode.samples())
            .map(|(a, b)| a - b)
            .collect();
        let d = norm.grid_norm_real(&grid, &diff);
        assert!(d < 1e-3 && d > 1e-8, "{d}");
        assert!((lattice.phase_shift() - ode.phase_shift()).abs() < 1e-3);
    }

    #[test]
    fn above_grid_band_is_rejected() {
        let grid = GridSpec::new(10.0, 99).unwrap();
        let op = GridOperator::schrodinger(&FreePotential, 1.0, &grid).unwrap();
        let err = LatticeModeSolver::new(&op)
            .unwrap()
            .solve(25.0)
            .unwrap_err();
        assert!(err.to_string().contains("grid band"));
    }
}
