//! Continuum generalized eigenfunctions `e_ω` of `S` on the odd sector,
//! normalized so that `⟨e_ω, e_ω′⟩ = π δ(|ω| − |ω′|)` in the full-line inner product.
//!
//! Far from the potential `e_ω(x) = c(ω) sin(kx + δ)` with `k = √(ω² − m²)` and
//! `c(ω) = √(|ω|/k)`; the sign is fixed by `e_ω′(0) > 0`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gl::{
    build_s_operator, kink_profile, GridOperator, KinkPotential, NonlinearityModel, Potential,
};
use crate::grid::GridSpec;
use crate::linalg::C64;
use crate::ode::integrate_linear;

use super::weighted::WeightedNorm;

/// Default fraction of `m` excluded above the band edge by the public constructors.
pub const EDGE_MARGIN: f64 = 0.02;
/// `|V|` must stay below this on the far-field fit window.
pub const FAR_FIELD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeRoute {
    Free,
    Ode,
    LippmannSchwinger,
    /// Exact solution of the grid recurrence (see [`super::lattice`]).
    Lattice,
}

#[derive(Clone, Debug)]
pub struct ContinuumMode {
    omega: f64,
    k: f64,
    phase: f64,
    amplitude: f64,
    raw_amplitude: f64,
    route: ModeRoute,
    grid: GridSpec,
    samples: Arc<Vec<f64>>,
    boundary: f64,
}

/// JSON sidecar for a mode.
#[derive(Clone, Debug, Serialize)]
pub struct ModeSummary {
    pub omega: f64,
    pub k: f64,
    /// Phase shift reduced to `(−π/2, π/2]`.
    pub delta: f64,
    /// Phase of the far-field form, in `(−π, π]`.
    pub phase: f64,
    pub amplitude: f64,
    pub raw_amplitude: f64,
    pub route: ModeRoute,
    pub eigen_residual: Option<f64>,
    pub far_field_defect: f64,
}

/// Reduces a phase modulo `π` into `(−π/2, π/2]`.
pub fn reduce_mod_pi(phase: f64) -> f64 {
    let mut d = phase.rem_euclid(PI);
    if d > FRAC_PI_2 {
        d -= PI;
    }
    d
}

/// Wavenumber `k = √(ω² − m²)`; errors if `|ω| ≤ m`.
pub fn wavenumber(omega: f64, m2: f64) -> Result<f64> {
    let k2 = omega * omega - m2;
    if !(k2 > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "omega = {omega} lies inside the gap (|omega| must exceed m = {})",
            m2.sqrt()
        )));
    }
    Ok(k2.sqrt())
}

pub(crate) fn check_edge_margin(omega: f64, m2: f64, margin: f64) -> Result<()> {
    let m = m2.sqrt();
    if !(omega.abs() > m * (1.0 + margin)) {
        return Err(Error::Domain(format!(
            "omega = {omega} is inside gap or too near edge (need |omega| > {:.6})",
            m * (1.0 + margin)
        )));
    }
    Ok(())
}

impl ContinuumMode {
    /// `√(|ω|/k) sin(kx)` for `V ≡ 0`.
    pub fn free(grid: &GridSpec, m2: f64, omega: f64) -> Result<Self> {
        let k = wavenumber(omega, m2)?;
        let c = (omega.abs() / k).sqrt();
        let samples = grid.points().iter().map(|&x| c * (k * x).sin()).collect();
        Ok(Self {
            omega,
            k,
            phase: 0.0,
            amplitude: c,
            raw_amplitude: 1.0 / k,
            route: ModeRoute::Free,
            grid: *grid,
            samples: Arc::new(samples),
            boundary: c * (k * grid.length()).sin(),
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_regular_solution(
        omega: f64,
        k: f64,
        phase: f64,
        raw_amplitude: f64,
        route: ModeRoute,
        grid: &GridSpec,
        samples: Vec<f64>,
        boundary: f64,
    ) -> Self {
        let amplitude = (omega.abs() / k).sqrt();
        Self::from_normalized(
            omega,
            k,
            phase,
            amplitude,
            raw_amplitude,
            route,
            grid,
            samples,
            boundary,
        )
    }

    /// Rescales a regular solution with far-field amplitude `raw_amplitude` to `amplitude`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_normalized(
        omega: f64,
        k: f64,
        phase: f64,
        amplitude: f64,
        raw_amplitude: f64,
        route: ModeRoute,
        grid: &GridSpec,
        samples: Vec<f64>,
        boundary: f64,
    ) -> Self {
        let scale = amplitude / raw_amplitude;
        Self {
            omega,
            k,
            phase,
            amplitude,
            raw_amplitude,
            route,
            grid: *grid,
            samples: Arc::new(samples.into_iter().map(|u| u * scale).collect()),
            boundary: boundary * scale,
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Phase `δ` of the far-field form `c sin(kx + δ)` in `(−π, π]`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Phase shift modulo `π`, in `(−π/2, π/2]`.
    pub fn phase_shift(&self) -> f64 {
        reduce_mod_pi(self.phase)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Far-field amplitude of the regular solution with `u′(0) = 1`.
    pub fn raw_amplitude(&self) -> f64 {
        self.raw_amplitude
    }

    pub fn route(&self) -> ModeRoute {
        self.route
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Values at the interior grid points.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub(crate) fn shared_samples(&self) -> Arc<Vec<f64>> {
        Arc::clone(&self.samples)
    }

    /// Value at `x = L` (not forced to zero).
    pub fn boundary_value(&self) -> f64 {
        self.boundary
    }

    pub fn complex_samples(&self) -> Vec<C64> {
        self.samples.iter().map(|&u| C64::new(u, 0.0)).collect()
    }

    pub fn far_field(&self, x: f64) -> f64 {
        self.amplitude * (self.k * x + self.phase).sin()
    }

    /// `e_{−ω}`, which shares the samples of `e_ω`.
    pub fn mirrored(&self) -> Self {
        Self {
            omega: -self.omega,
            ..self.clone()
        }
    }

    /// Same mode with samples multiplied by `factor` (used for fault injection).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: Arc::new(self.samples.iter().map(|u| u * factor).collect()),
            boundary: self.boundary * factor,
            amplitude: self.amplitude * factor,
            ..self.clone()
        }
    }

    /// `‖S e − ω² e‖` in `L²₋ₛ`, with the true value `e(L)` as the right neighbour.
    pub fn eigen_residual(&self, op: &GridOperator, norm: &WeightedNorm) -> Result<f64> {
        if op.grid() != &self.grid {
            return Err(Error::Validation(
                "mode and operator live on different grids".into(),
            ));
        }
        let se = op.apply_with_boundary(&self.samples, 0.0, self.boundary);
        let w2 = self.omega * self.omega;
        let r: Vec<f64> = se
            .iter()
            .zip(self.samples.iter())
            .map(|(a, b)| a - w2 * b)
            .collect();
        Ok(norm.grid_norm_real(&self.grid, &r))
    }

    /// `max|e − c sin(kx + δ)|` over the last quarter of the grid.
    pub fn far_field_defect(&self) -> f64 {
        let n = self.grid.n();
        (n - n / 4..n)
            .map(|i| (self.samples[i] - self.far_field(self.grid.x(i))).abs())
            .fold(0.0, f64::max)
    }

    pub fn summary(&self, eigen_residual: Option<f64>) -> ModeSummary {
        ModeSummary {
            omega: self.omega,
            k: self.k,
            delta: self.phase_shift(),
            phase: self.phase,
            amplitude: self.amplitude,
            raw_amplitude: self.raw_amplitude,
            route: self.route,
            eigen_residual,
            far_field_defect: self.far_field_defect(),
        }
    }
}

/// Shooting solver for `−e″ + (m² + V)e = ω²e`, `e(0) = 0`, `e′(0) = 1`, by RK4 at
/// step `h/2`, with a far-field fit on the last quarter of `[0, L]`.
#[derive(Clone, Debug)]
pub struct ModeSolver {
    grid: GridSpec,
    m2: f64,
    /// `V` at spacing `h/4` on `[0, L]`.
    table: Arc<Vec<f64>>,
    edge_margin: f64,
}

impl ModeSolver {
    pub fn new(potential: &dyn Potential, m2: f64, grid: &GridSpec) -> Result<Self> {
        if !(m2 > 0.0) {
            return Err(Error::Domain(format!(
                "mass squared must be positive, got {m2}"
            )));
        }
        let quarter = 0.25 * grid.h();
        let count = 4 * (grid.n() + 1);
        let table: Vec<f64> = (0..=count)
            .map(|j| potential.value(j as f64 * quarter))
            .collect();
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "potential has non-finite values on [0, L]".into(),
            ));
        }
        let start = count - count / 4;
        let tail = table[start..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if tail >= FAR_FIELD_TOL {
            return Err(Error::Grid(format!(
                "potential has not decayed on the far-field window [{:.3}, L]: max|V| = {tail:.3e} ≥ {FAR_FIELD_TOL:e}; increase L",
                start as f64 * quarter
            )));
        }
        Ok(Self {
            grid: *grid,
            m2,
            table: Arc::new(table),
            edge_margin: EDGE_MARGIN,
        })
    }

    /// Solver for the static kink of `model`.
    pub fn for_model(model: &NonlinearityModel, grid: &GridSpec) -> Result<Self> {
        let kink = kink_profile(model, 0.0, grid)?;
        Self::new(&KinkPotential::new(model, kink), model.m2(), grid)
    }

    /// Relative edge margin enforced by [`ModeSolver::solve`].
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

    pub fn edge_margin(&self) -> f64 {
        self.edge_margin
    }

    pub fn solve(&self, omega: f64) -> Result<ContinuumMode> {
        check_edge_margin(omega, self.m2, self.edge_margin)?;
        self.solve_in_band(omega)
    }

    /// Modes at several frequencies, solved in parallel.
    pub fn solve_many(&self, omegas: &[f64]) -> Result<Vec<ContinuumMode>> {
        use rayon::prelude::*;
        omegas.par_iter().map(|&w| self.solve(w)).collect()
    }

    pub(crate) fn solve_many_in_band(&self, omegas: &[f64]) -> Result<Vec<ContinuumMode>> {
        use rayon::prelude::*;
        omegas.par_iter().map(|&w| self.solve_in_band(w)).collect()
    }

    /// Like [`ModeSolver::solve`] but admits any `|ω| > m`; quadratures that
    /// integrate up to the edge need these nodes.
    pub(crate) fn solve_in_band(&self, omega: f64) -> Result<ContinuumMode> {
        let k = wavenumber(omega, self.m2)?;
        let shift = self.m2 - omega * omega;
        let q: Vec<f64> = self.table.iter().map(|v| v + shift).collect();
        let dt = 0.5 * self.grid.h();
        let (u, du) = integrate_linear(&q, dt, 0.0, 1.0);
        let steps = u.len() - 1;
        let start = steps - steps / 4;
        let (mut a, mut b) = (0.0, 0.0);
        for j in start..=steps {
            let (s, c) = (k * j as f64 * dt).sin_cos();
            let p = du[j] / k;
            a += u[j] * s + p * c;
            b += u[j] * c - p * s;
        }
        let count = (steps + 1 - start) as f64;
        let (a, b) = (a / count, b / count);
        let raw = a.hypot(b);
        if !(raw > 0.0) || !raw.is_finite() {
            return Err(Error::Numerical(format!(
                "far-field fit failed at omega = {omega}"
            )));
        }
        let samples = (0..self.grid.n()).map(|i| u[2 * (i + 1)]).collect();
        Ok(ContinuumMode::from_regular_solution(
            omega,
            k,
            b.atan2(a),
            raw,
            ModeRoute::Ode,
            &self.grid,
            samples,
            u[steps],
        ))
    }
}

/// `e_ω` by RK4 shooting for the static kink of `model`.
pub fn continuum_eigenfunction_ode(
    model: &NonlinearityModel,
    grid: &GridSpec,
    omega: f64,
) -> Result<ContinuumMode> {
    ModeSolver::for_model(model, grid)?.solve(omega)
}

/// Grid `S` together with a mode solver for the same potential.
pub fn model_operator_and_solver(
    model: &NonlinearityModel,
    grid: &GridSpec,
) -> Result<(GridOperator, ModeSolver)> {
    let op = build_s_operator(model, grid)?;
    let solver = ModeSolver::for_model(model, grid)?;
    Ok((op, solver))
}

/// Unwraps phase shifts sampled along increasing `|ω|` so that consecutive
/// values differ by less than `π/2`; the last (highest-energy) sample is kept
/// in `(−π/2, π/2]` since `δ → 0` as `ω → ∞`.
pub fn unwrap_phase_shifts(deltas: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; deltas.len()];
    let Some(last) = deltas.len().checked_sub(1) else {
        return out;
    };
    out[last] = reduce_mod_pi(deltas[last]);
    for j in (0..last).rev() {
        let step = reduce_mod_pi(deltas[j] - out[j + 1]);
        out[j] = out[j + 1] + step;
    }
    out
}
