//! The mode collection used by the expansion: discrete pairs `±ω_k` and
//! continuum modes at composite Gauss–Legendre nodes on `m ≤ |ω| ≤ M`, graded
//! geometrically toward the band edge.
//!
//! The continuum profiles come either from the grid recurrence (the default,
//! exact generalized eigenvectors of the same grid `S` that defines `ΛX0` and
//! the oracle) or from RK4 shooting of the continuous equation, which agrees to
//! `O(h²)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::GridCalculus;
use crate::error::{Error, Result};
use crate::gl::{kink_profile, GridOperator, KinkPotential, NonlinearityModel, Potential};
use crate::grid::GridSpec;
use crate::quadrature::{graded_breaks, Rule};
use crate::spectral::{discrete_spectrum, LatticeModeSolver, ModeSolver};

use super::modes::{
    lift_continuum, lift_discrete_pair, renormalize_symplectic, Normalization, VectorMode,
};

/// Source of the continuum profiles `e_ω`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarModes {
    #[default]
    Lattice,
    Ode,
}

/// Frequency quadrature on `[m, M]` (mirrored onto `[−M, −m]`) and the mode route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpansionSpec {
    pub scalar_modes: ScalarModes,
    /// Cutoff `M`; `None` means `20·m`.
    pub cutoff: Option<f64>,
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    /// Number of geometric refinements of the first panel above `m`.
    pub grading_levels: u32,
    pub grading_ratio: f64,
    /// Additional panel breaks, e.g. the cutoffs of a truncation ladder.
    pub extra_breaks: Vec<f64>,
}

impl Default for ExpansionSpec {
    fn default() -> Self {
        Self {
            scalar_modes: ScalarModes::Lattice,
            cutoff: None,
            panel_width: 0.25,
            nodes_per_panel: 20,
            grading_levels: 6,
            grading_ratio: 2.0,
            extra_breaks: Vec::new(),
        }
    }
}

impl ExpansionSpec {
    pub fn with_cutoff(cutoff: f64) -> Self {
        Self {
            cutoff: Some(cutoff),
            ..Self::default()
        }
    }

    pub fn resolve_cutoff(&self, m2: f64) -> f64 {
        self.cutoff.unwrap_or(20.0 * m2.sqrt())
    }

    /// Panel breaks on `[m, M]`.
    pub fn breaks(&self, m2: f64) -> Result<Vec<f64>> {
        let m = m2.sqrt();
        let cutoff = self.resolve_cutoff(m2);
        if !(cutoff > m) {
            return Err(Error::Validation(format!(
                "cutoff M = {cutoff} must exceed the edge m = {m}"
            )));
        }
        if self.nodes_per_panel == 0 {
            return Err(Error::Validation("nodes_per_panel must be positive".into()));
        }
        let mut breaks = graded_breaks(
            m,
            cutoff,
            self.panel_width,
            self.grading_levels,
            self.grading_ratio,
        )?;
        for &b in &self.extra_breaks {
            if b > m && b < cutoff {
                breaks.push(b);
            }
        }
        breaks.sort_by(f64::total_cmp);
        let tol = 1e-9 * self.panel_width;
        breaks.dedup_by(|a, b| (*a - *b).abs() < tol);
        Ok(breaks)
    }
}

#[derive(Clone, Debug)]
pub struct ModeSet {
    grid: GridSpec,
    m2: f64,
    cutoff: f64,
    normalization: Normalization,
    /// Positive quadrature nodes and weights.
    nodes: Vec<f64>,
    weights: Vec<f64>,
    breaks: Vec<f64>,
    /// `continuum[2j]` is `+ω_j`, `continuum[2j + 1]` is `−ω_j`.
    continuum: Vec<VectorMode>,
    /// `discrete[2k]` is `+ω_k`, `discrete[2k + 1]` is `−ω_k`.
    discrete: Vec<VectorMode>,
    calculus: Arc<GridCalculus>,
    scalar_modes: ScalarModes,
}

impl ModeSet {
    /// Builds discrete and continuum modes for `S = −d² + m² + V` on `grid`.
    pub fn build(
        potential: &dyn Potential,
        m2: f64,
        grid: &GridSpec,
        spec: &ExpansionSpec,
    ) -> Result<Self> {
        let op = GridOperator::schrodinger(potential, m2, grid)?;
        let calculus = Arc::new(GridCalculus::new(&op)?);
        let ode = match spec.scalar_modes {
            ScalarModes::Ode => Some(ModeSolver::new(potential, m2, grid)?),
            ScalarModes::Lattice => None,
        };
        Self::assemble(calculus, ode.as_ref(), spec)
    }

    /// Mode set for the static kink of `model`.
    pub fn for_model(
        model: &NonlinearityModel,
        grid: &GridSpec,
        spec: &ExpansionSpec,
    ) -> Result<Self> {
        let kink = kink_profile(model, 0.0, grid)?;
        let potential = KinkPotential::new(model, kink);
        Self::build(&potential, model.m2(), grid, spec)
    }

    /// Reuses an existing diagonalization of the grid `S`; `ode` is required
    /// when `spec` asks for shooting modes.
    pub fn assemble(
        calculus: Arc<GridCalculus>,
        ode: Option<&ModeSolver>,
        spec: &ExpansionSpec,
    ) -> Result<Self> {
        let grid = *calculus.operator().grid();
        let m2 = calculus.operator().m2();
        if let Some(solver) = ode {
            if solver.grid() != &grid || solver.m2() != m2 {
                return Err(Error::Validation(
                    "grid calculus and mode solver disagree on grid or mass".into(),
                ));
            }
        }
        let breaks = spec.breaks(m2)?;
        let rule = Rule::composite(&breaks, spec.nodes_per_panel);
        let scalar = match (spec.scalar_modes, ode) {
            (ScalarModes::Lattice, _) => {
                LatticeModeSolver::new(calculus.operator())?.solve_many_in_band(&rule.nodes)?
            }
            (ScalarModes::Ode, Some(solver)) => solver.solve_many_in_band(&rule.nodes)?,
            (ScalarModes::Ode, None) => {
                return Err(Error::Validation(
                    "scalar_modes = ode needs a shooting solver".into(),
                ));
            }
        };
        let mut continuum = Vec::with_capacity(2 * scalar.len());
        for e in &scalar {
            continuum.push(lift_continuum(e)?);
            continuum.push(lift_continuum(&e.mirrored())?);
        }
        let spectrum = discrete_spectrum(calculus.operator(), m2)?;
        let mut discrete = Vec::with_capacity(2 * spectrum.modes.len());
        for (k, d) in spectrum.modes.iter().enumerate() {
            discrete.extend(lift_discrete_pair(&grid, k, d)?);
        }
        log::info!(
            "mode set: {} discrete pairs, {} continuum nodes per sign on [{:.4}, {}]",
            spectrum.modes.len(),
            rule.nodes.len(),
            m2.sqrt(),
            spec.resolve_cutoff(m2)
        );
        Ok(Self {
            grid,
            m2,
            cutoff: spec.resolve_cutoff(m2),
            normalization: Normalization::TwoPi,
            nodes: rule.nodes,
            weights: rule.weights,
            breaks,
            continuum,
            discrete,
            calculus,
            scalar_modes: spec.scalar_modes,
        })
    }

    /// The same set with every mode in the symplectic normalization.
    pub fn renormalize_symplectic(&self) -> Result<Self> {
        Ok(Self {
            continuum: renormalize_symplectic(&self.continuum)?,
            discrete: renormalize_symplectic(&self.discrete)?,
            normalization: Normalization::Symplectic,
            ..self.clone()
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn continuum(&self) -> &[VectorMode] {
        &self.continuum
    }

    pub fn discrete(&self) -> &[VectorMode] {
        &self.discrete
    }

    pub fn calculus(&self) -> &Arc<GridCalculus> {
        &self.calculus
    }

    pub fn operator(&self) -> &GridOperator {
        self.calculus.operator()
    }

    pub fn scalar_modes(&self) -> ScalarModes {
        self.scalar_modes
    }

    /// Quadrature weight of continuum entry `i` (shared by `±ω`).
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i / 2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breaks_are_graded_and_include_extras() {
        let spec = ExpansionSpec {
            cutoff: Some(10.0),
            extra_breaks: vec![5.0, 7.3],
            ..ExpansionSpec::default()
        };
        let b = spec.breaks(2.0).unwrap();
        let m = 2f64.sqrt();
        assert_eq!(b[0], m);
        assert!((b[1] - m - 0.25 / 64.0).abs() < 1e-15);
        assert!(b.contains(&5.0) && b.contains(&7.3));
        assert_eq!(*b.last().unwrap(), 10.0);
        assert!(b.windows(2).all(|p| p[1] > p[0]));
        assert!(ExpansionSpec::with_cutoff(1.0).breaks(2.0).is_err());
    }

    #[test]
    fn default_cutoff_is_twenty_masses() {
        assert_eq!(ExpansionSpec::default().resolve_cutoff(4.0), 40.0);
    }
}
