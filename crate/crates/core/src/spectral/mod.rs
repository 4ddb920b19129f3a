//! Spectral data of `S = −d²/dx² + m² + V` on the odd sector: bound states below
//! the edge `m²` and continuum generalized eigenfunctions `e_ω` by two
//! independent routes (RK4 shooting and a Lippmann–Schwinger integral equation),
//! plus the exact continuum modes of the grid operator.

pub mod continuum;
pub mod delta;
pub mod discrete;
pub mod lattice;
pub mod lippmann;
pub mod weighted;

pub use continuum::{
    continuum_eigenfunction_ode, model_operator_and_solver, reduce_mod_pi, unwrap_phase_shifts,
    wavenumber, ContinuumMode, ModeRoute, ModeSolver, ModeSummary, EDGE_MARGIN,
};
pub use delta::{
    delta_normalization_check, packet, smeared_overlaps, Bump, Smearable, SmearedOverlaps,
};
pub use discrete::{discrete_spectrum, DiscreteMode, DiscreteSpectrum};
pub use lattice::LatticeModeSolver;
pub use lippmann::{continuum_eigenfunction_ls, LsDiagnostics, LsSolver};
pub use weighted::{weighted_norm, WeightedNorm};
