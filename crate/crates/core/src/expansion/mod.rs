//! Vector modes, projection of initial data, synthesis of the time evolution,
//! and the normalization and completeness diagnostics built on them.

pub mod decomposition;
pub mod modes;
pub mod pairing;
pub mod set;

pub use decomposition::{
    parseval_gap, project, project_full_line, synthesize, truncation_convergence, CoefficientRow,
    SpectralDecomposition, TruncationPoint, EVEN_TOL,
};
pub use modes::{
    lift_continuum, lift_discrete_pair, lift_modes, renormalize_symplectic, symplectic_pairing,
    AMode, Normalization, Spectrum, VectorMode,
};
pub use pairing::{pairing_check, vector_delta_check, PairingReport};
pub use set::{ExpansionSpec, ModeSet, ScalarModes};
