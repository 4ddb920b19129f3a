//! Relativistic Ginzburg–Landau kinks and their linearization: nonlinearity
//! models, kink profiles, linearization potentials, grid operators on the odd
//! sector, moving-kink band structure and edge diagnostics.

pub mod bands;
pub mod edge;
pub mod kink;
pub mod model;
pub mod operator;
pub mod potential;

pub use bands::{continuous_spectrum_bands, dispersion_k2, BandCase, BandTable, Interval};
pub use edge::{edge_classification, EdgeClass, EdgeReport, EdgeThresholds};
pub use kink::{kink_profile, Kink};
pub use model::{make_cubic_model, ModelKind, NonlinearityModel};
pub use operator::{
    build_bv_operator, build_s_operator, kernel_vector, GridOperator, KernelVector, OperatorKind,
};
pub use potential::{
    fit_tail, linearization_potential, FnPotential, FreePotential, KinkPotential,
    LinearizationPotential, Potential, SampledPotential, SquareWell, TailFit,
};
