//! Discrete spectrum of the linearized static kink, confirmed by two eigen
//! solvers, and the threshold classification at the continuum edge.
//!
//! cargo run --release --example spectrum

use krein_spectral::gl::kink_profile;
use krein_spectral::gl::{
    build_s_operator, edge_classification, make_cubic_model, EdgeThresholds, KinkPotential,
};
use krein_spectral::grid::GridSpec;
use krein_spectral::spectral::discrete_spectrum;

fn main() -> krein_spectral::Result<()> {
    let model = make_cubic_model();
    let grid = GridSpec::new(40.0, 8000)?;
    let op = build_s_operator(&model, &grid)?;

    let spectrum = discrete_spectrum(&op, model.m2())?;
    for (k, mode) in spectrum.modes.iter().enumerate() {
        println!(
            "lambda_{} = {:.10} (omega = {:.8}, residual {:.1e})",
            k + 1,
            mode.lambda,
            mode.omega,
            mode.residual
        );
    }
    println!(
        "exact odd-sector eigenvalue 1.5, omega = sqrt 1.5 = {:.8}",
        1.5f64.sqrt()
    );

    let ql = op.tridiagonal().eigenvalues_ql()?;
    println!("smallest eigenvalue by implicit QL: {:.10}", ql[0]);

    let kink = kink_profile(&model, 0.0, &grid)?;
    let potential = KinkPotential::new(&model, kink);
    let edge = edge_classification(&potential, &grid, &EdgeThresholds::default())?;
    println!(
        "edge at m2 = {}: {:?} (growth ratio {:.3})",
        model.m2(),
        edge.class,
        edge.growth_ratio
    );
    Ok(())
}
