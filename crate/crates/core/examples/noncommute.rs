//! The linearized nonlinear Schrodinger equation is a real Hamilton system
//! whose J and B fail to commute once the cubic term is switched on.
//!
//! cargo run --release --example noncommute

use krein_spectral::grid::GridSpec;
use krein_spectral::hamilton::build_nls_linearization;

fn main() -> krein_spectral::Result<()> {
    let grid = GridSpec::new(8.0, 32)?;
    let center = 0.5 * grid.length();
    let s0: Vec<f64> = grid
        .points()
        .iter()
        .map(|x| (-(x - center).powi(2)).exp())
        .collect();
    let v = vec![0.0; grid.n()];
    for g in [0.0, 0.25, 1.0, 4.0] {
        let system = build_nls_linearization(&grid, &v, g, &s0)?;
        println!("g = {g}: ||JB - BJ|| = {:.6}", system.commutator_defect());
    }
    Ok(())
}
