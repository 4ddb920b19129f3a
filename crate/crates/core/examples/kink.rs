//! Static and moving kinks of the cubic model, the linearization potential
//! and its exponential tail.
//!
//! cargo run --release --example kink

use krein_spectral::gl::{fit_tail, kink_profile, linearization_potential, make_cubic_model};
use krein_spectral::grid::GridSpec;

fn main() -> krein_spectral::Result<()> {
    let model = make_cubic_model();
    let grid = GridSpec::new(40.0, 3999)?;

    let kink = kink_profile(&model, 0.0, &grid)?;
    println!("static kink residual {:.2e}", kink.residual(&model));
    for x in [0.5, 1.0, 2.0, 4.0] {
        let exact = (x / 2f64.sqrt()).tanh();
        println!(
            "  s({x}) = {:.12}  tanh(x/sqrt 2) = {exact:.12}",
            kink.value(x)
        );
    }

    for v in [0.0, 0.3, 0.6] {
        let lin = linearization_potential(&model, v, &grid)?;
        let tail = fit_tail(&lin.potential, grid.length());
        let expected = 2f64.sqrt() / (1.0 - v * v).sqrt();
        println!(
            "v = {v}: V(0) = {:.6}, fitted decay {:?} (expected {expected:.6}), evenness defect {:.1e}",
            lin.values[lin.values.len() / 2],
            tail.kappa,
            lin.evenness_defect()
        );
    }
    Ok(())
}
