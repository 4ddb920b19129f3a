//! Continuum eigenfunctions of the linearized kink by RK4 shooting and by a
//! Lippmann-Schwinger solve, compared in the weighted norm, plus the phase
//! shift across the continuum.
//!
//! cargo run --release --example modes

use krein_spectral::gl::make_cubic_model;
use krein_spectral::grid::GridSpec;
use krein_spectral::spectral::{
    reduce_mod_pi, unwrap_phase_shifts, LsSolver, ModeSolver, WeightedNorm,
};
use num_complex::Complex64;

fn main() -> krein_spectral::Result<()> {
    let model = make_cubic_model();
    let grid = GridSpec::new(40.0, 3999)?;
    let ode = ModeSolver::for_model(&model, &grid)?;
    let ls = LsSolver::for_model(&model, &grid)?;
    let norm = WeightedNorm::new(1.5)?;

    println!("omega   k         delta       ||e_ode - e_ls||_-s");
    for omega in [1.6, 2.0, 3.0, 5.0] {
        let a = ode.solve(omega)?;
        let (b, diag) = ls.solve_with_diagnostics(omega)?;
        let diff: Vec<Complex64> = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| Complex64::new(x - y, 0.0))
            .collect();
        println!(
            "{omega:<7} {:<9.6} {:<11.8} {:.2e}  (LS condition {:.1})",
            a.k(),
            a.phase_shift(),
            norm.grid_norm(&grid, &diff),
            diag.condition
        );
    }

    // The well is reflectionless, so the shift has the closed form
    // atan(1/q) + atan(2/q) modulo pi with q = sqrt(2) k.
    let omegas: Vec<f64> = (1..=12).map(|j| 2f64.sqrt() + 0.25 * j as f64).collect();
    let modes = ode.solve_many(&omegas)?;
    let deltas: Vec<f64> = modes.iter().map(|m| m.phase_shift()).collect();
    for ((w, m), d) in omegas.iter().zip(&modes).zip(unwrap_phase_shifts(&deltas)) {
        let q = 2f64.sqrt() * m.k();
        let exact = reduce_mod_pi((-3.0 * q).atan2(2.0 - q * q));
        println!(
            "omega {w:.4}  delta mod pi {:+.8} (closed form {exact:+.8})  unwrapped {d:+.8}",
            m.phase_shift()
        );
    }
    Ok(())
}
