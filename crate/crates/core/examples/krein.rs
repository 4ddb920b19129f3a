//! Finite-dimensional Hamilton systems with positive energy: the Krein
//! factorization, the propagator it defines, and the mild-solution identity.
//!
//! cargo run --release --example krein

use krein_spectral::hamilton::{
    krein_factors, mild_solution_residual, propagate_real, real_energy, SystemSampler,
};

fn main() -> krein_spectral::Result<()> {
    let mut sampler = SystemSampler::new(42);
    let system = sampler.system(8, true)?;
    let factors = krein_factors(&system)?;
    println!(
        "dimension {}, frequencies {:.4?}",
        system.dim(),
        factors.frequencies()
    );
    println!(
        "H hermitian defect {:.1e}, similarity defect {:.1e}",
        factors.hermitian_defect(),
        factors.similarity_defect(&system)
    );

    let x0 = sampler.state(system.dim(), true);
    let e0 = factors.energy_norm(&x0.components);
    for t in [0.5, 2.0, 10.0] {
        let x = factors.propagate(&x0, t)?;
        let direct = factors.spectral_sum(&x0, t)?;
        let real = propagate_real(&system, &x0, t)?;
        println!(
            "t = {t:>4}: energy drift {:.1e}, vs spectral sum {:.1e}, imaginary residue {:.1e}, real energy {:.6}",
            (factors.energy_norm(&x.components) - e0).abs() / e0,
            x.distance(&direct),
            real.max_imag(),
            real_energy(&system, &real)
        );
    }

    // Simpson's rule is fourth order, so each doubling divides the residual by about 16.
    let t = 2.0
        / factors
            .frequencies()
            .iter()
            .fold(0.0f64, |m, w| m.max(w.abs()));
    let residuals: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| mild_solution_residual(&system, &x0, t, n))
        .collect::<Result<_, _>>()?;
    println!(
        "mild solution residuals {:.2e} {:.2e} {:.2e}, ratios {:.2} {:.2}",
        residuals[0],
        residuals[1],
        residuals[2],
        residuals[0] / residuals[1],
        residuals[1] / residuals[2]
    );
    Ok(())
}
