//! Eigenfunction expansion of an odd wave packet on the linearized kink,
//! checked against the grid-spectral propagator and a leapfrog integrator.
//!
//! cargo run --release --example expansion

use std::sync::Arc;

use krein_spectral::expansion::{project, truncation_convergence, ExpansionSpec, ModeSet};
use krein_spectral::field::FieldState;
use krein_spectral::gl::make_cubic_model;
use krein_spectral::grid::GridSpec;
use krein_spectral::oracle::{
    compare, leapfrog_propagate, uniform_times, GridSpectralPropagator, NormKind, Trajectory,
};
use krein_spectral::spectral::WeightedNorm;

fn main() -> krein_spectral::Result<()> {
    let model = make_cubic_model();
    let grid = GridSpec::new(40.0, 3999)?;
    let spec = ExpansionSpec {
        extra_breaks: vec![5.0, 10.0, 20.0],
        ..ExpansionSpec::with_cutoff(40.0)
    };
    let set = Arc::new(ModeSet::for_model(&model, &grid, &spec)?);
    println!(
        "{} continuum nodes on [sqrt 2, {}], {} discrete modes",
        set.nodes().len(),
        set.cutoff(),
        set.discrete().len()
    );

    // Gaussian-derivative packet, odd about the kink center, at rest.
    let x0 = FieldState::sample(&grid, |x| x * (-x * x).exp(), |_| 0.0);
    let dec = project(&x0, &set)?;
    println!(
        "energy {:.10}, spectral mass {:.10}, relative gap {:.1e}",
        dec.energy_sqr(),
        dec.spectral_mass(),
        dec.parseval_gap() / dec.energy_sqr()
    );

    let times = uniform_times(20.0, 41)?;
    let expansion = Trajectory::from_expansion(&dec, &times)?;
    let op = set.operator();
    let oracle =
        GridSpectralPropagator::from_calculus(set.calculus().clone()).propagate(&x0, &times)?;
    let norms = [NormKind::Energy, NormKind::Weighted { s: 1.5 }];
    let report = compare(&expansion, &oracle, op, &norms)?;
    for series in &report.series {
        println!(
            "expansion vs oracle, {:?}: max relative error {:.2e}",
            series.norm, series.max_relative
        );
    }

    let leapfrog = leapfrog_propagate(op, &x0, 0.0025, &times)?;
    let report = compare(&leapfrog, &oracle, op, &norms[..1])?;
    println!(
        "leapfrog vs oracle: max relative energy error {:.2e}",
        report.series[0].max_relative
    );

    for p in truncation_convergence(
        &dec,
        10.0,
        &[5.0, 10.0, 20.0, 40.0],
        &WeightedNorm::new(1.5)?,
    )? {
        println!(
            "M = {:>4}: error against M = 40 {:.2e}",
            p.cutoff, p.energy_error
        );
    }
    Ok(())
}
