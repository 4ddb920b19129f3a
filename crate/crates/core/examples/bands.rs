//! Moving kinks: the continuous-spectrum band table, positivity of the
//! odd-sector operator B_v, and its translation kernel.
//!
//! cargo run --release --example bands

use krein_spectral::gl::{
    build_bv_operator, continuous_spectrum_bands, kernel_vector, make_cubic_model,
};
use krein_spectral::grid::GridSpec;

fn main() -> krein_spectral::Result<()> {
    for (v, m2) in [(0.5, 2.0), (0.5, 0.9), (0.5, 0.5), (0.8, 0.2)] {
        let table = continuous_spectrum_bands(v, m2)?;
        let bands: Vec<String> = table.bands.iter().map(ToString::to_string).collect();
        println!(
            "v = {v}, m2 = {m2}: {:?} {}, floor {}",
            table.case,
            bands.join(" U "),
            table.floor()
        );
    }

    let model = make_cubic_model();
    let coarse = GridSpec::new(20.0, 399)?;
    for v in [0.1, 0.3, 0.6] {
        let op = build_bv_operator(&model, &coarse, v)?;
        println!(
            "v = {v}: min eigenvalue of B_v on the odd sector {:.6}",
            op.min_eigenvalue()?
        );
    }

    let fine = GridSpec::new(20.0, 15999)?;
    let kv = kernel_vector(&model, 0.3, &fine)?;
    println!(
        "kernel (s', -v s'') at v = 0.3: |B_v w| / |w| = {:.2e}, evenness defect {:.1e}",
        kv.residual_ratio(),
        kv.evenness_defect()
    );
    Ok(())
}
