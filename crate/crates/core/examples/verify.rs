//! Runs the full check battery on a configuration file and prints one line
//! per check.
//!
//! cargo run --release --example verify -- configs/quick.json

use std::path::PathBuf;

use krein_spectral::checks::Verdict;
use krein_spectral::commands::battery;
use krein_spectral::config::RunConfig;

fn main() -> krein_spectral::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/quick.json"))
        });
    let loaded = RunConfig::load(&path)?;
    let verdict = Verdict::new(battery(&loaded)?);
    for check in &verdict.checks {
        println!("{}", check.line());
    }
    if verdict.passed {
        println!("all {} checks passed", verdict.checks.len());
    } else {
        println!("failed: {}", verdict.failed.join(", "));
    }
    Ok(())
}
