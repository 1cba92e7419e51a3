//! Generates one replicate of the two-field reference setup and prints a
//! summary of each component.
//!
//! ```bash
//! cargo run --release --example simulate_setup -- 7
//! ```

use std::time::Instant;

use dominant_features::simulate::{SetupGenerator, SimulationSetup};
use dominant_features::stats;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(7), |s| s.parse())?;
    let t0 = Instant::now();
    let generator = SetupGenerator::new(SimulationSetup::illustration())?;
    println!("factorized {} covariances in {:?}", generator.setup().fields.len(), t0.elapsed());
    let data = generator.generate(seed)?;
    for (spec, field) in generator.setup().fields.iter().zip(&data.components) {
        let m = stats::mean(field);
        let var = field.iter().map(|v| (v - m).powi(2)).sum::<f64>() / field.len() as f64;
        println!(
            "range {:.3}, smoothness {:.2}: mean {m:+.3}, variance {var:.3}",
            spec.params.range, spec.params.smoothness
        );
    }
    println!(
        "{} of {} nodes observed, y mean {:+.3}",
        data.observed.n_observed(),
        data.observed.n_active(),
        stats::mean(&data.y)
    );
    Ok(())
}
