//! Resamples a small simulated field, decomposes every posterior draw at
//! the two given scales and reports how many nodes of each detail are
//! credibly positive or negative.
//!
//! ```bash
//! cargo run --release --example credibility_maps -- <seed> <lambda_1> <lambda_2>
//! ```

use dominant_features::lattice::{build_regular_q, AnisotropyWeights};
use dominant_features::sampler::{gibbs_complete, ChainConfig, HyperParams};
use dominant_features::scalespace::{credibility_map, Credibility, ScaleSet, Smoother};
use dominant_features::simulate::{SetupGenerator, SimulationSetup};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = arg(1, 1);
    let scales = ScaleSet::new(vec![arg(2, 2.0), arg(3, 40.0)], None)?;
    let setup = SimulationSetup {
        missing_block: None,
        ..SimulationSetup::illustration().with_grid(40, 40, 0.025)
    };
    let data = SetupGenerator::new(setup)?.generate(seed)?;
    let q = build_regular_q(&data.complete, AnisotropyWeights::isotropic())?;
    let cfg = ChainConfig {
        burn_in: 500,
        n_samples: 100,
        seed,
        ..ChainConfig::default()
    };
    let chain = gibbs_complete(&data.y, &q, &HyperParams::default(), &cfg)?;
    let stack = Smoother::new(&q)?.decompose_chain(&chain, &scales)?;

    let lambdas = scales.lambdas();
    for l in 0..stack.n_details() - 1 {
        let draws = stack.detail_draws(l).expect("chain decomposition keeps draws");
        let map = credibility_map(&draws, 0.95)?;
        println!(
            "z{} (λ {} to {}): {} positive, {} negative, {} not credible",
            l + 1,
            lambdas[l],
            lambdas[l + 1],
            map.count(Credibility::CrediblyPositive),
            map.count(Credibility::CrediblyNegative),
            map.count(Credibility::NotCredible)
        );
    }
    let mean = &stack.details[stack.n_details() - 1];
    println!("mean level {:.3}", mean[0]);
    Ok(())
}
