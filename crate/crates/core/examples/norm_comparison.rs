//! Compares the interior minima of the maximum- and Euclidean-norm scale
//! derivative curves over seeded replicates of a reference setup. Each
//! replicate is resampled with a short Gibbs chain and scales are selected
//! on the posterior mean.
//!
//! ```bash
//! cargo run --release --example norm_comparison -- <setup 1|2|3> <replicates> <burn_in> <samples>
//! ```

use std::time::Instant;

use dominant_features::lattice::{build_regular_q, AnisotropyWeights};
use dominant_features::sampler::{gibbs_complete, posterior_mean, ChainConfig, HyperParams};
use dominant_features::scalespace::{select_scales, NormKind, ScaleGrid, Smoother};
use dominant_features::simulate::{SetupGenerator, SimulationSetup};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let which: u32 = arg(1, 2);
    let replicates: u64 = arg(2, 10);
    let burn_in: usize = arg(3, 500);
    let n_samples: usize = arg(4, 50);
    let setup = match which {
        2 => SimulationSetup::local_features(),
        3 => SimulationSetup::anisotropic(),
        _ => SimulationSetup {
            missing_block: None,
            ..SimulationSetup::illustration()
        },
    };
    let t0 = Instant::now();
    let gen = SetupGenerator::new(setup)?;
    let lat = gen.setup().lattice()?;
    let q = build_regular_q(&lat, AnisotropyWeights::isotropic())?;
    let smoother = Smoother::new(&q)?;
    let grid = ScaleGrid::default();
    println!("setup {which} prepared in {:?}", t0.elapsed());

    let fmt = |v: &[f64]| v.iter().map(|l| format!("{l:.1}")).collect::<Vec<_>>().join(", ");
    for seed in 1..=replicates {
        let t = Instant::now();
        let data = gen.generate(seed)?;
        let cfg = ChainConfig {
            burn_in,
            n_samples,
            seed,
            ..ChainConfig::default()
        };
        let chain = gibbs_complete(&data.y, &q, &HyperParams::default(), &cfg)?;
        let curves = smoother.norm_curves(&posterior_mean(&chain)?, &grid)?;
        let max = select_scales(curves.get(NormKind::Maximum), &grid, None)?;
        let euc = select_scales(curves.get(NormKind::Euclidean), &grid, None)?;
        println!(
            "seed {seed:>2}: maximum [{}], Euclidean [{}] ({:.1?})",
            fmt(max.interior()),
            fmt(euc.interior()),
            t.elapsed()
        );
    }
    Ok(())
}
