//! Simulates the two-field reference data, resamples it with the Gibbs
//! sampler and selects smoothing scales from the maximum- and
//! Euclidean-norm scale-derivative curves of the posterior mean.
//!
//! ```bash
//! cargo run --release --example scale_selection -- <seed> <noise_sd> <burn_in> <samples>
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
    let seed: u64 = arg(1, 1);
    let noise_sd: f64 = arg(2, 0.2);
    let burn_in: usize = arg(3, 2000);
    let n_samples: usize = arg(4, 200);

    let t0 = Instant::now();
    let setup = SimulationSetup {
        noise_sd,
        missing_block: None,
        ..SimulationSetup::illustration()
    };
    let data = SetupGenerator::new(setup)?.generate(seed)?;
    println!("simulated in {:?}", t0.elapsed());

    let q = build_regular_q(&data.complete, AnisotropyWeights::isotropic())?;
    let cfg = ChainConfig {
        burn_in,
        n_samples,
        seed,
        ..ChainConfig::default()
    };
    let t1 = Instant::now();
    let chain = gibbs_complete(&data.y, &q, &HyperParams::default(), &cfg)?;
    let k = chain.kappa_y();
    println!(
        "sampled {} draws in {:?}; last κ_x = {:.3}, κ_y = {:.3}",
        chain.len(),
        t1.elapsed(),
        chain.kappa_x()[k.len() - 1],
        k[k.len() - 1]
    );

    let mean = posterior_mean(&chain)?;
    let smoother = Smoother::new(&q)?;
    let grid = ScaleGrid::default();
    let t2 = Instant::now();
    let curves = smoother.norm_curves(&mean, &grid)?;
    println!("norm curves in {:?}", t2.elapsed());
    if std::env::var_os("DUMP_CURVES").is_some() {
        for (i, l) in curves.lambdas.iter().enumerate() {
            println!("{:.4} {:.6e} {:.6e}", l.log10(), curves.maximum[i], curves.euclidean[i]);
        }
    }
    for norm in [NormKind::Maximum, NormKind::Euclidean] {
        let scales = select_scales(curves.get(norm), &grid, Some(norm))?;
        println!("{norm:?}: interior scales {:?}", scales.interior());
    }
    Ok(())
}
