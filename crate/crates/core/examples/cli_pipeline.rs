//! Drives the command-line front end through simulate, resample, scales,
//! decompose, credibility, variogram and heatmap with the configuration in
//! `examples/configs/pipeline.toml`. Each stage reads the previous stage's
//! artifacts. The installed binary takes the same arguments, e.g.
//! `dominant-features resample --config run.toml --out chain`.
//!
//! ```bash
//! cargo run --release --example cli_pipeline -- <output dir>
//! ```

use std::path::{Path, PathBuf};

use dominant_features::cli::{load_config, run, Cli, Command};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "pipeline-out".into()));
    std::fs::create_dir_all(&root)?;
    let base = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/pipeline.toml");
    let mut cfg = load_config(Some(&base))?;
    let stage = |name: &str| root.join(name);
    cfg.input.data = Some(stage("sim/y.csv"));
    cfg.input.draws = Some(stage("chain/draws.csv"));
    cfg.input.chain = Some(stage("chain/chain.json"));
    cfg.input.scales = Some(stage("scales/scales.json"));
    cfg.input.detail_draws = vec![stage("details/detail_1_draws.csv"), stage("details/detail_2_draws.csv")];
    cfg.input.field = Some(stage("details/detail_1.csv"));
    cfg.input.grids = vec![stage("chain/posterior_mean.csv"), stage("details/detail_1.csv")];
    let config = root.join("run.toml");
    std::fs::write(&config, toml::to_string(&cfg)?)?;

    for (command, out) in [
        (Command::Simulate, "sim"),
        (Command::Resample, "chain"),
        (Command::Scales, "scales"),
        (Command::Decompose, "details"),
        (Command::Credibility, "credibility"),
        (Command::Variogram, "variogram"),
        (Command::Heatmap, "images"),
    ] {
        let cli = Cli {
            command,
            config: Some(config.clone()),
            out: Some(stage(out)),
            seed: None,
            threads: None,
        };
        run(&cli).map_err(|e| format!("{command:?}: {e} (exit code {})", e.exit_code()))?;
        println!("{command:?} -> {}", stage(out).display());
    }
    println!("{}", std::fs::read_to_string(stage("variogram/fits.csv"))?);
    Ok(())
}
