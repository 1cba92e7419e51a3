use std::fs;
use std::path::Path;
use std::process::Command;

use dominant_features::io::Grid;
use dominant_features::variogram::{MaternParams, VariogramBins};

const BIN: &str = env!("CARGO_BIN_EXE_dominant-features");

fn run(dir: &Path, args: &[&str]) -> i32 {
    let status = Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .status()
        .expect("binary runs");
    status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const PIPELINE: &str = r#"
seed = 3
[simulate]
grid = [20, 20]
[chain]
burn_in = 40
n_samples = 25
[scales.grid]
log_lo = -1.0
log_hi = 3.0
points_per_decade = 10
[input]
data = "sim/y.csv"
draws = "chain/draws.csv"
chain = "chain/chain.json"
detail_draws = ["details/detail_1_draws.csv"]
field = "details/detail_1.csv"
traits = ["sim/component_1.csv", "sim/component_2.csv", "sim/y_complete.csv"]
grids = ["details/detail_1.csv"]
[diversity]
radii = [0.05, 0.1]
[variogram]
directions = ["omni", "east-west"]
[variogram.settings.bins]
n_bins = 8
"#;

fn pipeline(root: &Path) {
    write(root, "run.toml", PIPELINE);
    for (cmd, out) in [
        ("simulate", "sim"),
        ("resample", "chain"),
        ("scales", "scales"),
        ("decompose", "details"),
        ("credibility", "cred"),
        ("variogram", "vario"),
        ("diversity", "div"),
        ("heatmap", "img"),
    ] {
        assert_eq!(run(root, &[cmd, "--config", "run.toml", "--out", out]), 0, "{cmd}");
        assert!(root.join(out).join("run.json").exists());
    }
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in fs::read_dir(dir).unwrap() {
        let sub = sub.unwrap().path();
        if !sub.is_dir() {
            continue;
        }
        for f in fs::read_dir(&sub).unwrap() {
            let f = f.unwrap().path();
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            if name != "timings.txt" {
                out.push((format!("{}/{name}", sub.file_name().unwrap().to_string_lossy()), fs::read(&f).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn pipeline_artifacts_exist_and_rerun_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path());
    pipeline(b.path());
    let (fa, fb) = (artifacts(a.path()), artifacts(b.path()));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "sim/y.csv",
        "sim/truth.csv",
        "sim/component_2.csv",
        "sim/simulation.json",
        "chain/posterior_mean.csv",
        "chain/interval_width_90.csv",
        "chain/draws.csv",
        "chain/diagnostics.json",
        "scales/norm_curves.csv",
        "scales/scales.json",
        "details/decomposition.json",
        "cred/credibility_1.csv",
        "cred/prob_positive_1.csv",
        "vario/bins_omni.csv",
        "vario/fit_ew.json",
        "vario/fits.csv",
        "div/frich_r1.csv",
        "div/feve_r2.csv",
        "div/diversity.json",
        "img/detail_1.ppm",
    ] {
        assert!(names.contains(&expected), "missing {expected}");
    }
    assert_eq!(fa, fb);

    let y = Grid::read_csv(&a.path().join("sim/y.csv")).unwrap();
    assert_eq!((y.n1, y.n2), (20, 20));
    assert_eq!(y.values.iter().filter(|v| v.is_nan()).count(), 9);
    let ppm = fs::read(a.path().join("img/detail_1.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n80 80\n255\n"));
}

#[test]
fn variogram_fixture_is_fitted_within_one_percent() {
    let dir = tempfile::tempdir().unwrap();
    let truth = MaternParams::new(0.1, 1.0, 0.0, 1.5).unwrap();
    let lags: Vec<f64> = (1..=15).map(|k| k as f64 / 30.0).collect();
    let gamma: Vec<f64> = lags.iter().map(|&h| truth.semivariance(h)).collect();
    let bins = VariogramBins::from_points(&lags, &gamma, 100);
    fs::write(dir.path().join("bins.json"), serde_json::to_string(&bins).unwrap()).unwrap();
    write(dir.path(), "fit.toml", "[input]\nbins = \"bins.json\"\n");
    assert_eq!(run(dir.path(), &["variogram", "--config", "fit.toml", "--out", "o"]), 0);
    let fit: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("o/fit.json")).unwrap()).unwrap();
    let p = &fit["params"];
    for (key, want) in [("range", 0.1), ("partial_sill", 1.0), ("smoothness", 1.5)] {
        let got = p[key].as_f64().unwrap();
        assert!((got / want - 1.0).abs() <= 0.01, "{key}: {got}");
    }
}

#[test]
fn constant_field_selects_no_scales() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("6,5,1\n");
    for _ in 0..6 {
        csv += "2.5,2.5,2.5,2.5,2.5\n";
    }
    write(dir.path(), "flat.csv", &csv);
    write(dir.path(), "c.toml", "[input]\ndata = \"flat.csv\"\n");
    assert_eq!(run(dir.path(), &["scales", "--config", "c.toml", "--out", "o"]), 0);
    let s: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("o/scales.json")).unwrap()).unwrap();
    assert_eq!(s["selected"]["lambdas"], serde_json::json!([0.0, "inf"]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "bad.toml", "sed = 4\n");
    assert_eq!(run(d, &["scales", "--config", "bad.toml"]), 2);
    write(d, "nodata.toml", "[input]\n");
    assert_eq!(run(d, &["scales", "--config", "nodata.toml"]), 2);
    write(d, "missing.toml", "[input]\ndata = \"nope.csv\"\n");
    assert_eq!(run(d, &["scales", "--config", "missing.toml"]), 3);
    write(d, "garbled.csv", "3,3,1\n1,2\n");
    write(d, "garbled.toml", "[input]\ndata = \"garbled.csv\"\n");
    assert_eq!(run(d, &["scales", "--config", "garbled.toml"]), 3);
    // too few bins for a fit
    write(
        d,
        "few.json",
        &serde_json::to_string(&VariogramBins::from_points(&[0.1, 0.2], &[0.5, 0.7], 10)).unwrap(),
    );
    write(d, "few.toml", "[input]\nbins = \"few.json\"\n");
    assert_eq!(run(d, &["variogram", "--config", "few.toml"]), 4);
}
