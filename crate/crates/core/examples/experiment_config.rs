//! Loading, validating and hashing experiment configurations, and the field
//! names reported for bad ones.

use hydrochain::config::ExperimentConfig;
use std::path::Path;

fn main() -> hydrochain::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["standard.toml", "harmonic.toml", "quick.toml"] {
        let cfg = ExperimentConfig::load(&dir.join(name))?;
        cfg.validate()?;
        let e = &cfg.experiment;
        println!("{name:<14} seed {:<9} N {:?} M {:?} members {} hash {}", cfg.seed, e.n, e.m, e.ensemble, &cfg.hash()[..12]);
    }

    let good = std::fs::read_to_string(dir.join("quick.toml"))?;
    let broken = [
        good.replace("a = 0.5", "a = 1.5"),
        good.replace("snapshot_times = [0.05, 0.1]", "snapshot_times = [0.1, 0.05]"),
        good.replace("block_k = [4, 8]", "block_k = [4, 7]"),
        good.replace("schedule = \"ramp\"", "schedule = \"missing\""),
        good.replace("ensemble = 16", "ensemble = 16\nenssemble = 2"),
    ];
    for text in broken {
        match ExperimentConfig::parse(&text).and_then(|c| c.validate()) {
            Ok(()) => println!("accepted"),
            Err(e) => println!("rejected: {e}"),
        }
    }
    Ok(())
}
