//! Micro against macro on the quick configuration: ensembles of chains at
//! two sizes against the Euler solution, with the weak errors per test
//! function.

use std::path::Path;

use hydrochain::experiment::{self, Setup};

fn main() -> hydrochain::Result<()> {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/quick.toml");
    let setup = Setup::load(&cfg)?;
    let out = std::env::temp_dir().join("hydrochain_micro_macro");
    let report = experiment::run_compare(&setup, &out)?;
    println!("{:>6} {:>2} {:<10} {:>24} {:>8}", "t", "a", "J", "rms error by N", "ratio");
    for v in &report.verdicts {
        let errs: Vec<String> = v.rms_error.iter().map(|e| format!("{e:.2e}")).collect();
        println!("{:>6} {:>2} {:<10} {:>24} {:>8.3}", v.t, v.alpha, v.j_name, errs.join(" "), v.ratio);
    }
    println!("all decreasing: {}", report.passed());
    println!("outputs in {}", out.display());
    Ok(())
}
