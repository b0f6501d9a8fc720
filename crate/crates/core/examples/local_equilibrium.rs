//! After a short drive the chain is locally in Gibbs equilibrium with the
//! parameters of the Euler solution; a deliberately wrong temperature is
//! rejected.

use hydrochain::chain::ChainState;
use hydrochain::estimators;
use hydrochain::experiment::{self, Setup};
use hydrochain::thermo::{self, Lambda};
use std::path::Path;

fn main() -> hydrochain::Result<()> {
    let setup = Setup::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/quick.toml"))?;
    let n = 128;
    let t = 0.1;
    let pde_run = experiment::solve_one(&setup, 128)?;
    let logs = experiment::successful(&experiment::ensemble(&setup, n)?)?;
    let ti = logs[0].snapshots.iter().position(|s| s.t_macro == t).unwrap();
    let states: Vec<&ChainState> = logs.iter().map(|l| &l.snapshots[ti].state).collect();
    let snap = pde_run.at(t).unwrap();

    let k = experiment::block_len(n, 1.0 / 8.0);
    let (_, summary) = experiment::local_equilibrium(&states, snap, k, &setup.pot)?;
    println!("N {n}, k {k}: {} blocks, mean scaled^2 {:.3e}, max |z| {:.2}", summary.blocks, summary.mean_scaled_sq, summary.max_abs_z);

    let i = n / 2;
    let u = experiment::pde_state_at(snap, i as f64 / n as f64);
    let lam = thermo::invert_to_lambda(u, &setup.pot)?;
    let tau = lam.tension();
    for beta in [lam.beta(), 2.0 * lam.beta()] {
        let probe = Lambda::from_tension(tau, lam.velocity(), beta);
        let le = estimators::local_equilibrium_moments(&states, i, k, probe, &setup.pot)?;
        let zmax = le.residuals.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
        println!("  beta {beta:.3} at site {i}: max |z| {zmax:.2}");
    }
    Ok(())
}
