//! Equilibrium thermodynamics of the cos-lattice: free energy, tension,
//! sound speed and entropy over a small parameter grid, plus the
//! state -> parameters inversion.

use hydrochain::thermo::{self, Lambda};
use hydrochain::Potential;

fn main() -> hydrochain::Result<()> {
    let pot = Potential::coslattice(0.5)?;
    println!("{:>6} {:>6} {:>10} {:>10} {:>10} {:>8} {:>9}", "tau", "beta", "Theta", "r", "E", "c", "s");
    for tau in [-1.0, 0.0, 1.0] {
        for beta in [0.5, 1.0, 2.0] {
            let lam = Lambda::from_tension(tau, 0.0, beta);
            let u = thermo::grad_theta(lam, &pot)?;
            let c = thermo::sound_speed(u.r_bar, u.e_int(), &pot)?;
            let s = thermo::entropy(u.r_bar, u.e_int(), &pot)?;
            println!(
                "{tau:>6.2} {beta:>6.2} {:>10.6} {:>10.6} {:>10.6} {c:>8.5} {s:>9.5}",
                thermo::partition_log(lam, &pot)?,
                u.r_bar,
                u.e_tot
            );
        }
    }

    let u = hydrochain::MacroState::new(0.6, 0.2, 1.7);
    let inv = thermo::invert(u, &pot)?;
    let (p, pr, pe) = inv.tension_gradient();
    println!("\ninvert {u:?}");
    println!("  lambda = {:?} after {} Newton steps (residual {:.1e})", inv.lambda, inv.iterations, inv.residual);
    println!("  P = {p:.8}, P_r = {pr:.6}, P_e = {pe:.6}, c^2 = {:.6}", thermo::sound_speed_sq_from(p, pr, pe));
    println!("  Phi = {:.8}", thermo::legendre_phi(u, &pot)?);
    Ok(())
}
