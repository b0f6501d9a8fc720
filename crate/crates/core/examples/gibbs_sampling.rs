//! Exact sampling of single-site Gibbs measures and of a local Gibbs chain
//! following a macroscopic profile.

use hydrochain::gibbs::{self, LambdaProfile, SiteSampler, Stream};
use hydrochain::profile::MacroProfile;
use hydrochain::thermo::{self, Lambda};
use hydrochain::Potential;

fn main() -> hydrochain::Result<()> {
    let draws = 100_000;
    for pot in [Potential::Harmonic, Potential::coslattice(0.5)?, Potential::fpu(0.5)?] {
        let lam = Lambda::from_tension(0.8, 0.2, 1.5);
        let target = thermo::grad_theta(lam, &pot)?;
        let sampler = SiteSampler::new(lam, &pot)?;
        let mut rng = gibbs::stream_rng(1, 0, Stream::Aux);
        let (mut r, mut p, mut e) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            let (ri, pi) = sampler.sample(&mut rng)?;
            r += ri;
            p += pi;
            e += 0.5 * pi * pi + pot.value(ri);
        }
        let n = draws as f64;
        println!(
            "{:<10} r {:.4} ({:.4})  p {:.4} ({:.4})  E {:.4} ({:.4})",
            pot.name(),
            r / n,
            target.r_bar,
            p / n,
            target.p_bar,
            e / n,
            target.e_tot
        );
    }

    // a chain whose stretch follows a bump
    let pot = Potential::coslattice(0.5)?;
    let profile = MacroProfile::analytic("1 + 0.4*sin(pi*x)^2", "0", "1.5 + 0.4*sin(pi*x)^2")?;
    let n = 100_000;
    let lp = LambdaProfile::from_macro(&profile, n, &pot)?;
    let chain = gibbs::sample_chain(&lp, &pot, &mut gibbs::stream_rng(1, 0, Stream::Init))?;
    println!("\nblock means of r along a chain of {n} sites:");
    for b in 0..10 {
        let sites = b * n / 10..(b + 1) * n / 10;
        let x = (sites.start + sites.end) as f64 / (2 * n) as f64;
        let (mean, se) = hydrochain::estimators::mean_and_se(&chain.r[sites]);
        println!("  x = {x:.2}: {mean:.4} +- {se:.4} (profile {:.4})", profile.state(x).r_bar);
    }
    Ok(())
}
