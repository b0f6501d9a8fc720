//! The Euler system for the cos-lattice driven by a smooth tension ramp:
//! self-convergence, entropy conservation and the boundary identities.

use hydrochain::experiment::richardson;
use hydrochain::pde::{self, SolverOptions};
use hydrochain::profile::{MacroProfile, TensionSchedule};
use hydrochain::thermo::{self, Lambda};
use hydrochain::Potential;

fn main() -> hydrochain::Result<()> {
    let pot = Potential::coslattice(0.5)?;
    let sched = TensionSchedule::SmoothRamp { base: 1.0, amp: 0.5, omega: std::f64::consts::TAU };
    let profile = MacroProfile::constant(thermo::grad_theta(Lambda::new(1.0, 0.0, 1.0), &pot)?);
    println!("corner residuals: {:?}", pde::compatibility(&profile, &sched, &pot)?);

    let times = [0.125, 0.25];
    let runs = [128, 256, 512]
        .iter()
        .map(|&m| pde::solve(&profile, &sched, m, 0.25, &times, &pot, &SolverOptions::default()))
        .collect::<hydrochain::Result<Vec<_>>>()?;
    for run in &runs {
        let last = run.at(0.25).unwrap();
        let (left, right) = last.face_lambdas();
        println!(
            "M {:>4}: {} steps, entropy drift {:.2e}, |l2(0)| {:.1e}, |tau l3 - l1|(1) {:.1e}, shocks {:?}",
            run.m,
            run.dt_history.len(),
            last.entropy_drift(),
            left.l2.abs(),
            (sched.tau(0.25) * right.l3 - right.l1).abs(),
            run.shock_timeline.last().unwrap().1
        );
    }
    for row in richardson(&runs) {
        println!("t {:<5} {} ratio {:.3}", row.t, row.field, row.ratio);
    }

    let fine = runs[2].at(0.25).unwrap();
    println!("\n{:>6} {:>9} {:>9} {:>9}", "x", "r", "p", "tension");
    for row in fine.rows.iter().step_by(64) {
        println!("{:>6.3} {:>9.5} {:>9.5} {:>9.5}", row.x, row.r_bar, row.p_bar, row.tension);
    }
    Ok(())
}
