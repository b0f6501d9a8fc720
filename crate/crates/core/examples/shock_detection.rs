//! A compressive drive on an FPU chain steepens into a shock; the monitor
//! flags it and the solver stops before the requested horizon.

use hydrochain::pde::{self, SolverOptions};
use hydrochain::profile::{MacroProfile, TensionSchedule};
use hydrochain::thermo::{self, Lambda};
use hydrochain::{Error, Potential};

fn main() -> hydrochain::Result<()> {
    let pot = Potential::Fpu { b: 1.0 };
    let profile = MacroProfile::constant(thermo::grad_theta(Lambda::from_tension(0.5, 0.0, 2.0), &pot)?);
    let sched = TensionSchedule::SmoothRamp { base: 0.5, amp: 3.0, omega: std::f64::consts::TAU };
    let horizon = 3.0;

    let lenient = SolverOptions { abort_on_shock: false, ..SolverOptions::default() };
    let times: Vec<f64> = (1..=6).map(|k| 0.1 * k as f64).collect();
    let run = pde::solve(&profile, &sched, 200, 0.6, &times, &pot, &lenient)?;
    println!("status changes: {:?}", run.shock_timeline);
    for snap in &run.snapshots {
        let g = &snap.grid;
        let grad = g.cells.windows(2).map(|w| (w[1][1] - w[0][1]).abs()).fold(0.0, f64::max) / g.dx();
        println!("  t {:.1}: max |dp/dx| {grad:.3}", snap.t);
    }

    match pde::solve(&profile, &sched, 200, horizon, &[horizon], &pot, &SolverOptions::default()) {
        Err(Error::ShockBeforeHorizon { t_shock, horizon }) => {
            println!("shock at t = {t_shock:.3}, before the horizon {horizon}")
        }
        Err(e) => return Err(e),
        Ok(_) => println!("no shock up to {horizon}"),
    }
    Ok(())
}
