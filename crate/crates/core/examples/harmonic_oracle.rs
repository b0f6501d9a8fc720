//! For the harmonic chain the Euler system is the linear wave equation; the
//! solver is checked against the reflected d'Alembert solution.

use hydrochain::pde::{self, SolverOptions};
use hydrochain::profile::{MacroProfile, TensionSchedule};
use hydrochain::thermo::{self, Lambda};
use hydrochain::Potential;

fn main() -> hydrochain::Result<()> {
    let pot = Potential::Harmonic;
    let sched = TensionSchedule::SmoothRamp { base: 1.0, amp: 0.5, omega: std::f64::consts::TAU };
    let profile = MacroProfile::constant(thermo::grad_theta(Lambda::new(1.0, 0.0, 1.0), &pot)?);
    let t = 0.6;
    let exact = |x: f64| {
        // the wave entering at x = 1 reaches the wall at t = 1
        let s = x + t - 1.0;
        let w = if s > 0.0 { sched.tau(s) - 1.0 } else { 0.0 };
        [1.0 + w, w]
    };
    let mut prev: Option<f64> = None;
    for m in [64, 128, 256, 512] {
        let run = pde::solve(&profile, &sched, m, t, &[t], &pot, &SolverOptions::default())?;
        let g = &run.snapshots[0].grid;
        let err = (0..m)
            .map(|j| {
                let e = exact(g.x(j));
                (g.cells[j][0] - e[0]).abs().max((g.cells[j][1] - e[1]).abs())
            })
            .fold(0.0, f64::max);
        match prev {
            Some(p) => println!("M {m:>4}: max error {err:.3e}, ratio {:.2}", p / err),
            None => println!("M {m:>4}: max error {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}
