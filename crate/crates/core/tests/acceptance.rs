//! Acceptance suite. Runs each criterion in turn, prints one PASS/FAIL line
//! per criterion with the measured numbers and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use hydrochain::chain::{self, NoiseCoupling, ObservationLog, SimConfig};
use hydrochain::config::ExperimentConfig;
use hydrochain::estimators::{self, Moment};
use hydrochain::experiment::{self, CompareReport, Setup};
use hydrochain::gibbs::{self, LambdaProfile, Stream};
use hydrochain::pde::PdeRun;
use hydrochain::profile::{MacroProfile, TensionSchedule};
use hydrochain::thermo::{self, Lambda, MacroState};
use hydrochain::Potential;

type Outcome = Result<String, String>;

const STANDARD: &str = include_str!("../configs/standard.toml");

fn cos() -> Potential {
    Potential::coslattice(0.5).unwrap()
}

fn lambda_grid() -> Vec<Lambda> {
    let mut out = Vec::new();
    for tau in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        for v in [-1.0, 0.0, 1.0] {
            for beta in [0.25, 0.5, 1.0, 2.0, 4.0] {
                out.push(Lambda::from_tension(tau, v, beta));
            }
        }
    }
    out
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn thermo_oracle() -> Outcome {
    let pot = Potential::Harmonic;
    let (mut e_theta, mut e_grad, mut e_phi, mut e_p, mut e_c) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for lam in lambda_grid() {
        let (tau, v, b) = (lam.tension(), lam.velocity(), lam.beta());
        let theta = (2.0 * std::f64::consts::PI / b).ln() + (lam.l1 * lam.l1 + lam.l2 * lam.l2) / (2.0 * b);
        let e = 1.0 / b + 0.5 * (tau * tau + v * v);
        e_theta = e_theta.max((thermo::partition_log(lam, &pot).map_err(|e| e.to_string())? - theta).abs());
        let g = thermo::grad_theta(lam, &pot).map_err(|e| e.to_string())?;
        e_grad = e_grad.max((g.r_bar - tau).abs().max((g.p_bar - v).abs()).max((g.e_tot - e).abs()));
        let u = MacroState::new(tau, v, e);
        let phi = lam.l1 * tau + lam.l2 * v - lam.l3 * e - theta;
        e_phi = e_phi.max((thermo::legendre_phi(u, &pot).map_err(|e| e.to_string())? - phi).abs());
        let e_int = u.e_int();
        e_p = e_p.max((thermo::tension(tau, e_int, &pot).map_err(|e| e.to_string())? - tau).abs());
        e_c = e_c.max((thermo::sound_speed(tau, e_int, &pot).map_err(|e| e.to_string())? - 1.0).abs());
    }
    check(
        e_theta < 1e-10 && e_grad < 1e-10 && e_phi < 1e-8 && e_p < 1e-8 && e_c < 1e-8,
        format!("max errors: Theta {e_theta:.1e}, DTheta {e_grad:.1e}, Phi {e_phi:.1e}, P {e_p:.1e}, c {e_c:.1e}"),
    )
}

fn duality_roundtrip() -> Outcome {
    let mut worst = [0.0f64; 2];
    for (k, pot) in [Potential::Harmonic, cos()].iter().enumerate() {
        for lam in lambda_grid() {
            let u = thermo::grad_theta(lam, pot).map_err(|e| e.to_string())?;
            let back = thermo::invert_to_lambda(u, pot).map_err(|e| format!("{lam:?}: {e}"))?;
            let d = (back.l1 - lam.l1).abs().max((back.l2 - lam.l2).abs()).max((back.l3 - lam.l3).abs());
            worst[k] = worst[k].max(d);
        }
    }
    check(worst.iter().all(|&w| w < 1e-8), format!("max |lambda error|: harmonic {:.1e}, coslattice {:.1e}", worst[0], worst[1]))
}

fn equilibrium_chain(n: usize, lam: Lambda, pot: &Potential, seed: u64, member: u64) -> chain::ChainState {
    gibbs::sample_chain(&LambdaProfile::constant(lam, n), pot, &mut gibbs::stream_rng(seed, member, Stream::Init)).unwrap()
}

fn noise_exactness() -> Outcome {
    let pot = cos();
    let sched = TensionSchedule::Sine { base: 1.0, amp: 0.2, omega: 1.0 };
    let mut audited = 0;
    let mut swaps = 0;
    for (member, coupling) in [(0, NoiseCoupling::ExactSplit), (1, NoiseCoupling::Strang)] {
        let mut cfg = SimConfig::new(64, 1.0, 0.01, 0.5);
        cfg.audit_swaps = true;
        cfg.coupling = coupling;
        let init = equilibrium_chain(64, Lambda::new(1.0, 0.0, 1.0), &pot, 3, member);
        let log = chain::simulate(init, &cfg, &sched, &pot, &mut gibbs::stream_rng(3, member, Stream::Noise), &mut [])
            .map_err(|e| e.to_string())?;
        audited += log.audited_swaps;
        swaps += log.n_swaps;
    }
    check(audited == swaps && swaps > 1000, format!("{audited} of {swaps} swaps audited bitwise (sum r, sum p, H)"))
}

fn energy_balance_order() -> Outcome {
    let pot = cos();
    let sched = TensionSchedule::Sine { base: 1.0, amp: 0.2, omega: 1.0 };
    let init = equilibrium_chain(64, Lambda::new(1.0, 0.0, 1.0), &pot, 11, 0);
    let mut res = Vec::new();
    for dt in [0.02, 0.01, 0.005] {
        let cfg = SimConfig::new(64, 1.0, dt, 0.2);
        let log = chain::simulate(init.clone(), &cfg, &sched, &pot, &mut gibbs::stream_rng(11, 0, Stream::Noise), &mut [])
            .map_err(|e| e.to_string())?;
        res.push(chain::conserved_balance(&log).last().unwrap().energy.abs());
    }
    let r1 = res[0] / res[1];
    let r2 = res[1] / res[2];
    check(
        (3.5..=4.5).contains(&r1) && (3.5..=4.5).contains(&r2),
        format!("residuals {:.3e} {:.3e} {:.3e}, ratios {r1:.3} {r2:.3}", res[0], res[1], res[2]),
    )
}

fn stationarity() -> Outcome {
    let pot = cos();
    let lam = Lambda::from_tension(1.0, 0.0, 1.0);
    let sched = TensionSchedule::Constant { tau: 1.0 };
    let n = 512;
    let mut cfg = SimConfig::new(n, 1.0, 0.01, 0.5);
    cfg.snapshot_times = vec![0.5];
    let logs: Vec<ObservationLog> = (0..64u64)
        .map(|m| {
            let init = equilibrium_chain(n, lam, &pot, 5, m);
            chain::simulate(init, &cfg, &sched, &pot, &mut gibbs::stream_rng(5, m, Stream::Noise), &mut []).unwrap()
        })
        .collect();
    let states: Vec<&chain::ChainState> = logs.iter().map(|l| &l.snapshots[0].state).collect();
    let profile = MacroProfile::constant(thermo::grad_theta(lam, &pot).unwrap());
    let rows = experiment::block_tracking(&states, &profile, 16, &pot);
    let inside = rows.iter().filter(|r| r.z.abs() <= 4.0).count();
    let frac = inside as f64 / rows.len() as f64;
    let zmax = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    check(frac >= 0.95, format!("{inside}/{} block means within 4 s.e. ({:.1}%), max |z| {zmax:.2}", rows.len(), 100.0 * frac))
}

fn standard_setup(pot: &str) -> Setup {
    let mut cfg = ExperimentConfig::parse(STANDARD).unwrap();
    if pot == "harmonic" {
        cfg.potentials.insert("harmonic".into(), Potential::Harmonic);
        cfg.experiment.potential = "harmonic".into();
    }
    Setup::new(cfg, Path::new(env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn pde_runs() -> &'static Vec<PdeRun> {
    static RUNS: OnceLock<Vec<PdeRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let setup = standard_setup("cos");
        [128, 256, 512].iter().map(|&m| experiment::solve_one(&setup, m).unwrap()).collect()
    })
}

fn pde_self_convergence() -> Outcome {
    let setup = standard_setup("cos");
    let runs = pde_runs();
    let rich = experiment::richardson(runs);
    let ratios: Vec<f64> = rich.iter().map(|r| r.ratio).collect();
    let rich_ok = !ratios.is_empty() && ratios.iter().all(|r| (3.4..=4.6).contains(r));
    let mut msg = format!("Richardson ratios {:?}", ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>());
    let mut ok = rich_ok;
    for &t in &[0.125, 0.25] {
        let d: Vec<f64> = runs.iter().map(|r| r.at(t).unwrap().entropy_drift()).collect();
        let (q1, q2) = (d[0] / d[1], d[1] / d[2]);
        ok &= (3.4..=4.6).contains(&q1) && (3.4..=4.6).contains(&q2);
        msg += &format!("; t={t} entropy drift {:.2e} {:.2e} {:.2e} (x{q1:.2}, x{q2:.2})", d[0], d[1], d[2]);
        let (mid, fine) = (runs[1].at(t).unwrap(), runs[2].at(t).unwrap());
        let coarse_fine: Vec<[f64; 3]> = fine.grid.cells.chunks(2).map(|c| [0.5 * (c[0][0] + c[1][0]), 0.5 * (c[0][1] + c[1][1]), 0.5 * (c[0][2] + c[1][2])]).collect();
        let trunc = mid
            .grid
            .cells
            .iter()
            .zip(&coarse_fine)
            .map(|(a, b)| (0..3).map(|c| (a[c] - b[c]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
            / 3.0;
        let (left, right) = fine.face_lambdas();
        let tau = setup.sched.tau(t);
        let b0 = left.l2.abs();
        let b1 = (tau * right.l3 - right.l1).abs();
        ok &= b0 < 10.0 * trunc && b1 < 10.0 * trunc;
        msg += &format!("; |l2(0)| {b0:.1e}, |tau l3 - l1|(1) {b1:.1e} vs 10x trunc {:.1e}", 10.0 * trunc);
    }
    check(ok, msg)
}

struct MicroData {
    setup: Setup,
    logs: Vec<(usize, Vec<ObservationLog>)>,
    report: CompareReport,
}

fn micro_macro(pot: &'static str) -> MicroData {
    let setup = standard_setup(pot);
    let t0 = Instant::now();
    let pde_run = experiment::solve_one(&setup, 512).unwrap();
    let logs: Vec<(usize, Vec<ObservationLog>)> = setup
        .cfg
        .experiment
        .n
        .iter()
        .map(|&n| (n, experiment::successful(&experiment::ensemble(&setup, n).unwrap()).unwrap()))
        .collect();
    let report = experiment::compare_from(&setup, &logs, &pde_run).unwrap();
    eprintln!("  [{pot} ensembles and comparison: {:.0} s]", t0.elapsed().as_secs_f64());
    MicroData { setup, logs, report }
}

fn harmonic_data() -> &'static MicroData {
    static D: OnceLock<MicroData> = OnceLock::new();
    D.get_or_init(|| micro_macro("harmonic"))
}

fn cos_data() -> &'static MicroData {
    static D: OnceLock<MicroData> = OnceLock::new();
    D.get_or_init(|| micro_macro("cos"))
}

fn at_times(d: &MicroData) -> Vec<&experiment::ConvergenceVerdict> {
    d.report.verdicts.iter().filter(|v| v.t == 0.125 || v.t == 0.25).collect()
}

fn harmonic_micro_macro() -> Outcome {
    let d = harmonic_data();
    let v = at_times(d);
    let bad: Vec<String> = v.iter().filter(|v| !(v.ratio < 0.7)).map(|v| format!("t={} a={} {} {:.3}", v.t, v.alpha, v.j_name, v.ratio)).collect();
    let worst = v.iter().map(|v| v.ratio).fold(0.0, f64::max);
    let mean = v.iter().map(|v| v.ratio).sum::<f64>() / v.len() as f64;
    check(
        bad.is_empty() && v.len() == 24,
        format!("{} comparisons, rms error ratio N=2048/512: mean {mean:.3}, worst {worst:.3}; failing {bad:?}", v.len()),
    )
}

fn anharmonic_micro_macro() -> Outcome {
    let d = cos_data();
    let v = at_times(d);
    let bad: Vec<String> = v
        .iter()
        .filter(|v| !v.monotone)
        .map(|v| format!("t={} a={} {} {:?}", v.t, v.alpha, v.j_name, v.rms_error.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()))
        .collect();
    let mean = v.iter().map(|v| v.ratio).sum::<f64>() / v.len() as f64;
    check(
        bad.is_empty() && v.len() == 24,
        format!("{} comparisons monotone over N=512,1024,2048: {}; mean ratio 2048/512 {mean:.3}; failing {bad:?}", v.len(), v.len() - bad.len()),
    )
}

fn one_block() -> Outcome {
    let d = cos_data();
    let mut ok = true;
    let mut msg = Vec::new();
    for t in [0.0, 0.25] {
        let mut rows: Vec<_> = d.report.one_block.iter().filter(|r| r.t == t && r.n == 2048).collect();
        rows.sort_by_key(|r| r.k);
        if rows.len() != 3 {
            return Err(format!("expected k = 8, 32, 128 at t = {t}, got {}", rows.len()));
        }
        for w in rows.windows(2) {
            let tol = 2.0 * (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt();
            ok &= w[1].mean_residual < w[0].mean_residual + tol;
        }
        msg.push(format!(
            "t={t}: {}",
            rows.iter().map(|r| format!("k={} {:.4}+-{:.4}", r.k, r.mean_residual, r.std_err)).collect::<Vec<_>>().join(", ")
        ));
    }
    check(ok, format!("b = 20 x mean energy, N=2048; {}", msg.join("; ")))
}

fn local_equilibrium() -> Outcome {
    let d = cos_data();
    let mut s: Vec<_> = d.report.local_eq_summary.iter().filter(|s| s.t == 0.25).collect();
    s.sort_by_key(|s| s.n);
    let shrink = s.len() == 3 && s.windows(2).all(|w| w[1].mean_scaled_sq < w[0].mean_scaled_sq);
    // power check: the same ensemble against twice the inverse temperature
    let (n, logs) = d.logs.iter().find(|(n, _)| *n == 2048).unwrap();
    let ti = logs[0].snapshots.iter().position(|s| s.t_macro == 0.25).unwrap();
    let states: Vec<&chain::ChainState> = logs.iter().map(|l| &l.snapshots[ti].state).collect();
    let pde_snap = pde_runs()[2].at(0.25).unwrap();
    let k = experiment::block_len(*n, d.setup.cfg.estimators.local_eq_fraction);
    let i = n / 2;
    let right = thermo::invert_to_lambda(experiment::pde_state_at(pde_snap, i as f64 / *n as f64), &d.setup.pot).unwrap();
    let wrong = Lambda::from_tension(right.tension(), right.velocity(), 2.0 * right.beta());
    let z_wrong = estimators::local_equilibrium_moments(&states, i, k, wrong, &d.setup.pot).unwrap();
    let z_right = estimators::local_equilibrium_moments(&states, i, k, right, &d.setup.pot).unwrap();
    let zmax = |le: &estimators::LocalEquilibrium| le.residuals.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let var_p = z_wrong.residuals.iter().find(|r| r.moment == Moment::VarP).unwrap().z;
    check(
        shrink && zmax(&z_wrong) > 10.0,
        format!(
            "mean scaled^2 at t=0.25: {}; wrong-beta max|z| {:.1} (var_p z {var_p:.1}), correct-beta max|z| {:.2}",
            s.iter().map(|s| format!("N={} k={} {:.2e}", s.n, s.k, s.mean_scaled_sq)).collect::<Vec<_>>().join(", "),
            zmax(&z_wrong),
            zmax(&z_right)
        ),
    )
}

fn main() {
    // `cargo test` passes harness flags; a filter argument selects criteria by number
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "thermo oracle", thermo_oracle),
        (2, "duality roundtrip", duality_roundtrip),
        (3, "noise exactness", noise_exactness),
        (4, "energy balance order", energy_balance_order),
        (5, "equilibrium stationarity", stationarity),
        (6, "PDE self-convergence", pde_self_convergence),
        (7, "harmonic micro-macro", harmonic_micro_macro),
        (8, "anharmonic micro-macro", anharmonic_micro_macro),
        (9, "one-block estimate", one_block),
        (10, "local equilibrium", local_equilibrium),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(m) => println!("PASS criterion {id} ({name}, {secs:.1} s): {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}, {secs:.1} s): {m}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
