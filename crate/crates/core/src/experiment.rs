//! Orchestration behind the command-line subcommands: ensembles, solver
//! refinement studies and micro/macro comparison, with CSV and JSON output.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chain::{self, ObservationLog, SimConfig};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimators::{self, FieldError, Moment, OneBlockRow, TestFunction};
use crate::gibbs::{self, LambdaProfile, Stream};
use crate::io::{self, write_csv, write_json};
use crate::numeric::cubic_at;
use crate::pde::{self, PdeRun, PdeSnapshot, SolverOptions};
use crate::potential::Potential;
use crate::profile::{MacroProfile, TensionSchedule};
use crate::thermo::{self, Lambda, MacroState, ThermoRow};

/// A validated configuration with its references resolved.
#[derive(Debug, Clone)]
pub struct Setup {
    pub cfg: ExperimentConfig,
    pub pot: Potential,
    pub profile: MacroProfile,
    pub sched: TensionSchedule,
}

impl Setup {
    /// `base` anchors relative paths inside the configuration.
    pub fn new(cfg: ExperimentConfig, base: &Path) -> Result<Self> {
        cfg.validate()?;
        let pot = cfg.potential()?;
        let profile = cfg.profile_def()?.resolve(&pot, base)?;
        let sched = cfg.schedule()?.clone();
        Ok(Self { cfg, pot, profile, sched })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg = ExperimentConfig::load(path)?;
        Self::new(cfg, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn seed(&self) -> u64 {
        self.cfg.seed
    }

    pub fn sim_config(&self, n: usize) -> Result<SimConfig> {
        let x = &self.cfg.experiment;
        let mut c = SimConfig::new(n, x.gamma, self.cfg.dt_micro()?, x.t_macro);
        c.snapshot_times = x.snapshot_times.clone();
        c.coupling = x.coupling;
        c.audit_swaps = x.audit_swaps;
        Ok(c)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { cfl: self.cfg.experiment.cfl, eos_spacing: Some(self.cfg.experiment.eos_spacing), ..Default::default() }
    }

    pub fn lambda_profile(&self, n: usize) -> Result<LambdaProfile> {
        match self.cfg.profile_def()?.equilibrium_lambda() {
            Some(lam) => Ok(LambdaProfile::constant(lam, n)),
            None => LambdaProfile::from_macro(&self.profile, n, &self.pot),
        }
    }
}

/// Runs `f` on a pool of `workers` threads (all cores when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::config("workers", "must be positive"));
        }
        b = b.num_threads(w);
    }
    let pool = b.build().map_err(|e| Error::config("workers", e.to_string()))?;
    Ok(pool.install(f))
}

/// Outcome of one ensemble member. Failures stay local to the member.
#[derive(Debug, Clone)]
pub struct Member {
    pub member: u64,
    pub outcome: std::result::Result<ObservationLog, Error>,
}

pub fn run_member(setup: &Setup, lam: &LambdaProfile, cfg: &SimConfig, member: u64) -> Result<ObservationLog> {
    let init = gibbs::sample_chain(lam, &setup.pot, &mut gibbs::stream_rng(setup.seed(), member, Stream::Init))?;
    let mut rng = gibbs::stream_rng(setup.seed(), member, Stream::Noise);
    chain::simulate(init, cfg, &setup.sched, &setup.pot, &mut rng, &mut [])
}

/// All members of the ensemble at chain size `n`, in member order.
pub fn ensemble(setup: &Setup, n: usize) -> Result<Vec<Member>> {
    let lam = setup.lambda_profile(n)?;
    let cfg = setup.sim_config(n)?;
    cfg.validate(&setup.pot)?;
    Ok((0..setup.cfg.experiment.ensemble as u64)
        .into_par_iter()
        .map(|member| Member { member, outcome: run_member(setup, &lam, &cfg, member) })
        .collect())
}

/// Successful logs; errors if every member failed.
pub fn successful(members: &[Member]) -> Result<Vec<ObservationLog>> {
    let ok: Vec<ObservationLog> = members.iter().filter_map(|m| m.outcome.as_ref().ok().cloned()).collect();
    for m in members {
        if let Err(e) = &m.outcome {
            log::warn!("member {} failed: {e}", m.member);
        }
    }
    if ok.is_empty() {
        if let Some(Err(e)) = members.first().map(|m| &m.outcome) {
            return Err(e.clone());
        }
    }
    Ok(ok)
}

fn manifest_header(setup: &Setup, command: &str) -> serde_json::Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": setup.cfg.hash(),
        "seed": setup.seed(),
        "potential": setup.pot,
        "schedule": setup.sched,
    })
}

fn merge(mut a: serde_json::Value, b: serde_json::Value) -> serde_json::Value {
    if let (Some(a), serde_json::Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

// ---------------------------------------------------------------- thermo

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoReport {
    pub lambda_rows: Vec<ThermoRow>,
    pub state_rows: Vec<ThermoRow>,
}

pub fn run_thermo(setup: &Setup, out: &Path) -> Result<ThermoReport> {
    let pot = setup.cfg.thermo_potential()?;
    let g = &setup.cfg.thermo.lambda_grid;
    let velocities = if g.velocity.is_empty() { vec![0.0] } else { g.velocity.clone() };
    let mut grid = Vec::new();
    for &t in &g.tension {
        for &v in &velocities {
            for &b in &g.beta {
                grid.push(Lambda::from_tension(t, v, b));
            }
        }
    }
    let lambda_rows: Vec<ThermoRow> = grid.par_iter().map(|&l| thermo::tabulate_lambda(l, &pot)).collect::<Result<_>>()?;
    let state_rows: Vec<ThermoRow> = setup
        .cfg
        .thermo
        .states
        .par_iter()
        .map(|s| thermo::tabulate_state(MacroState::new(s[0], s[1], s[2]), &pot))
        .collect::<Result<_>>()?;
    write_csv(&out.join("thermo_lambda.csv"), &lambda_rows)?;
    write_csv(&out.join("thermo_states.csv"), &state_rows)?;
    write_json(
        &out.join("manifest.json"),
        &merge(manifest_header(setup, "thermo"), json!({ "lambda_rows": lambda_rows.len(), "state_rows": state_rows.len(), "thermo_potential": pot })),
    )?;
    Ok(ThermoReport { lambda_rows, state_rows })
}

// ---------------------------------------------------------------- sample

/// Ensemble block average of `(r, p, E)` against the profile at one site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockTrackRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub site: usize,
    pub x: f64,
    pub k: usize,
    pub field: char,
    pub empirical: f64,
    pub predicted: f64,
    pub std_err: f64,
    pub z: f64,
}

pub fn block_len(n: usize, fraction: f64) -> usize {
    let k = ((n as f64 * fraction) / 2.0).round() as usize * 2;
    k.clamp(2, (n.saturating_sub(1) / 2) * 2)
}

fn block_centres(n: usize, k: usize) -> Vec<usize> {
    (0..n / (k + 1)).map(|m| m * (k + 1) + k / 2 + 1).collect()
}

pub fn block_tracking(states: &[&chain::ChainState], profile: &MacroProfile, k: usize, pot: &Potential) -> Vec<BlockTrackRow> {
    let n = states[0].n();
    let mut rows = Vec::new();
    for i in block_centres(n, k) {
        let x = i as f64 / n as f64;
        let u = profile.state(x);
        let predicted = [u.r_bar, u.p_bar, u.e_tot];
        let means: Vec<[f64; 3]> = states
            .iter()
            .map(|s| {
                let z = estimators::block_average(s, i, k, pot).expect("block fits");
                [z[0], z[1], -z[2]]
            })
            .collect();
        for (c, name) in ['r', 'p', 'E'].into_iter().enumerate() {
            let v: Vec<f64> = means.iter().map(|m| m[c]).collect();
            let (emp, se) = estimators::mean_and_se(&v);
            rows.push(BlockTrackRow { n, site: i, x, k, field: name, empirical: emp, predicted: predicted[c], std_err: se, z: (emp - predicted[c]) / se });
        }
    }
    rows
}

pub fn run_sample(setup: &Setup, out: &Path) -> Result<Vec<BlockTrackRow>> {
    let mut all = Vec::new();
    let mut sizes = Vec::new();
    for &n in &setup.cfg.experiment.n {
        let lam = setup.lambda_profile(n)?;
        let chains: Vec<chain::ChainState> = (0..setup.cfg.experiment.ensemble as u64)
            .into_par_iter()
            .map(|m| gibbs::sample_chain(&lam, &setup.pot, &mut gibbs::stream_rng(setup.seed(), m, Stream::Init)))
            .collect::<Result<_>>()?;
        for (m, c) in chains.iter().enumerate() {
            write_csv(&out.join(format!("sample/N{n}/member{m:03}.csv")), io::chain_rows(c, &setup.pot))?;
        }
        if chains.len() >= 2 {
            let refs: Vec<&chain::ChainState> = chains.iter().collect();
            let k = block_len(n, setup.cfg.estimators.local_eq_fraction);
            all.extend(block_tracking(&refs, &setup.profile, k, &setup.pot));
        }
        sizes.push(json!({ "N": n, "members": chains.len() }));
    }
    write_csv(&out.join("sample_blocks.csv"), &all)?;
    write_json(&out.join("manifest.json"), &merge(manifest_header(setup, "sample"), json!({ "ensembles": sizes })))?;
    Ok(all)
}

// ---------------------------------------------------------------- simulate

pub struct SimulateReport {
    pub per_n: Vec<(usize, Vec<Member>)>,
}

pub fn run_simulate(setup: &Setup, out: &Path) -> Result<SimulateReport> {
    let mut per_n = Vec::new();
    let mut entries = Vec::new();
    for &n in &setup.cfg.experiment.n {
        let members = ensemble(setup, n)?;
        for m in &members {
            match &m.outcome {
                Ok(log) => {
                    let dir = out.join(format!("simulate/N{n}/member{:03}", m.member));
                    write_csv(&dir.join("t0.csv"), io::chain_rows(&log.initial.state, &setup.pot))?;
                    for s in &log.snapshots {
                        write_csv(&dir.join(format!("{}.csv", io::time_label(s.t_macro))), io::chain_rows(&s.state, &setup.pot))?;
                    }
                    entries.push(json!({
                        "N": n, "member": m.member, "status": "ok", "n_swaps": log.n_swaps,
                        "audited_swaps": log.audited_swaps, "balance": chain::conserved_balance(log),
                    }));
                }
                Err(e) => entries.push(json!({ "N": n, "member": m.member, "status": "failed", "error": e.to_string() })),
            }
        }
        successful(&members)?;
        per_n.push((n, members));
    }
    write_json(&out.join("manifest.json"), &merge(manifest_header(setup, "simulate"), json!({ "members": entries })))?;
    Ok(SimulateReport { per_n })
}

// ---------------------------------------------------------------- solve

/// Self-convergence of one field between three grids `M`, `2M`, `4M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RichardsonRow {
    pub t: f64,
    pub m: usize,
    pub field: String,
    /// L1 distance between `M` and coarsened `2M`.
    pub diff_coarse: f64,
    /// L1 distance between `2M` and coarsened `4M`.
    pub diff_fine: f64,
    pub ratio: f64,
}

fn coarsen(cells: &[[f64; 3]]) -> Vec<[f64; 3]> {
    cells.chunks(2).map(|c| [0.5 * (c[0][0] + c[1][0]), 0.5 * (c[0][1] + c[1][1]), 0.5 * (c[0][2] + c[1][2])]).collect()
}

fn l1(a: &[[f64; 3]], fine: &[[f64; 3]], c: usize) -> f64 {
    let f = coarsen(fine);
    a.iter().zip(&f).map(|(u, v)| (u[c] - v[c]).abs()).sum::<f64>() / a.len() as f64
}

pub fn richardson(runs: &[PdeRun]) -> Vec<RichardsonRow> {
    let mut rows = Vec::new();
    for w in runs.windows(3) {
        if w[1].m != 2 * w[0].m || w[2].m != 2 * w[1].m {
            continue;
        }
        for s0 in &w[0].snapshots {
            let (Some(s1), Some(s2)) = (w[1].at(s0.t), w[2].at(s0.t)) else { continue };
            if s0.t == 0.0 {
                continue;
            }
            for (c, field) in ["r", "p", "E"].into_iter().enumerate() {
                let a = l1(&s0.grid.cells, &s1.grid.cells, c);
                let b = l1(&s1.grid.cells, &s2.grid.cells, c);
                rows.push(RichardsonRow { t: s0.t, m: w[0].m, field: field.into(), diff_coarse: a, diff_fine: b, ratio: a / b });
            }
        }
    }
    rows
}

pub struct SolveReport {
    pub runs: Vec<PdeRun>,
    pub richardson: Vec<RichardsonRow>,
}

pub fn solve_one(setup: &Setup, m: usize) -> Result<PdeRun> {
    let x = &setup.cfg.experiment;
    pde::solve(&setup.profile, &setup.sched, m, x.t_macro, &setup.pde_times(), &setup.pot, &setup.solver_options())
}

impl Setup {
    pub fn pde_times(&self) -> Vec<f64> {
        self.cfg.pde_times()
    }
}

fn write_run(out: &Path, run: &PdeRun) -> Result<()> {
    for s in &run.snapshots {
        write_csv(&out.join(format!("solve/M{}/{}.csv", run.m, io::time_label(s.t))), &s.rows)?;
    }
    Ok(())
}

pub fn run_solve(setup: &Setup, out: &Path) -> Result<SolveReport> {
    let mut ms = setup.cfg.experiment.m.clone();
    ms.sort_unstable();
    ms.dedup();
    let results: Vec<(usize, Result<PdeRun>)> = ms.par_iter().map(|&m| (m, solve_one(setup, m))).collect();
    let mut runs = Vec::new();
    let mut entries = Vec::new();
    let mut failure = None;
    for (m, r) in results {
        match r {
            Ok(run) => {
                write_run(out, &run)?;
                entries.push(json!({
                    "M": m, "status": "ok", "steps": run.dt_history.len(),
                    "dt_min": run.dt_history.iter().copied().fold(f64::INFINITY, f64::min),
                    "dt_max": run.dt_history.iter().copied().fold(0.0, f64::max),
                    "shock_timeline": run.shock_timeline, "eos_rebuilds": run.eos_rebuilds,
                    "entropy_drift": run.snapshots.iter().map(|s| (s.t, s.entropy_drift())).collect::<Vec<_>>(),
                }));
                runs.push(run);
            }
            Err(e) => {
                entries.push(json!({ "M": m, "status": "failed", "error": e.to_string() }));
                failure.get_or_insert(e);
            }
        }
    }
    let rich = richardson(&runs);
    write_csv(&out.join("richardson.csv"), &rich)?;
    write_json(&out.join("manifest.json"), &merge(manifest_header(setup, "solve"), json!({ "runs": entries, "cfl": setup.cfg.experiment.cfl })))?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(SolveReport { runs, richardson: rich })
}

// ---------------------------------------------------------------- compare

/// Weak errors of one (time, field, test function) across chain sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub t: f64,
    pub alpha: usize,
    pub j_name: String,
    pub vanishes_at_boundary: bool,
    pub n: Vec<usize>,
    pub rms_error: Vec<f64>,
    pub weak_error: Vec<f64>,
    pub std_err: Vec<f64>,
    /// `rms_error` strictly decreases with `N`.
    pub monotone: bool,
    /// `rms_error(N_max) / rms_error(N_min)`.
    pub ratio: f64,
}

pub fn convergence(errors: &[FieldError]) -> Vec<ConvergenceVerdict> {
    let mut keys: Vec<(f64, usize, String)> = Vec::new();
    for e in errors {
        let key = (e.t, e.alpha, e.j_name.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(t, alpha, j)| {
            let mut rows: Vec<&FieldError> = errors.iter().filter(|e| e.t == t && e.alpha == alpha && e.j_name == j).collect();
            rows.sort_by_key(|e| e.n);
            let rms: Vec<f64> = rows.iter().map(|e| e.rms_error).collect();
            ConvergenceVerdict {
                t,
                alpha,
                vanishes_at_boundary: rows[0].vanishes_at_boundary,
                j_name: j,
                n: rows.iter().map(|e| e.n).collect(),
                weak_error: rows.iter().map(|e| e.weak_error).collect(),
                std_err: rows.iter().map(|e| e.std_err).collect(),
                monotone: rms.windows(2).all(|w| w[1] < w[0]),
                ratio: rms[rms.len() - 1] / rms[0],
                rms_error: rms,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedOneBlock {
    pub t: f64,
    pub k: usize,
    pub b: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub mean_residual: f64,
    pub std_err: f64,
}

impl TimedOneBlock {
    fn new(t: f64, r: OneBlockRow) -> Self {
        Self { t, k: r.k, b: r.b, n: r.n, mean_residual: r.mean_residual, std_err: r.std_err }
    }
}

/// One moment of one block, flattened for CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalEqRow {
    pub t: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub site: usize,
    pub k: usize,
    pub moment: Moment,
    pub empirical: f64,
    pub predicted: f64,
    pub std_err: f64,
    pub z: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalEqSummary {
    pub t: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub blocks: usize,
    /// Mean of `scaled^2` over blocks and moments.
    pub mean_scaled_sq: f64,
    pub max_abs_z: f64,
}

/// PDE state at `x` by cubic interpolation through faces and cell centres.
pub fn pde_state_at(snap: &PdeSnapshot, x: f64) -> MacroState {
    let (xs, us) = snap.nodes();
    let c = |k: usize| cubic_at(&xs, &us.iter().map(|u| u[k]).collect::<Vec<_>>(), x);
    MacroState::new(c(0), c(1), c(2))
}

/// Local-equilibrium moments over disjoint blocks of length `k + 1`against
/// the PDE parameters at each block centre.
pub fn local_equilibrium(
    states: &[&chain::ChainState],
    snap: &PdeSnapshot,
    k: usize,
    pot: &Potential,
) -> Result<(Vec<LocalEqRow>, LocalEqSummary)> {
    let n = states[0].n();
    let centres = block_centres(n, k);
    let blocks: Vec<estimators::LocalEquilibrium> = centres
        .par_iter()
        .map(|&i| {
            let lam = thermo::invert_to_lambda(pde_state_at(snap, i as f64 / n as f64), pot)?;
            estimators::local_equilibrium_moments(states, i, k, lam, pot)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let (mut sq, mut cnt, mut zmax) = (0.0, 0usize, 0.0f64);
    for b in &blocks {
        for r in &b.residuals {
            rows.push(LocalEqRow {
                t: snap.t,
                n,
                site: b.site,
                k,
                moment: r.moment,
                empirical: r.empirical,
                predicted: r.predicted,
                std_err: r.std_err,
                z: r.z,
                scaled: r.scaled,
            });
            sq += r.scaled * r.scaled;
            cnt += 1;
            zmax = zmax.max(r.z.abs());
        }
    }
    let summary = LocalEqSummary { t: snap.t, n, k, blocks: blocks.len(), mean_scaled_sq: sq / cnt as f64, max_abs_z: zmax };
    Ok((rows, summary))
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub field_errors: Vec<FieldError>,
    pub verdicts: Vec<ConvergenceVerdict>,
    pub one_block: Vec<TimedOneBlock>,
    pub local_eq: Vec<LocalEqRow>,
    pub local_eq_summary: Vec<LocalEqSummary>,
}

impl CompareReport {
    /// Every weak error decreases monotonically in `N`.
    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.monotone)
    }
}

fn states_at(logs: &[ObservationLog], ti: usize) -> Vec<&chain::ChainState> {
    logs.iter().map(|l| &l.snapshots[ti].state).collect()
}

/// The comparison from already computed ensembles and a PDE run.
pub fn compare_from(setup: &Setup, micro: &[(usize, Vec<ObservationLog>)], pde_run: &PdeRun) -> Result<CompareReport> {
    let js: Vec<TestFunction> = setup.cfg.test_functions()?;
    let est = &setup.cfg.estimators;
    let mut field_errors = Vec::new();
    let mut one_block = Vec::new();
    let mut local_eq = Vec::new();
    let mut local_eq_summary = Vec::new();
    for (n, logs) in micro {
        field_errors.extend(estimators::field_error(logs, pde_run, &js, &setup.pot)?);
        let Some(first) = logs.first() else { continue };
        for (ti, snap) in first.snapshots.iter().enumerate() {
            let states = states_at(logs, ti);
            let tau = setup.sched.tau(snap.t_macro);
            let b = est.cutoff.unwrap_or(est.cutoff_factor / 20.0 * estimators::default_cutoff(&states, &setup.pot));
            let ks: Vec<usize> = est.block_k.iter().copied().filter(|&k| k + 1 <= *n).collect();
            for row in estimators::one_block_report(&states, &ks, b, tau, &setup.pot)? {
                one_block.push(TimedOneBlock::new(snap.t_macro, row));
            }
            if states.len() >= 16 {
                let pde_snap = pde_run
                    .at(snap.t_macro)
                    .ok_or_else(|| Error::TimeMisalignment { micro: first.snapshots.iter().map(|s| s.t_macro).collect(), macro_times: pde_run.snapshots.iter().map(|s| s.t).collect() })?;
                let k = block_len(*n, est.local_eq_fraction);
                let (rows, summary) = local_equilibrium(&states, pde_snap, k, &setup.pot)?;
                local_eq.extend(rows);
                local_eq_summary.push(summary);
            }
        }
    }
    let verdicts = convergence(&field_errors);
    Ok(CompareReport { field_errors, verdicts, one_block, local_eq, local_eq_summary })
}

pub fn write_compare(setup: &Setup, out: &Path, report: &CompareReport, pde_m: usize) -> Result<()> {
    write_csv(&out.join("comparison.csv"), &report.field_errors)?;
    write_csv(&out.join("one_block.csv"), &report.one_block)?;
    write_csv(&out.join("local_equilibrium.csv"), &report.local_eq)?;
    write_csv(&out.join("local_equilibrium_summary.csv"), &report.local_eq_summary)?;
    write_json(&out.join("convergence.json"), &report.verdicts)?;
    write_json(
        &out.join("manifest.json"),
        &merge(manifest_header(setup, "compare"), json!({ "pde_m": pde_m, "monotone": report.passed() })),
    )
}

pub fn run_compare(setup: &Setup, out: &Path) -> Result<CompareReport> {
    let m = *setup.cfg.experiment.m.iter().max().ok_or_else(|| Error::config("experiment.m", "need a PDE grid size"))?;
    let pde_run = solve_one(setup, m)?;
    let mut micro = Vec::new();
    for &n in &setup.cfg.experiment.n {
        micro.push((n, successful(&ensemble(setup, n)?)?));
    }
    let report = compare_from(setup, &micro, &pde_run)?;
    write_compare(setup, out, &report, m)?;
    Ok(report)
}

/// Output directory: command-line override, then the configuration, then `out`.
pub fn output_dir(setup: &Setup, cli: Option<PathBuf>) -> PathBuf {
    cli.or_else(|| setup.cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}
