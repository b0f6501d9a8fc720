//! Euler system in Lagrangian coordinates,
//! `d_t (r, p, E) = d_x (p, P, pP)` on `[0, 1]`, with a wall (`p = 0`) at
//! `x = 0` and prescribed tension (`P = tau(t)`) at `x = 1`.
//!
//! Second-order MacCormack with alternating predictor direction. Boundary
//! values come from quadratic extrapolation of the interior corrected along
//! the incoming characteristic; two ghost cells per side are filled from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eos::{eos_direct, Eos, EosPoint};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::profile::{MacroProfile, TensionSchedule};
use crate::thermo::{self, Lambda, MacroState};

type Cell = [f64; 3];

const GHOST: usize = 2;
/// Margin below the CFL limit so the second step of a pair stays admissible.
const PAIR_SAFETY: f64 = 0.995;

/// Macroscopic flux `(p, P, -p P)` of the conserved vector `(r, p, -E)`.
pub fn flux(u: MacroState, pot: &Potential) -> Result<[f64; 3]> {
    let p = thermo::tension(u.r_bar, u.e_int(), pot)?;
    Ok([u.p_bar, p, -u.p_bar * p])
}

/// Jacobian of `flux` with respect to `(r, p, -E)`; eigenvalues `{-c, 0, c}`.
pub fn jacobian_flux(u: MacroState, pot: &Potential) -> Result<[[f64; 3]; 3]> {
    let (p, pr, pe) = thermo::tension_partials(u.r_bar, u.e_int(), pot)?;
    let v = u.p_bar;
    Ok([
        [0.0, 1.0, 0.0],
        [pr, -v * pe, -pe],
        [-v * pr, -p + v * v * pe, v * pe],
    ])
}

/// Cell-centred solution on `M` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub m: usize,
    pub t_macro: f64,
    /// `(r, p, E)` per cell.
    pub cells: Vec<Cell>,
    /// Entropy per cell at `t = 0`.
    pub entropy_init: Vec<f64>,
    pub steps: u64,
}

impl PdeGrid {
    pub fn dx(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.m as f64
    }

    pub fn state(&self, j: usize) -> MacroState {
        let [r, p, e] = self.cells[j];
        MacroState::new(r, p, e)
    }

    /// Interior extrapolation of the state to the faces `x = 0` and `x = 1`.
    pub fn face_states(&self) -> (MacroState, MacroState) {
        let w = |j: usize| prim(&self.cells[j]);
        let m = self.m;
        let l = extrapolate_face(w(0), w(1), w(2));
        let r = extrapolate_face(w(m - 1), w(m - 2), w(m - 3));
        (from_prim(l), from_prim(r))
    }
}

#[inline]
fn prim(u: &Cell) -> Cell {
    [u[0], u[1], u[2] - 0.5 * u[1] * u[1]]
}

#[inline]
fn from_prim_cell(w: Cell) -> Cell {
    [w[0], w[1], w[2] + 0.5 * w[1] * w[1]]
}

fn from_prim(w: Cell) -> MacroState {
    MacroState::from_internal(w[0], w[1], w[2])
}

#[inline]
fn extrapolate_face(a: Cell, b: Cell, c: Cell) -> Cell {
    std::array::from_fn(|k| (15.0 * a[k] - 10.0 * b[k] + 3.0 * c[k]) / 8.0)
}

/// Residuals of the corner compatibility conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerReport {
    /// `|p0(0)|`.
    pub order0_wall: f64,
    /// `|P(r0(1), e0(1)) - tau(0)|`.
    pub order0_tension: f64,
    /// `|d_x P(0)|`, from `d_t p(0, t) = 0`.
    pub order1_wall: f64,
    /// `|c^2 p0'(1) - tau'(0)|`.
    pub order1_tension: f64,
    /// `|d_x (c^2 p0')(0)|`, from `d_tt p(0, t) = 0`.
    pub order2_wall: f64,
    /// `|p0'^2 (c^2_r + P c^2_e) + c^2 d_xx P - tau''(0)|` at `x = 1`.
    pub order2_tension: f64,
}

pub const ORDER0_TOL: f64 = 1e-6;
pub const ORDER12_TOL: f64 = 1e-4;

impl CornerReport {
    pub fn check(&self) -> Result<()> {
        let items = [
            ("order 0 at x=0 (p = 0)", self.order0_wall, ORDER0_TOL),
            ("order 0 at x=1 (P = tau)", self.order0_tension, ORDER0_TOL),
            ("order 1 at x=0", self.order1_wall, ORDER12_TOL),
            ("order 1 at x=1", self.order1_tension, ORDER12_TOL),
            ("order 2 at x=0", self.order2_wall, ORDER12_TOL),
            ("order 2 at x=1", self.order2_tension, ORDER12_TOL),
        ];
        for (condition, residual, tolerance) in items {
            if !(residual <= tolerance) {
                return Err(Error::IncompatibleCorner { condition, residual, tolerance });
            }
        }
        Ok(())
    }
}

/// Evaluates the corner conditions by finite differences of the profile's
/// equation of state; time derivatives at the corners are eliminated using
/// the equations themselves.
pub fn compatibility(profile: &MacroProfile, sched: &TensionSchedule, pot: &Potential) -> Result<CornerReport> {
    let h = 1e-3;
    let eos_at = |x: f64| -> Result<EosPoint> {
        let s = profile.state(x);
        eos_direct(s.r_bar, s.e_int(), pot)
    };
    let dp = |x: f64| profile.derivative(x, 1)[1];
    let p_at = |x: f64| eos_at(x).map(|e| e.tension);
    let g_at = |x: f64| eos_at(x).map(|e| e.c2 * dp(x));

    let p0 = [p_at(0.0)?, p_at(h)?, p_at(2.0 * h)?];
    let g0 = [g_at(0.0)?, g_at(h)?, g_at(2.0 * h)?];
    let p1 = [p_at(1.0)?, p_at(1.0 - h)?, p_at(1.0 - 2.0 * h)?, p_at(1.0 - 3.0 * h)?];
    let one_sided = |v: [f64; 3]| (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);

    let right = profile.state(1.0);
    let (r1, e1) = (right.r_bar, right.e_int());
    let at1 = eos_direct(r1, e1, pot)?;
    let (hr, he) = (1e-4, 1e-4);
    let c2r = (eos_direct(r1 + hr, e1, pot)?.c2 - eos_direct(r1 - hr, e1, pot)?.c2) / (2.0 * hr);
    let c2e = (eos_direct(r1, e1 + he, pot)?.c2 - eos_direct(r1, e1 - he, pot)?.c2) / (2.0 * he);
    let pxx = (2.0 * p1[0] - 5.0 * p1[1] + 4.0 * p1[2] - p1[3]) / (h * h);
    let px1 = dp(1.0);

    Ok(CornerReport {
        order0_wall: profile.state(0.0).p_bar.abs(),
        order0_tension: (at1.tension - sched.tau(0.0)).abs(),
        order1_wall: one_sided(p0).abs(),
        order1_tension: (at1.c2 * px1 - sched.dtau(0.0)).abs(),
        order2_wall: one_sided(g0).abs(),
        order2_tension: (px1 * px1 * (c2r + at1.tension * c2e) + at1.c2 * pxx - sched.d2tau(0.0)).abs(),
    })
}

/// Samples the profile at cell centres after checking corner compatibility.
pub fn init_grid(profile: &MacroProfile, sched: &TensionSchedule, m: usize, pot: &Potential) -> Result<PdeGrid> {
    if m < 4 {
        return Err(Error::config("m", format!("need at least 4 cells, got {m}")));
    }
    compatibility(profile, sched, pot)?.check()?;
    init_grid_unchecked(profile, m, pot)
}

/// [`init_grid`] without the corner checks (for exploratory runs).
pub fn init_grid_unchecked(profile: &MacroProfile, m: usize, pot: &Potential) -> Result<PdeGrid> {
    let cells: Vec<Cell> = (0..m)
        .map(|j| {
            let s = profile.state((j as f64 + 0.5) / m as f64);
            [s.r_bar, s.p_bar, s.e_tot]
        })
        .collect();
    let entropy_init = cells
        .par_iter()
        .map(|u| {
            let w = prim(u);
            thermo::entropy(w[0], w[2], pot)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PdeGrid { m, t_macro: 0.0, cells, entropy_init, steps: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub cfl: f64,
    /// EOS table spacing; `None` evaluates the thermodynamics directly.
    pub eos_spacing: Option<f64>,
    /// Coefficient of an optional fourth-difference filter (off by default).
    pub filter: Option<f64>,
    /// Abort with [`Error::ShockBeforeHorizon`] once the monitor reports a shock.
    pub abort_on_shock: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { cfl: 0.4, eos_spacing: Some(0.01), filter: None, abort_on_shock: true }
    }
}

/// Boundary faces and ghost-extended array for one stage.
fn extend(cells: &[Cell], t: f64, sched: &TensionSchedule, eos: &mut Eos) -> Result<Vec<Cell>> {
    let m = cells.len();
    let w = |j: usize| prim(&cells[j]);

    // x = 0: remove the velocity along the incoming wave (1, -c, P)
    let ext = extrapolate_face(w(0), w(1), w(2));
    let at = eos.eval(ext[0], ext[2])?;
    let c = at.c2.sqrt();
    let d = ext[1] / c;
    let left = from_prim_cell([ext[0] + d, 0.0, ext[2] + d * at.tension]);

    // x = 1: move along the incoming wave (1, c, P) until P = tau
    let ext = extrapolate_face(w(m - 1), w(m - 2), w(m - 3));
    let at = eos.eval(ext[0], ext[2])?;
    let (c0, p0) = (at.c2.sqrt(), at.tension);
    let tau = sched.tau(t);
    let mut d = 0.0;
    let mut cur = at;
    for _ in 0..50 {
        let f = cur.tension - tau;
        if f.abs() <= 1e-14 * tau.abs().max(1.0) {
            break;
        }
        d -= f / cur.c2;
        cur = eos.eval(ext[0] + d, ext[2] + d * p0)?;
    }
    let right = from_prim_cell([ext[0] + d, ext[1] + d * c0, ext[2] + d * p0]);

    let mut out = Vec::with_capacity(m + 2 * GHOST);
    let g = |b: &Cell, u0: &Cell, u1: &Cell, wb: f64, w0: f64, w1: f64| -> Cell {
        std::array::from_fn(|k| wb * b[k] + w0 * u0[k] + w1 * u1[k])
    };
    out.push(g(&left, &cells[0], &cells[1], 8.0, -9.0, 2.0));
    out.push(g(&left, &cells[0], &cells[1], 8.0 / 3.0, -2.0, 1.0 / 3.0));
    out.extend_from_slice(cells);
    out.push(g(&right, &cells[m - 1], &cells[m - 2], 8.0 / 3.0, -2.0, 1.0 / 3.0));
    out.push(g(&right, &cells[m - 1], &cells[m - 2], 8.0, -9.0, 2.0));
    Ok(out)
}

/// Fluxes `(p, P, pP)` on an extended array and the largest sound speed.
fn fluxes(ext: &[Cell], eos: &mut Eos) -> Result<(Vec<Cell>, f64)> {
    let mut out = Vec::with_capacity(ext.len());
    let mut cmax: f64 = 0.0;
    for u in ext {
        let w = prim(u);
        let at = eos.eval(w[0], w[2])?;
        if !(at.c2 > 0.0) {
            return Err(Error::NotHyperbolic { c2: at.c2 });
        }
        cmax = cmax.max(at.c2.sqrt());
        out.push([w[1], at.tension, w[1] * at.tension]);
    }
    Ok((out, cmax))
}

/// Largest sound speed over the cells.
pub fn max_sound_speed(grid: &PdeGrid, eos: &mut Eos) -> Result<f64> {
    let mut cmax: f64 = 0.0;
    for u in &grid.cells {
        let w = prim(u);
        let at = eos.eval(w[0], w[2])?;
        if !(at.c2 > 0.0) {
            return Err(Error::NotHyperbolic { c2: at.c2 });
        }
        cmax = cmax.max(at.c2.sqrt());
    }
    Ok(cmax)
}

/// One MacCormack step of size `dt` using the given equation of state.
pub fn step_pde_with(
    grid: &PdeGrid,
    dt: f64,
    sched: &TensionSchedule,
    eos: &mut Eos,
    opts: &SolverOptions,
) -> Result<PdeGrid> {
    let m = grid.m;
    let dx = grid.dx();
    let lam = dt / dx;
    let ext = extend(&grid.cells, grid.t_macro, sched, eos)?;
    let (f, _) = fluxes(&ext, eos)?;
    let cmax = max_sound_speed(grid, eos)?;
    let limit = opts.cfl * dx / cmax;
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    let forward = grid.steps % 2 == 0;
    let g = GHOST;
    let pred: Vec<Cell> = (0..m)
        .map(|j| {
            let k = j + g;
            std::array::from_fn(|c| {
                let df = if forward { f[k + 1][c] - f[k][c] } else { f[k][c] - f[k - 1][c] };
                ext[k][c] + lam * df
            })
        })
        .collect();
    let ext_p = extend(&pred, grid.t_macro + dt, sched, eos)?;
    let (fp, _) = fluxes(&ext_p, eos)?;
    let mut cells: Vec<Cell> = (0..m)
        .map(|j| {
            let k = j + g;
            std::array::from_fn(|c| {
                let df = if forward { fp[k][c] - fp[k - 1][c] } else { fp[k + 1][c] - fp[k][c] };
                0.5 * (ext[k][c] + ext_p[k][c] + lam * df)
            })
        })
        .collect();
    if let Some(eps) = opts.filter {
        let e = extend(&cells, grid.t_macro + dt, sched, eos)?;
        for (j, cell) in cells.iter_mut().enumerate() {
            let k = j + g;
            for c in 0..3 {
                let d4 = e[k + 2][c] - 4.0 * e[k + 1][c] + 6.0 * e[k][c] - 4.0 * e[k - 1][c] + e[k - 2][c];
                cell[c] -= eps * d4;
            }
        }
    }
    let pot = *eos.potential();
    for (j, u) in cells.iter().enumerate() {
        let w = prim(u);
        if !(w.iter().all(|v| v.is_finite()) && w[2] > pot.energy_floor(w[0])) {
            return Err(Error::NotAdmissible(format!(
                "cell {j} left the admissible region at t = {}",
                grid.t_macro + dt
            )));
        }
    }
    Ok(PdeGrid {
        m,
        t_macro: grid.t_macro + dt,
        cells,
        entropy_init: grid.entropy_init.clone(),
        steps: grid.steps + 1,
    })
}

/// One MacCormack step with directly evaluated thermodynamics.
pub fn step_pde(grid: &PdeGrid, dt: f64, sched: &TensionSchedule, pot: &Potential) -> Result<PdeGrid> {
    let mut eos = Eos::direct(pot);
    step_pde_with(grid, dt, sched, &mut eos, &SolverOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockStatus {
    Smooth,
    Suspect,
    Shocked,
}

/// First-shock detector. The status only ever moves towards `Shocked`.
#[derive(Debug, Clone)]
pub struct ShockMonitor {
    grad_ref: f64,
    tv_prev: f64,
    status: ShockStatus,
    pub timeline: Vec<(f64, ShockStatus)>,
}

fn velocity_gradient_and_tv(grid: &PdeGrid) -> (f64, f64, bool) {
    let dx = grid.dx();
    let d: Vec<f64> = grid.cells.windows(2).map(|w| w[1][1] - w[0][1]).collect();
    let gmax = d.iter().fold(0.0f64, |a, v| a.max(v.abs())) / dx;
    let tv: f64 = d.iter().map(|v| v.abs()).sum();
    let thresh = 1e-8 + 1e-6 * gmax * dx;
    // grid-scale zigzag: two neighbouring extrema of p
    let extremum = |k: usize| d[k] * d[k + 1] < 0.0 && d[k].abs() > thresh && d[k + 1].abs() > thresh;
    let zigzag = (0..d.len().saturating_sub(2)).any(|k| extremum(k) && extremum(k + 1));
    (gmax, tv, zigzag)
}

impl ShockMonitor {
    pub fn new(initial: &PdeGrid) -> Self {
        let (g, tv, _) = velocity_gradient_and_tv(initial);
        Self {
            grad_ref: g.max(1.0),
            tv_prev: tv,
            status: ShockStatus::Smooth,
            timeline: vec![(initial.t_macro, ShockStatus::Smooth)],
        }
    }

    pub fn status(&self) -> ShockStatus {
        self.status
    }

    pub fn observe(&mut self, grid: &PdeGrid) -> ShockStatus {
        let (g, tv, zigzag) = velocity_gradient_and_tv(grid);
        let growth = tv - self.tv_prev;
        self.tv_prev = tv;
        let now = if g > 50.0 * self.grad_ref || (growth > 1e-3 && zigzag) {
            ShockStatus::Shocked
        } else if g > 10.0 * self.grad_ref {
            ShockStatus::Suspect
        } else {
            ShockStatus::Smooth
        };
        if now > self.status {
            self.status = now;
            self.timeline.push((grid.t_macro, now));
        }
        self.status
    }
}

/// One exported line of a solution snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    pub r_bar: f64,
    pub p_bar: f64,
    #[serde(rename = "E")]
    pub e_tot: f64,
    pub e_int: f64,
    pub tension: f64,
    pub entropy: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

fn row(x: f64, u: MacroState, pot: &Potential) -> Result<ProfileRow> {
    let e = u.e_int();
    let inv = thermo::invert(MacroState::new(u.r_bar, 0.0, e), pot)?;
    let l = inv.lambda;
    let entropy = -(l.l1 * u.r_bar - l.l3 * e - inv.theta());
    Ok(ProfileRow {
        x,
        r_bar: u.r_bar,
        p_bar: u.p_bar,
        e_tot: u.e_tot,
        e_int: e,
        tension: l.tension(),
        entropy,
        lambda1: l.l1,
        lambda2: u.p_bar * l.l3,
        lambda3: l.l3,
    })
}

/// Thermodynamic export of a grid: the two faces (interior extrapolation)
/// and every cell, ordered by `x`.
pub fn export_rows(grid: &PdeGrid, pot: &Potential) -> Result<Vec<ProfileRow>> {
    let (left, right) = grid.face_states();
    let mut rows = vec![row(0.0, left, pot)?];
    rows.extend(
        (0..grid.m)
            .into_par_iter()
            .map(|j| row(grid.x(j), grid.state(j), pot))
            .collect::<Result<Vec<_>>>()?,
    );
    rows.push(row(1.0, right, pot)?);
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeSnapshot {
    pub t: f64,
    pub grid: PdeGrid,
    pub rows: Vec<ProfileRow>,
}

impl PdeSnapshot {
    /// Parameters `lambda` per cell.
    pub fn cell_lambdas(&self) -> Vec<Lambda> {
        self.rows[1..self.rows.len() - 1]
            .iter()
            .map(|r| Lambda::new(r.lambda1, r.lambda2, r.lambda3))
            .collect()
    }

    pub fn face_lambdas(&self) -> (Lambda, Lambda) {
        let f = |r: &ProfileRow| Lambda::new(r.lambda1, r.lambda2, r.lambda3);
        (f(&self.rows[0]), f(&self.rows[self.rows.len() - 1]))
    }

    /// `(x, (r, p, E))` nodes: faces plus cell centres.
    pub fn nodes(&self) -> (Vec<f64>, Vec<[f64; 3]>) {
        let xs = self.rows.iter().map(|r| r.x).collect();
        let us = self.rows.iter().map(|r| [r.r_bar, r.p_bar, r.e_tot]).collect();
        (xs, us)
    }

    /// Largest `|s(x, t) - s(x, 0)|` over cells.
    pub fn entropy_drift(&self) -> f64 {
        self.rows[1..self.rows.len() - 1]
            .iter()
            .zip(&self.grid.entropy_init)
            .map(|(r, s0)| (r.entropy - s0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeRun {
    pub m: usize,
    pub cfl: f64,
    pub snapshots: Vec<PdeSnapshot>,
    pub dt_history: Vec<f64>,
    pub shock_timeline: Vec<(f64, ShockStatus)>,
    pub eos_rebuilds: usize,
}

impl PdeRun {
    pub fn at(&self, t: f64) -> Option<&PdeSnapshot> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }
}

/// Marches from the profile to `t_macro`, recording snapshots at `times`.
pub fn solve(
    profile: &MacroProfile,
    sched: &TensionSchedule,
    m: usize,
    t_macro: f64,
    times: &[f64],
    pot: &Potential,
    opts: &SolverOptions,
) -> Result<PdeRun> {
    let grid = init_grid(profile, sched, m, pot)?;
    solve_from(grid, sched, t_macro, times, pot, opts)
}

/// [`solve`] from an already initialised grid.
pub fn solve_from(
    mut grid: PdeGrid,
    sched: &TensionSchedule,
    t_macro: f64,
    times: &[f64],
    pot: &Potential,
    opts: &SolverOptions,
) -> Result<PdeRun> {
    let mut eos = match opts.eos_spacing {
        Some(h) => Eos::tabulated(pot, h),
        None => Eos::direct(pot),
    };
    eos.prepare(grid.cells.iter().map(|u| {
        let w = prim(u);
        (w[0], w[2])
    }))?;
    let mut monitor = ShockMonitor::new(&grid);
    let mut targets: Vec<f64> = times.iter().copied().filter(|&t| t <= t_macro).collect();
    targets.push(t_macro);
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let mut snapshots = Vec::new();
    let mut dt_history = Vec::new();
    let record = |grid: &PdeGrid, snapshots: &mut Vec<PdeSnapshot>, t: f64| -> Result<()> {
        snapshots.push(PdeSnapshot { t, grid: grid.clone(), rows: export_rows(grid, pot)? });
        Ok(())
    };
    for &target in &targets {
        while grid.t_macro < target - 1e-14 {
            // steps come in forward/backward pairs of equal size
            let cmax = max_sound_speed(&grid, &mut eos)?;
            let dt_cfl = PAIR_SAFETY * opts.cfl * grid.dx() / cmax;
            let remaining = target - grid.t_macro;
            let pairs = (remaining / (2.0 * dt_cfl)).ceil().max(1.0);
            let dt = remaining / (2.0 * pairs);
            for _ in 0..2 {
                grid = step_pde_with(&grid, dt, sched, &mut eos, opts)?;
                dt_history.push(dt);
                if monitor.observe(&grid) == ShockStatus::Shocked && opts.abort_on_shock {
                    return Err(Error::ShockBeforeHorizon { t_shock: grid.t_macro, horizon: t_macro });
                }
            }
            if (grid.t_macro - target).abs() <= 1e-12 * target.max(1.0) {
                grid.t_macro = target;
            }
        }
        if times.iter().any(|&t| t == target) {
            record(&grid, &mut snapshots, target)?;
        }
    }
    Ok(PdeRun {
        m: grid.m,
        cfl: opts.cfl,
        snapshots,
        dt_history,
        shock_timeline: monitor.timeline,
        eos_rebuilds: eos.rebuilds(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: Potential = Potential::Harmonic;

    #[test]
    fn flux_examples() {
        let f = flux(MacroState::new(1.0, 0.0, 1.5), &H).unwrap();
        assert!(f[0] == 0.0 && (f[1] - 1.0).abs() < 1e-10 && f[2] == 0.0);
        let f = flux(MacroState::from_internal(1.0, 0.5, 1.5), &H).unwrap();
        assert!((f[0] - 0.5).abs() < 1e-15 && (f[1] - 1.0).abs() < 1e-10 && (f[2] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn jacobian_harmonic_at_rest() {
        let j = jacobian_flux(MacroState::new(0.7, 0.0, 1.5), &H).unwrap();
        let expect = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, -0.7, 0.0]];
        for a in 0..3 {
            for b in 0..3 {
                assert!((j[a][b] - expect[a][b]).abs() < 1e-8, "{j:?}");
            }
        }
    }

    #[test]
    fn constant_state_is_stationary() {
        let state = MacroState::new(1.0, 0.0, 1.5);
        let profile = MacroProfile::constant(state);
        let sched = TensionSchedule::Constant { tau: 1.0 };
        let run = solve(&profile, &sched, 32, 0.1, &[0.05, 0.1], &H, &SolverOptions::default()).unwrap();
        for s in &run.snapshots {
            for u in &s.grid.cells {
                assert!((u[0] - 1.0).abs() < 1e-12 && u[1].abs() < 1e-12 && (u[2] - 1.5).abs() < 1e-12);
            }
        }
        assert_eq!(run.shock_timeline.last().unwrap().1, ShockStatus::Smooth);
    }

    #[test]
    fn wall_velocity_violation_detected() {
        let profile = MacroProfile::analytic("1", "0.1", "1.55").unwrap();
        let sched = TensionSchedule::Constant { tau: 1.0 };
        let err = init_grid(&profile, &sched, 16, &H).unwrap_err();
        assert!(matches!(err, Error::IncompatibleCorner { condition, .. } if condition.contains("x=0")));
    }

    #[test]
    fn cfl_violation_reported() {
        let profile = MacroProfile::constant(MacroState::new(1.0, 0.0, 1.5));
        let sched = TensionSchedule::Constant { tau: 1.0 };
        let grid = init_grid(&profile, &sched, 16, &H).unwrap();
        let err = step_pde(&grid, 0.1, &sched, &H).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }
}
