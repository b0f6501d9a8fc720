//! Microscopic dynamics: the open chain with a wall at site 0, a boundary
//! force on site `N`, and Poisson-clock exchanges of neighbouring momenta.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::exact_sum;
use crate::potential::Potential;
use crate::profile::TensionSchedule;

/// Configuration `(r_1..r_N, p_1..p_N)` plus clocks and boundary integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub t_micro: f64,
    pub n_swaps: u64,
    /// `int tau p_N ds`.
    pub work_accum: f64,
    /// `int p_N ds`, the stretch entering through site `N`.
    pub stretch_accum: f64,
    /// `int (tau - V'(r_1)) ds`, the net boundary momentum input.
    pub momentum_accum: f64,
}

impl ChainState {
    pub fn new(r: Vec<f64>, p: Vec<f64>) -> Self {
        assert_eq!(r.len(), p.len(), "r and p must have equal length");
        Self { r, p, t_micro: 0.0, n_swaps: 0, work_accum: 0.0, stretch_accum: 0.0, momentum_accum: 0.0 }
    }

    pub fn at_rest(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn site_energy(&self, i: usize, pot: &Potential) -> f64 {
        0.5 * self.p[i] * self.p[i] + pot.value(self.r[i])
    }

    /// `H = sum_i p_i^2/2 + sum_i V(r_i)`, correctly rounded over the
    /// kinetic and potential terms, so permuting momenta leaves it bitwise
    /// unchanged.
    pub fn energy(&self, pot: &Potential) -> f64 {
        exact_sum(self.p.iter().map(|p| 0.5 * p * p).chain(self.r.iter().map(|&r| pot.value(r))))
    }

    pub fn sum_r(&self) -> f64 {
        exact_sum(self.r.iter().copied())
    }

    pub fn sum_p(&self) -> f64 {
        exact_sum(self.p.iter().copied())
    }

    /// Exchanges `p_i` and `p_{i+1}` for bond `i` in `1..N-1`.
    pub fn swap_bond(&mut self, i: usize) -> Result<()> {
        let n = self.n();
        if i < 1 || i + 1 > n {
            return Err(Error::IndexOutOfRange { index: i, lo: 1, hi: n.saturating_sub(1) });
        }
        self.p.swap(i - 1, i);
        self.n_swaps += 1;
        Ok(())
    }
}

/// The Liouville vector field: `dr_i = p_i - p_{i-1}` with `p_0 = 0`,
/// `dp_i = V'(r_{i+1}) - V'(r_i)` and `dp_N = tau - V'(r_N)`.
pub fn drift(state: &ChainState, tau_now: f64, pot: &Potential) -> (Vec<f64>, Vec<f64>) {
    let n = state.n();
    let mut dr = Vec::with_capacity(n);
    let mut dp = Vec::with_capacity(n);
    let mut prev = 0.0;
    for i in 0..n {
        dr.push(state.p[i] - prev);
        prev = state.p[i];
        let right = if i + 1 < n { pot.force(state.r[i + 1]) } else { tau_now };
        dp.push(right - pot.force(state.r[i]));
    }
    (dr, dp)
}

/// How the exchange events are interleaved with the Verlet flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseCoupling {
    /// Split the integrator step exactly at every event time.
    #[default]
    ExactSplit,
    /// Kick, half drift, all events of the step, half drift, kick. Symmetric
    /// and second order; one force evaluation per step regardless of the
    /// event rate.
    Strang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub gamma: f64,
    pub dt_micro: f64,
    pub t_macro: f64,
    /// Macroscopic times at which observers receive snapshots.
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub coupling: NoiseCoupling,
    /// Check that every swap conserves sum r, sum p and H bitwise.
    #[serde(default)]
    pub audit_swaps: bool,
    /// Keep the microscopic time of every exchange event.
    #[serde(default)]
    pub record_events: bool,
}

impl SimConfig {
    pub fn new(n: usize, gamma: f64, dt_micro: f64, t_macro: f64) -> Self {
        Self {
            n,
            gamma,
            dt_micro,
            t_macro,
            snapshot_times: vec![t_macro],
            coupling: NoiseCoupling::ExactSplit,
            audit_swaps: false,
            record_events: false,
        }
    }

    pub fn validate(&self, pot: &Potential) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "chain needs at least one site"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::config("gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        let limit = 0.1 / pot.curvature_sup(pot.growth_probe_radius()).sqrt();
        if !(self.dt_micro > 0.0 && self.dt_micro <= limit) {
            return Err(Error::config(
                "dt_micro",
                format!("must lie in (0, {limit}], got {}", self.dt_micro),
            ));
        }
        if !(self.t_macro >= 0.0 && self.t_macro.is_finite()) {
            return Err(Error::config("t_macro", format!("must be >= 0, got {}", self.t_macro)));
        }
        for (k, &t) in self.snapshot_times.iter().enumerate() {
            if !(0.0..=self.t_macro).contains(&t) {
                return Err(Error::config(
                    format!("snapshot_times[{k}]"),
                    format!("{t} outside [0, {}]", self.t_macro),
                ));
            }
            if k > 0 && !(t > self.snapshot_times[k - 1]) {
                return Err(Error::config(format!("snapshot_times[{k}]"), "times must increase"));
            }
        }
        Ok(())
    }
}

/// A recorded configuration with its balance bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t_macro: f64,
    pub state: ChainState,
    pub energy: f64,
    pub sum_r: f64,
    pub sum_p: f64,
}

impl Snapshot {
    pub fn capture(t_macro: f64, state: &ChainState, pot: &Potential) -> Self {
        Self {
            t_macro,
            state: state.clone(),
            energy: state.energy(pot),
            sum_r: state.sum_r(),
            sum_p: state.sum_p(),
        }
    }
}

/// Receives snapshots during a run.
pub trait Observer {
    fn observe(&mut self, snapshot: &Snapshot) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationLog {
    pub initial: Snapshot,
    pub snapshots: Vec<Snapshot>,
    pub n_swaps: u64,
    pub audited_swaps: u64,
    pub event_times: Option<Vec<f64>>,
}

/// Integrator state: the chain plus cached forces `V'(r_i)`.
struct Integrator<'a> {
    s: ChainState,
    f: Vec<f64>,
    pot: &'a Potential,
    sched: &'a TensionSchedule,
}

impl<'a> Integrator<'a> {
    fn new(s: ChainState, sched: &'a TensionSchedule, pot: &'a Potential) -> Result<Self> {
        let mut it = Self { f: vec![0.0; s.n()], s, pot, sched };
        it.refresh_forces()?;
        Ok(it)
    }

    fn refresh_forces(&mut self) -> Result<()> {
        let mut check = 0.0;
        for (f, &r) in self.f.iter_mut().zip(&self.s.r) {
            *f = self.pot.force(r);
            check += *f;
        }
        if check.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite { t_micro: self.s.t_micro })
        }
    }

    fn tau_at_micro(&self, t_micro: f64) -> f64 {
        self.sched.tau(t_micro / self.s.n() as f64)
    }

    fn kick(&mut self, h: f64, tau: f64) {
        let n = self.s.n();
        let (p, f) = (&mut self.s.p, &self.f);
        for i in 0..n - 1 {
            p[i] += h * (f[i + 1] - f[i]);
        }
        p[n - 1] += h * (tau - f[n - 1]);
        self.s.momentum_accum += h * (tau - f[0]);
    }

    fn drift_positions(&mut self, h: f64, tau: f64) {
        let pn = self.s.p[self.s.n() - 1];
        let (r, p) = (&mut self.s.r, &self.s.p);
        let mut prev = 0.0;
        for (ri, &pi) in r.iter_mut().zip(p.iter()) {
            *ri += h * (pi - prev);
            prev = pi;
        }
        self.s.stretch_accum += h * pn;
        self.s.work_accum += h * tau * pn;
    }

    /// One velocity-Verlet step with `tau` frozen at the half-step time.
    fn verlet(&mut self, h: f64) -> Result<()> {
        let tau = self.tau_at_micro(self.s.t_micro + 0.5 * h);
        self.kick(0.5 * h, tau);
        self.drift_positions(h, tau);
        self.refresh_forces()?;
        self.kick(0.5 * h, tau);
        self.s.t_micro += h;
        Ok(())
    }
}

struct Noise<'r, R: Rng + ?Sized> {
    rate: f64,
    next: f64,
    bonds: usize,
    rng: &'r mut R,
}

impl<'r, R: Rng + ?Sized> Noise<'r, R> {
    fn new(rate: f64, bonds: usize, rng: &'r mut R) -> Self {
        let mut n = Self { rate, next: f64::INFINITY, bonds, rng };
        n.next = n.gap();
        n
    }

    fn gap(&mut self) -> f64 {
        if self.rate > 0.0 {
            let e: f64 = Exp1.sample(self.rng);
            e / self.rate
        } else {
            f64::INFINITY
        }
    }

    fn bond(&mut self) -> usize {
        self.rng.gen_range(1..=self.bonds)
    }

    fn advance(&mut self) {
        let gap = self.gap();
        self.next += gap;
    }
}

fn audited_swap(s: &mut ChainState, bond: usize, pot: &Potential, audit: bool, event: u64) -> Result<()> {
    if !audit {
        return s.swap_bond(bond);
    }
    let before = (s.sum_r(), s.sum_p(), s.energy(pot));
    s.swap_bond(bond)?;
    let after = (s.sum_r(), s.sum_p(), s.energy(pot));
    for (what, a, b) in [("sum r", before.0, after.0), ("sum p", before.1, after.1), ("H", before.2, after.2)] {
        if a.to_bits() != b.to_bits() {
            return Err(Error::SwapAudit { event, what });
        }
    }
    Ok(())
}

/// Runs the chain from `init` over microscopic time `[0, N T_macro]`.
///
/// Exchange events form a Poisson process of total rate `gamma (N - 1)`
/// drawn from `rng`; `tau` is evaluated at macroscopic time `t_micro / N`.
pub fn simulate<R: Rng + ?Sized>(
    init: ChainState,
    cfg: &SimConfig,
    sched: &TensionSchedule,
    pot: &Potential,
    rng: &mut R,
    observers: &mut [&mut dyn Observer],
) -> Result<ObservationLog> {
    cfg.validate(pot)?;
    if init.n() != cfg.n {
        return Err(Error::config("n", format!("initial state has {} sites, config says {}", init.n(), cfg.n)));
    }
    let n = cfg.n;
    let scale = n as f64;
    let mut it = Integrator::new(init, sched, pot)?;
    let t0_micro = it.s.t_micro;
    let rate = if n > 1 { cfg.gamma * (n - 1) as f64 } else { 0.0 };
    let mut noise = Noise::new(rate, n.saturating_sub(1), rng);
    noise.next += t0_micro;
    let mut events = cfg.record_events.then(Vec::new);
    let mut audited = 0u64;
    let initial = Snapshot::capture(0.0, &it.s, pot);
    let mut snapshots = Vec::with_capacity(cfg.snapshot_times.len());

    let emit = |snap: Snapshot, observers: &mut [&mut dyn Observer], out: &mut Vec<Snapshot>| -> Result<()> {
        for o in observers.iter_mut() {
            o.observe(&snap)?;
        }
        out.push(snap);
        Ok(())
    };

    for &target in &cfg.snapshot_times {
        let t_end = t0_micro + target * scale;
        let span = t_end - it.s.t_micro;
        if span > 0.0 {
            let steps = (span / cfg.dt_micro - 1e-9).ceil().max(1.0) as u64;
            let h = span / steps as f64;
            for k in 0..steps {
                let step_end = if k + 1 == steps { t_end } else { it.s.t_micro + h };
                match cfg.coupling {
                    NoiseCoupling::ExactSplit => {
                        while noise.next < step_end {
                            let sub = noise.next - it.s.t_micro;
                            if sub > 0.0 {
                                it.verlet(sub)?;
                            }
                            it.s.t_micro = noise.next;
                            let bond = noise.bond();
                            let event = it.s.n_swaps;
                            audited_swap(&mut it.s, bond, pot, cfg.audit_swaps, event)?;
                            audited += cfg.audit_swaps as u64;
                            if let Some(ev) = events.as_mut() {
                                ev.push(noise.next);
                            }
                            noise.advance();
                        }
                        let rest = step_end - it.s.t_micro;
                        if rest > 0.0 {
                            it.verlet(rest)?;
                        }
                    }
                    NoiseCoupling::Strang => {
                        let t_start = it.s.t_micro;
                        let hh = step_end - t_start;
                        let tau = it.tau_at_micro(t_start + 0.5 * hh);
                        it.kick(0.5 * hh, tau);
                        it.drift_positions(0.5 * hh, tau);
                        while noise.next < step_end {
                            let bond = noise.bond();
                            let event = it.s.n_swaps;
                            audited_swap(&mut it.s, bond, pot, cfg.audit_swaps, event)?;
                            audited += cfg.audit_swaps as u64;
                            if let Some(ev) = events.as_mut() {
                                ev.push(noise.next);
                            }
                            noise.advance();
                        }
                        it.drift_positions(0.5 * hh, tau);
                        it.refresh_forces()?;
                        it.kick(0.5 * hh, tau);
                    }
                }
                it.s.t_micro = step_end;
            }
        }
        emit(Snapshot::capture(target, &it.s, pot), observers, &mut snapshots)?;
    }
    Ok(ObservationLog { initial, snapshots, n_swaps: it.s.n_swaps, audited_swaps: audited, event_times: events })
}

/// One deterministic velocity-Verlet step of size `dt` (no noise).
pub fn step_hamiltonian(state: &ChainState, dt: f64, sched: &TensionSchedule, pot: &Potential) -> Result<ChainState> {
    let mut it = Integrator::new(state.clone(), sched, pot)?;
    it.verlet(dt)?;
    if it.s.r.iter().chain(&it.s.p).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t_micro: it.s.t_micro });
    }
    Ok(it.s)
}

/// Balance residuals of one snapshot relative to the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    pub t_macro: f64,
    /// `|Delta sum r - int p_N|`.
    pub stretch: f64,
    /// `|Delta sum p - int (tau - V'(r_1))|`.
    pub momentum: f64,
    /// `|Delta H - int tau p_N|`.
    pub energy: f64,
}

pub fn conserved_balance(log: &ObservationLog) -> Vec<Balance> {
    let a = &log.initial;
    log.snapshots
        .iter()
        .map(|b| Balance {
            t_macro: b.t_macro,
            stretch: ((b.sum_r - a.sum_r) - (b.state.stretch_accum - a.state.stretch_accum)).abs(),
            momentum: ((b.sum_p - a.sum_p) - (b.state.momentum_accum - a.state.momentum_accum)).abs(),
            energy: ((b.energy - a.energy) - (b.state.work_accum - a.state.work_accum)).abs(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{stream_rng, Stream};

    const H: Potential = Potential::Harmonic;

    #[test]
    fn drift_examples() {
        let s = ChainState::at_rest(2);
        assert_eq!(drift(&s, 1.0, &H), (vec![0.0, 0.0], vec![0.0, 1.0]));
        let s = ChainState::new(vec![1.0, 0.0, 0.0], vec![0.0; 3]);
        assert_eq!(drift(&s, 0.0, &H).1, vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn swap_examples() {
        let mut s = ChainState::new(vec![0.0; 3], vec![1.0, 2.0, 3.0]);
        s.swap_bond(1).unwrap();
        assert_eq!(s.p, vec![2.0, 1.0, 3.0]);
        s.swap_bond(1).unwrap();
        assert_eq!(s.p, vec![1.0, 2.0, 3.0]);
        assert!(matches!(s.swap_bond(3), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(s.swap_bond(0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn single_oscillator_period() {
        let sched = TensionSchedule::Constant { tau: 0.0 };
        let mut cfg = SimConfig::new(1, 0.0, 1e-3, 2.0 * std::f64::consts::PI);
        cfg.snapshot_times = vec![cfg.t_macro];
        let mut rng = stream_rng(0, 0, Stream::Noise);
        let log = simulate(ChainState::new(vec![1.0], vec![0.0]), &cfg, &sched, &H, &mut rng, &mut []).unwrap();
        let s = &log.snapshots[0].state;
        assert!((s.r[0] - 1.0).abs() < 1e-5 && s.p[0].abs() < 1e-5);
    }

    #[test]
    fn verlet_is_time_reversible() {
        let sched = TensionSchedule::Constant { tau: 0.3 };
        let pot = Potential::coslattice(0.5).unwrap();
        let s0 = ChainState::new(vec![0.1, -0.4, 0.7, 0.2], vec![0.5, -0.3, 0.0, 0.9]);
        let s1 = step_hamiltonian(&s0, 0.01, &sched, &pot).unwrap();
        let mut back = s1.clone();
        back.t_micro = 0.0;
        let s2 = step_hamiltonian(&back, -0.01, &sched, &pot).unwrap();
        for i in 0..4 {
            assert!((s2.r[i] - s0.r[i]).abs() < 1e-12 && (s2.p[i] - s0.p[i]).abs() < 1e-12);
        }
    }
}
