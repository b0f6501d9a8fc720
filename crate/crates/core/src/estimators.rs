//! Microscopic-to-macroscopic measurements: empirical densities, block
//! averages, microscopic fluxes, one-block residuals, local-equilibrium
//! moments and weak errors against a PDE solution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainState, ObservationLog};
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::numeric::cubic_at;
use crate::pde::PdeRun;
use crate::potential::Potential;
use crate::thermo::{self, Lambda, MacroState};

/// Smooth weight `J` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    One,
    SinPi,
    /// `x (1 - x)`.
    Parabola,
    /// `exp(4 - 1 / (x (1 - x)))`, compactly supported, peak 1 at `x = 1/2`.
    Bump,
    Expr { name: String, f: Expr },
}

impl TestFunction {
    pub fn default_set() -> Vec<TestFunction> {
        vec![Self::One, Self::SinPi, Self::Parabola, Self::Bump]
    }

    pub fn name(&self) -> &str {
        match self {
            Self::One => "one",
            Self::SinPi => "sin_pi",
            Self::Parabola => "parabola",
            Self::Bump => "bump",
            Self::Expr { name, .. } => name,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::SinPi => (std::f64::consts::PI * x).sin(),
            Self::Parabola => x * (1.0 - x),
            Self::Bump => {
                let q = x * (1.0 - x);
                if q > 0.0 {
                    (4.0 - 1.0 / q).exp()
                } else {
                    0.0
                }
            }
            Self::Expr { f, .. } => f.eval(x, 0.0),
        }
    }

    /// Whether `J` vanishes at both ends; weights that do not are
    /// sensitive to the boundary layers and are reported separately.
    pub fn vanishes_at_boundary(&self) -> bool {
        self.eval(0.0).abs() < 1e-12 && self.eval(1.0).abs() < 1e-12
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::Expr { name, f } = self {
            if f.depends_on(Var::T) {
                return Err(Error::config(format!("test_functions.{name}"), "may only depend on x"));
            }
            let h = 1e-4;
            for k in 1..20 {
                let x = k as f64 / 20.0;
                let d = (f.eval(x + h, 0.0) - f.eval(x - h, 0.0)) / (2.0 * h);
                if !(f.eval(x, 0.0).is_finite() && d.is_finite()) {
                    return Err(Error::config(format!("test_functions.{name}"), format!("not smooth near x = {x}")));
                }
            }
        }
        Ok(())
    }
}

/// `zeta_i = (r_i, p_i, -e_i)` for 0-based site index `i`.
#[inline]
pub fn zeta(state: &ChainState, i: usize, pot: &Potential) -> [f64; 3] {
    [state.r[i], state.p[i], -state.site_energy(i, pot)]
}

/// `(1/N) sum_i J(i/N) zeta_{alpha,i}` with `alpha` in `1..=3`.
pub fn empirical_density(state: &ChainState, j: &TestFunction, alpha: usize, pot: &Potential) -> Result<f64> {
    if !(1..=3).contains(&alpha) {
        return Err(Error::IndexOutOfRange { index: alpha, lo: 1, hi: 3 });
    }
    let n = state.n();
    let s: f64 = (0..n).map(|i| j.eval((i + 1) as f64 / n as f64) * zeta(state, i, pot)[alpha - 1]).sum();
    Ok(s / n as f64)
}

/// Block length `k + 1` and energy cutoff `b` for flux truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub k: usize,
    pub b: f64,
}

impl BlockParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k % 2 != 0 {
            return Err(Error::config("k", format!("block parameter must be even, got {}", self.k)));
        }
        if self.k + 1 > n {
            return Err(Error::config("k", format!("block of {} sites exceeds N = {n}", self.k + 1)));
        }
        if !(self.b > 0.0) {
            return Err(Error::config("b", format!("cutoff must be positive, got {}", self.b)));
        }
        Ok(())
    }
}

/// The 0-based index range of the block around 1-based site `i`.
fn window(n: usize, i: usize, k: usize) -> Result<std::ops::Range<usize>> {
    if k % 2 != 0 {
        return Err(Error::config("k", format!("block parameter must be even, got {k}")));
    }
    let h = k / 2;
    if i <= h || i + h > n {
        return Err(Error::BlockOutOfRange { site: i, k, n });
    }
    Ok(i - 1 - h..i + h)
}

/// Block average `zeta_i^k` over the `k + 1` sites `|l - i| <= k/2` (1-based `i`).
pub fn block_average(state: &ChainState, i: usize, k: usize, pot: &Potential) -> Result<[f64; 3]> {
    let w = window(state.n(), i, k)?;
    let mut acc = [0.0; 3];
    for l in w {
        let z = zeta(state, l, pot);
        for c in 0..3 {
            acc[c] += z[c];
        }
    }
    Ok(acc.map(|v| v / (k + 1) as f64))
}

/// Microscopic flux `J_{i-1,i}` across bond `i`, `1 <= i <= N + 1` (1-based).
///
/// Interior bonds give `(-p_{i-1}, -V'(r_i), p_{i-1} V'(r_i))` with `p_0 = 0`;
/// bond `N + 1` is the boundary, `(-p_N, -tau, p_N tau)`. With these,
/// `d/dt zeta_i = J_{i-1,i} - J_{i,i+1}`.
pub fn micro_flux(state: &ChainState, i: usize, tau: f64, pot: &Potential) -> Result<[f64; 3]> {
    let n = state.n();
    if i < 1 || i > n + 1 {
        return Err(Error::IndexOutOfRange { index: i, lo: 1, hi: n + 1 });
    }
    let p_prev = if i >= 2 { state.p[i - 2] } else { 0.0 };
    if i == n + 1 {
        return Ok([-p_prev, -tau, p_prev * tau]);
    }
    let f = pot.force(state.r[i - 1]);
    Ok([-p_prev, -f, p_prev * f])
}

/// Tension with the zero-temperature extension `P(r, V(r)) = V'(r)` at the
/// energy floor.
fn tension_extended(u: MacroState, pot: &Potential) -> Result<f64> {
    let e = u.e_int();
    let floor = pot.energy_floor(u.r_bar);
    if e - floor <= 1e-12 * e.abs().max(1.0) {
        return Ok(pot.force(u.r_bar));
    }
    thermo::tension(u.r_bar, e, pot)
}

/// `| avg_l J^b_{l-1,l} + J~(zeta^{b,k}_i) |` for the block around 1-based `i`.
///
/// In equilibrium `E[J_{l-1,l}] = -J~(u)`, so the residual measures how far
/// the block-averaged microscopic current is from the macroscopic flux of
/// the block average. Sites with `|e_l| > b` are dropped from both averages.
pub fn one_block_residual(
    state: &ChainState,
    i: usize,
    block: &BlockParams,
    tau: f64,
    pot: &Potential,
) -> Result<f64> {
    let n = state.n();
    let w = window(n, i, block.k)?;
    let mut jsum = [0.0; 3];
    let mut zsum = [0.0; 3];
    for l in w {
        if state.site_energy(l, pot).abs() > block.b {
            continue;
        }
        let j = micro_flux(state, l + 1, tau, pot)?;
        let z = zeta(state, l, pot);
        for c in 0..3 {
            jsum[c] += j[c];
            zsum[c] += z[c];
        }
    }
    let m = (block.k + 1) as f64;
    let u = MacroState::from_conserved(zsum.map(|v| v / m));
    let p = tension_extended(u, pot)?;
    let macro_flux = [u.p_bar, p, -u.p_bar * p];
    Ok((0..3).map(|c| (jsum[c] / m + macro_flux[c]).powi(2)).sum::<f64>().sqrt())
}

/// `20 x` the mean site energy over the given states.
pub fn default_cutoff(states: &[&ChainState], pot: &Potential) -> f64 {
    let (mut s, mut c) = (0.0, 0usize);
    for st in states {
        s += (0..st.n()).map(|i| st.site_energy(i, pot)).sum::<f64>();
        c += st.n();
    }
    20.0 * s / c as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneBlockRow {
    pub k: usize,
    pub b: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub mean_residual: f64,
    pub std_err: f64,
}

/// Ensemble mean of the one-block residual over disjoint blocks, per `k`.
/// Blocks whose average leaves the equation-of-state domain are skipped and
/// logged.
pub fn one_block_report(
    states: &[&ChainState],
    ks: &[usize],
    b: f64,
    tau: f64,
    pot: &Potential,
) -> Result<Vec<OneBlockRow>> {
    let n = states.first().map(|s| s.n()).unwrap_or(0);
    ks.iter()
        .map(|&k| {
            BlockParams { k, b }.validate(n)?;
            let block = BlockParams { k, b };
            let centres: Vec<usize> = (0..n / (k + 1)).map(|m| m * (k + 1) + k / 2 + 1).collect();
            let per_member: Vec<(f64, usize)> = states
                .par_iter()
                .map(|s| {
                    let mut acc = 0.0;
                    let mut ok = 0;
                    for &i in &centres {
                        match one_block_residual(s, i, &block, tau, pot) {
                            Ok(v) => {
                                acc += v;
                                ok += 1;
                            }
                            Err(Error::NotAdmissible(_)) => {}
                            Err(e) => return Err(e),
                        }
                    }
                    Ok((if ok > 0 { acc / ok as f64 } else { f64::NAN }, centres.len() - ok))
                })
                .collect::<Result<_>>()?;
            let invalid: usize = per_member.iter().map(|v| v.1).sum();
            if invalid > 0 {
                log::warn!("one-block k={k}: {invalid} blocks outside the EOS domain skipped");
            }
            let vals: Vec<f64> = per_member.iter().map(|v| v.0).filter(|v| v.is_finite()).collect();
            let (mean, se) = mean_and_se(&vals);
            Ok(OneBlockRow { k, b, n, mean_residual: mean, std_err: se })
        })
        .collect()
}

pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, f64::NAN);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    MeanR,
    MeanP,
    VarP,
    MeanForce,
    MeanE,
}

impl Moment {
    pub const ALL: [Moment; 5] = [Moment::MeanR, Moment::MeanP, Moment::VarP, Moment::MeanForce, Moment::MeanE];

    pub fn name(&self) -> &'static str {
        match self {
            Moment::MeanR => "mean_r",
            Moment::MeanP => "mean_p",
            Moment::VarP => "var_p",
            Moment::MeanForce => "mean_force",
            Moment::MeanE => "mean_e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResidual {
    pub moment: Moment,
    pub empirical: f64,
    pub predicted: f64,
    pub std_err: f64,
    /// `(empirical - predicted) / std_err`.
    pub z: f64,
    /// `(empirical - predicted) / sd`, with `sd` the per-site spread.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalEquilibrium {
    pub site: usize,
    pub k: usize,
    pub residuals: Vec<MomentResidual>,
}

/// Block-and-ensemble moments around 1-based site `i` against `nu_{lam_ref}`.
///
/// `Var p` is measured about the reference velocity `l2/l3`.
pub fn local_equilibrium_moments(
    ensemble: &[&ChainState],
    i: usize,
    k: usize,
    lam_ref: Lambda,
    pot: &Potential,
) -> Result<LocalEquilibrium> {
    if ensemble.len() < 16 {
        return Err(Error::config("ensemble", format!("need at least 16 members, got {}", ensemble.len())));
    }
    let n = ensemble[0].n();
    let w = window(n, i, k)?;
    let m = thermo::moments(lam_ref, pot)?;
    let mu = lam_ref.velocity();
    let predicted = [m.state.r_bar, mu, 1.0 / lam_ref.l3, m.mean_force, m.state.e_tot];
    let site_value = |s: &ChainState, l: usize| -> [f64; 5] {
        let (r, p) = (s.r[l], s.p[l]);
        [r, p, (p - mu) * (p - mu), pot.force(r), s.site_energy(l, pot)]
    };
    let mut member_means: Vec<[f64; 5]> = Vec::with_capacity(ensemble.len());
    let mut site_sum = [0.0; 5];
    let mut site_sq = [0.0; 5];
    let mut count = 0.0;
    for s in ensemble {
        let mut acc = [0.0; 5];
        for l in w.clone() {
            let v = site_value(s, l);
            for c in 0..5 {
                acc[c] += v[c];
                site_sum[c] += v[c];
                site_sq[c] += v[c] * v[c];
            }
            count += 1.0;
        }
        member_means.push(acc.map(|a| a / (k + 1) as f64));
    }
    let residuals = Moment::ALL
        .iter()
        .enumerate()
        .map(|(c, &moment)| {
            let vals: Vec<f64> = member_means.iter().map(|v| v[c]).collect();
            let (emp, se) = mean_and_se(&vals);
            let site_mean = site_sum[c] / count;
            let sd = (site_sq[c] / count - site_mean * site_mean).max(0.0).sqrt();
            let dev = emp - predicted[c];
            MomentResidual {
                moment,
                empirical: emp,
                predicted: predicted[c],
                std_err: se,
                z: dev / se,
                scaled: if sd > 0.0 { dev / sd } else { 0.0 },
            }
        })
        .collect();
    Ok(LocalEquilibrium { site: i, k, residuals })
}

/// Weak error of one field and test function at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub t: f64,
    pub alpha: usize,
    pub j_name: String,
    pub n: usize,
    /// `|ensemble mean - PDE value|`.
    pub weak_error: f64,
    /// Standard error of the ensemble mean.
    pub std_err: f64,
    /// Root-mean-square deviation of individual members from the PDE value.
    pub rms_error: f64,
    /// Ensemble mean of the empirical density.
    pub micro: f64,
    /// `(1/N) sum J(i/N) u_alpha(i/N, t)` from the PDE.
    pub macro_value: f64,
    pub vanishes_at_boundary: bool,
}

/// Compares ensemble empirical densities with the PDE solution at every
/// snapshot time of the logs.
pub fn field_error(
    logs: &[ObservationLog],
    pde: &PdeRun,
    j_set: &[TestFunction],
    pot: &Potential,
) -> Result<Vec<FieldError>> {
    let Some(first) = logs.first() else { return Ok(vec![]) };
    let times: Vec<f64> = first.snapshots.iter().map(|s| s.t_macro).collect();
    let macro_times: Vec<f64> = pde.snapshots.iter().map(|s| s.t).collect();
    let misaligned = || Error::TimeMisalignment { micro: times.clone(), macro_times: macro_times.clone() };
    for log in logs {
        if log.snapshots.len() != times.len() || log.snapshots.iter().zip(&times).any(|(s, t)| s.t_macro != *t) {
            return Err(misaligned());
        }
    }
    let n = first.initial.state.n();
    let mut out = Vec::new();
    for (ti, &t) in times.iter().enumerate() {
        let snap = pde.at(t).ok_or_else(misaligned)?;
        let (xs, us) = snap.nodes();
        let fields: Vec<Vec<f64>> = (0..3)
            .map(|c| {
                let col: Vec<f64> = us.iter().map(|u| if c == 2 { -u[c] } else { u[c] }).collect();
                (1..=n).map(|i| cubic_at(&xs, &col, i as f64 / n as f64)).collect()
            })
            .collect();
        for j in j_set {
            let weights: Vec<f64> = (1..=n).map(|i| j.eval(i as f64 / n as f64)).collect();
            for alpha in 1..=3 {
                let macro_value = weights.iter().zip(&fields[alpha - 1]).map(|(w, u)| w * u).sum::<f64>() / n as f64;
                let micro: Vec<f64> = logs
                    .iter()
                    .map(|l| empirical_density(&l.snapshots[ti].state, j, alpha, pot))
                    .collect::<Result<_>>()?;
                let (mean, se) = mean_and_se(&micro);
                let rms = (micro.iter().map(|v| (v - macro_value).powi(2)).sum::<f64>() / micro.len() as f64).sqrt();
                out.push(FieldError {
                    t,
                    alpha,
                    j_name: j.name().to_string(),
                    n,
                    weak_error: (mean - macro_value).abs(),
                    std_err: se,
                    rms_error: rms,
                    micro: mean,
                    macro_value,
                    vanishes_at_boundary: j.vanishes_at_boundary(),
                });
            }
        }
    }
    Ok(out)
}

/// Current sum check: `d/dt zeta_i` from [`crate::chain::drift`] against
/// `J_{i-1,i} - J_{i,i+1}`; returns the largest absolute difference.
pub fn continuity_defect(state: &ChainState, tau: f64, pot: &Potential) -> Result<f64> {
    let (dr, dp) = crate::chain::drift(state, tau, pot);
    let n = state.n();
    let mut worst: f64 = 0.0;
    for i in 1..=n {
        let a = micro_flux(state, i, tau, pot)?;
        let b = micro_flux(state, i + 1, tau, pot)?;
        let l = i - 1;
        let de = state.p[l] * dp[l] + pot.force(state.r[l]) * dr[l];
        let lhs = [dr[l], dp[l], -de];
        for c in 0..3 {
            worst = worst.max((lhs[c] - (a[c] - b[c])).abs());
        }
    }
    Ok(worst)
}
