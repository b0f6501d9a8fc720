//! Equilibrium thermodynamics of the single-site Gibbs measure
//! `nu_lambda(dr, dp) = exp(lambda . zeta(r, p) - Theta(lambda)) dr dp`
//! with `zeta = (r, p, -e)` and `e = p^2/2 + V(r)`.
//!
//! The momentum marginal is Gaussian and handled in closed form; the
//! stretch marginal is integrated numerically around its mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::integrate_bisect;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// Integrand cut-off: `exp(-LOG_CUTOFF) = 1e-16` of the mode value.
const LOG_CUTOFF: f64 = 36.841_361_487_904_734;
const QUAD_TOL: f64 = 1e-13;

/// Parameters conjugate to `(r, p, -e)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl Lambda {
    pub const fn new(l1: f64, l2: f64, l3: f64) -> Self {
        Self { l1, l2, l3 }
    }

    /// `(tau beta, velocity beta, beta)`.
    pub fn from_tension(tension: f64, velocity: f64, beta: f64) -> Self {
        Self::new(tension * beta, velocity * beta, beta)
    }

    pub fn tension(&self) -> f64 {
        self.l1 / self.l3
    }

    pub fn velocity(&self) -> f64 {
        self.l2 / self.l3
    }

    pub fn beta(&self) -> f64 {
        self.l3
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.l3
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.l1, self.l2, self.l3]
    }

    pub fn dot(&self, u: &[f64; 3]) -> f64 {
        self.l1 * u[0] + self.l2 * u[1] + self.l3 * u[2]
    }

    fn check(&self) -> Result<()> {
        if self.l3 > 0.0 && self.l1.is_finite() && self.l2.is_finite() && self.l3.is_finite() {
            Ok(())
        } else {
            Err(Error::NonConvergent { l3: self.l3 })
        }
    }
}

/// Macroscopic state: specific volume, velocity and total energy per site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    pub r_bar: f64,
    pub p_bar: f64,
    pub e_tot: f64,
}

impl MacroState {
    pub const fn new(r_bar: f64, p_bar: f64, e_tot: f64) -> Self {
        Self { r_bar, p_bar, e_tot }
    }

    pub fn from_internal(r_bar: f64, p_bar: f64, e_int: f64) -> Self {
        Self::new(r_bar, p_bar, e_int + 0.5 * p_bar * p_bar)
    }

    /// From the conserved vector `(r, p, -E)`.
    pub fn from_conserved(u: [f64; 3]) -> Self {
        Self::new(u[0], u[1], -u[2])
    }

    /// Internal energy `E - p^2/2`.
    pub fn e_int(&self) -> f64 {
        self.e_tot - 0.5 * self.p_bar * self.p_bar
    }

    /// The conserved vector `(r, p, -E)`.
    pub fn conserved(&self) -> [f64; 3] {
        [self.r_bar, self.p_bar, -self.e_tot]
    }

    /// Whether the internal energy lies strictly above the floor `V(r_bar)`.
    pub fn is_admissible(&self, pot: &Potential) -> bool {
        let e = self.e_int();
        e.is_finite() && self.r_bar.is_finite() && e > pot.energy_floor(self.r_bar)
    }
}

/// Stretch-marginal integrals at `(l1, l3)`.
#[derive(Debug, Clone, Copy)]
struct StretchMoments {
    log_z: f64,
    mean_r: f64,
    var_r: f64,
    mean_v: f64,
    var_v: f64,
    cov_rv: f64,
    mean_force: f64,
}

/// Everything the single-site measure `nu_lambda` provides in one pass.
#[derive(Debug, Clone, Copy)]
pub struct GibbsMoments {
    pub lambda: Lambda,
    /// `Theta(lambda)`.
    pub theta: f64,
    /// `D Theta(lambda)` as a macro state.
    pub state: MacroState,
    /// `D^2 Theta(lambda)`: covariance of `(r, p, -e)`.
    pub cov: [[f64; 3]; 3],
    /// `E[V'(r)]`, computed by quadrature (equals `l1/l3`).
    pub mean_force: f64,
    /// `E[V(r)]`.
    pub mean_potential: f64,
    /// `Var(V(r))`.
    pub var_potential: f64,
    /// `Var(r)`.
    pub var_r: f64,
}

/// Solves `V'(r) = target` for convex `V`.
pub(crate) fn force_inverse(pot: &Potential, target: f64) -> f64 {
    let mut lo = target.min(0.0) - 1.0;
    let mut hi = target.max(0.0) + 1.0;
    while pot.force(lo) > target {
        lo = 2.0 * lo - 1.0;
    }
    while pot.force(hi) < target {
        hi = 2.0 * hi + 1.0;
    }
    let mut r = if pot.force(target) .is_finite() { target.clamp(lo, hi) } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let f = pot.force(r) - target;
        if f == 0.0 {
            return r;
        }
        if f > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let c = pot.curvature(r);
        let mut next = r - f / c;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 1e-16 * r.abs().max(1.0) || hi - lo <= 1e-15 * r.abs().max(1.0) {
            return next;
        }
        r = next;
    }
    r
}

/// Distance from the mode at which the log-integrand has dropped by `LOG_CUTOFF`.
fn tail_distance(drop: impl Fn(f64) -> f64, scale: f64) -> f64 {
    let mut hi = scale;
    while drop(hi) < LOG_CUTOFF {
        hi *= 2.0;
        if hi > 1e12 * scale {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if drop(mid) < LOG_CUTOFF {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

fn stretch_moments(l1: f64, l3: f64, pot: &Potential) -> Result<StretchMoments> {
    let mode = force_inverse(pot, l1 / l3);
    let v_mode = pot.value(mode);
    let curv = (l3 * pot.curvature(mode)).max(1e-300);
    let scale = 1.0 / curv.sqrt();
    // log-integrand relative to the mode: l1 d - l3 (V(r) - V(mode))
    let log_w = |d: f64| l1 * d - l3 * (pot.value(mode + d) - v_mode);
    let right = tail_distance(|d| -log_w(d), scale);
    let left = tail_distance(|d| -log_w(-d), scale);
    let integrand = |r: f64| {
        let d = r - mode;
        let v = pot.value(r) - v_mode;
        let w = (l1 * d - l3 * v).exp();
        [w, w * d, w * d * d, w * v, w * v * v, w * d * v, w * pot.force(r)]
    };
    let m = integrate_bisect(integrand, mode - left, mode + right, QUAD_TOL, 8)?;
    let z = m[0];
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::QuadratureFailure(format!("degenerate normalisation {z}")));
    }
    let ed = m[1] / z;
    let ev = m[3] / z;
    Ok(StretchMoments {
        log_z: l1 * mode - l3 * v_mode + z.ln(),
        mean_r: mode + ed,
        var_r: (m[2] / z - ed * ed).max(0.0),
        mean_v: v_mode + ev,
        var_v: (m[4] / z - ev * ev).max(0.0),
        cov_rv: m[5] / z - ed * ev,
        mean_force: m[6] / z,
    })
}

/// Evaluates `Theta`, `D Theta` and `D^2 Theta` at `lam` in one quadrature pass.
pub fn moments(lam: Lambda, pot: &Potential) -> Result<GibbsMoments> {
    lam.check()?;
    let s = stretch_moments(lam.l1, lam.l3, pot)?;
    let b = lam.l3;
    let mu = lam.l2 / b;
    let theta_p = 0.5 * (LN_2PI - b.ln()) + 0.5 * lam.l2 * lam.l2 / b;
    let mean_e = s.mean_v + 0.5 * (mu * mu + 1.0 / b);
    let var_e = s.var_v + mu * mu / b + 0.5 / (b * b);
    let cov = [
        [s.var_r, 0.0, -s.cov_rv],
        [0.0, 1.0 / b, -mu / b],
        [-s.cov_rv, -mu / b, var_e],
    ];
    Ok(GibbsMoments {
        lambda: lam,
        theta: s.log_z + theta_p,
        state: MacroState::new(s.mean_r, mu, mean_e),
        cov,
        mean_force: s.mean_force,
        mean_potential: s.mean_v,
        var_potential: s.var_v,
        var_r: s.var_r,
    })
}

/// `Theta(lambda) = log Z(lambda)`.
pub fn partition_log(lam: Lambda, pot: &Potential) -> Result<f64> {
    Ok(moments(lam, pot)?.theta)
}

/// `D Theta(lambda)`: the mean of `(r, p, -e)` under `nu_lambda`.
pub fn grad_theta(lam: Lambda, pot: &Potential) -> Result<MacroState> {
    Ok(moments(lam, pot)?.state)
}

/// `D^2 Theta(lambda)`: the covariance matrix of `(r, p, -e)`.
pub fn hessian_theta(lam: Lambda, pot: &Potential) -> Result<[[f64; 3]; 3]> {
    Ok(moments(lam, pot)?.cov)
}

/// Profiled objective for the `(l1, l3)` block: the momentum parameter is
/// always `l2 = p_bar l3`, so the inversion only depends on `(r_bar, e_int)`.
struct Reduced {
    f: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
    s: StretchMoments,
}

fn reduced(l1: f64, l3: f64, r_bar: f64, e_int: f64, pot: &Potential) -> Result<Reduced> {
    let s = stretch_moments(l1, l3, pot)?;
    let f = s.log_z + 0.5 * (LN_2PI - l3.ln()) + l3 * e_int - l1 * r_bar;
    let grad = [s.mean_r - r_bar, e_int - s.mean_v - 0.5 / l3];
    let hess = [[s.var_r, -s.cov_rv], [-s.cov_rv, s.var_v + 0.5 / (l3 * l3)]];
    Ok(Reduced { f, grad, hess, s })
}

/// Result of inverting a macro state: the parameters and the moments at them.
#[derive(Debug, Clone, Copy)]
pub struct Inversion {
    pub lambda: Lambda,
    /// Residual `|D Theta(lambda) - u|_inf` reached by the Newton iteration.
    pub residual: f64,
    pub iterations: usize,
    var_r: f64,
    var_v: f64,
    cov_rv: f64,
    log_z_r: f64,
}

impl Inversion {
    /// `Theta(lambda)` at the inverted parameters.
    pub fn theta(&self) -> f64 {
        let b = self.lambda.l3;
        self.log_z_r + 0.5 * (LN_2PI - b.ln()) + 0.5 * self.lambda.l2 * self.lambda.l2 / b
    }

    /// `(P, dP/dr, dP/de)` by implicit differentiation of the dual relation.
    pub fn tension_gradient(&self) -> (f64, f64, f64) {
        let l3 = self.lambda.l3;
        let p = self.lambda.l1 / l3;
        // d(E r, E V + 1/(2 l3)) / d(l1, l3)
        let a = self.var_r;
        let b = -self.cov_rv;
        let c = self.cov_rv;
        let d = -(self.var_v + 0.5 / (l3 * l3));
        let det = a * d - b * c;
        // inverse columns: response of (l1, l3) to unit change in r_bar and e_int
        let dl1_dr = d / det;
        let dl3_dr = -c / det;
        let dl1_de = -b / det;
        let dl3_de = a / det;
        (p, (dl1_dr - p * dl3_dr) / l3, (dl1_de - p * dl3_de) / l3)
    }
}

/// Newton inversion of `u = D Theta(lambda)`.
pub fn invert(u: MacroState, pot: &Potential) -> Result<Inversion> {
    let r_bar = u.r_bar;
    let e_int = u.e_int();
    let floor = pot.energy_floor(r_bar);
    if !u.is_admissible(pot) {
        return Err(Error::NotAdmissible(format!(
            "internal energy {e_int} not above floor V({r_bar}) = {floor}"
        )));
    }
    let scale = 1.0_f64.max(r_bar.abs()).max(e_int.abs());
    let mut l3 = 1.0 / (e_int - floor);
    if !(l3.is_finite() && l3 > 0.0) {
        l3 = 1.0;
    }
    let mut l1 = l3 * pot.force(r_bar);
    let mut cur = reduced(l1, l3, r_bar, e_int, pot)?;
    let mut iterations = 0;
    let norm = |g: &[f64; 2]| g[0].abs().max(g[1].abs());
    while iterations < 100 {
        let gnorm = norm(&cur.grad);
        if gnorm <= 1e-14 * scale {
            break;
        }
        iterations += 1;
        let [[a, b], [c, d]] = cur.hess;
        let det = a * d - b * c;
        if !(det > 0.0) {
            return Err(Error::NotAdmissible(format!("singular Hessian at l = ({l1}, {l3})")));
        }
        let step = [
            -(d * cur.grad[0] - b * cur.grad[1]) / det,
            -(-c * cur.grad[0] + a * cur.grad[1]) / det,
        ];
        let decrease = -(cur.grad[0] * step[0] + cur.grad[1] * step[1]);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let n1 = l1 + t * step[0];
            let n3 = l3 + t * step[1];
            if n3 > 0.0 {
                if let Ok(next) = reduced(n1, n3, r_bar, e_int, pot) {
                    let armijo = next.f <= cur.f - 1e-4 * t * decrease + 1e-15 * cur.f.abs();
                    if armijo || norm(&next.grad) < gnorm {
                        accepted = Some((n1, n3, next));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((n1, n3, next)) => {
                let stalled = (n1 - l1).abs() <= 1e-16 * l1.abs().max(1e-300)
                    && (n3 - l3).abs() <= 1e-16 * l3;
                l1 = n1;
                l3 = n3;
                cur = next;
                if stalled {
                    break;
                }
            }
            None => break,
        }
        if l3 < 1e-12 {
            return Err(Error::NotAdmissible(format!("lambda3 -> 0 while inverting {u:?}")));
        }
    }
    let residual = norm(&cur.grad);
    if !(residual < 1e-9 * scale) {
        return Err(Error::NotAdmissible(format!(
            "Newton inversion of {u:?} stalled with residual {residual:e}"
        )));
    }
    Ok(Inversion {
        lambda: Lambda::new(l1, u.p_bar * l3, l3),
        residual,
        iterations,
        var_r: cur.s.var_r,
        var_v: cur.s.var_v,
        cov_rv: cur.s.cov_rv,
        log_z_r: cur.s.log_z,
    })
}

/// `lambda = D Phi(u)`.
pub fn invert_to_lambda(u: MacroState, pot: &Potential) -> Result<Lambda> {
    Ok(invert(u, pot)?.lambda)
}

/// `Phi(u) = sup_lambda { lambda . u - Theta(lambda) }`.
pub fn legendre_phi(u: MacroState, pot: &Potential) -> Result<f64> {
    let inv = invert(u, pot)?;
    Ok(inv.lambda.dot(&u.conserved()) - inv.theta())
}

/// Equilibrium tension `P(r, e) = E[V'(r)] = l1 / l3`.
pub fn tension(r_bar: f64, e_int: f64, pot: &Potential) -> Result<f64> {
    Ok(invert_to_lambda(MacroState::new(r_bar, 0.0, e_int), pot)?.tension())
}

/// `(P, dP/dr|e, dP/de|r)` by centered differences of [`tension`].
pub fn tension_partials(r_bar: f64, e_int: f64, pot: &Potential) -> Result<(f64, f64, f64)> {
    let p = tension(r_bar, e_int, pot)?;
    let hr = 1e-5 * r_bar.abs().max(1.0);
    let he = 1e-5 * e_int.abs().max(1.0);
    let pr = (tension(r_bar + hr, e_int, pot)? - tension(r_bar - hr, e_int, pot)?) / (2.0 * hr);
    let pe = (tension(r_bar, e_int + he, pot)? - tension(r_bar, e_int - he, pot)?) / (2.0 * he);
    Ok((p, pr, pe))
}

/// Squared sound speed from tension partials. Along an isentrope
/// `de = P dr`, so `c^2 = dP/dr|s = P_r + P P_e`.
pub fn sound_speed_sq_from(p: f64, pr: f64, pe: f64) -> f64 {
    pr + p * pe
}

/// Isentropic sound speed `c = sqrt(dP/dr|s)`.
pub fn sound_speed(r_bar: f64, e_int: f64, pot: &Potential) -> Result<f64> {
    let (p, pr, pe) = tension_partials(r_bar, e_int, pot)?;
    let c2 = sound_speed_sq_from(p, pr, pe);
    if c2 > 0.0 {
        Ok(c2.sqrt())
    } else {
        Err(Error::NotHyperbolic { c2 })
    }
}

/// Thermodynamic entropy `s(r, e) = -Phi(r, 0, -e)`; `ds/de = beta`.
pub fn entropy(r_bar: f64, e_int: f64, pot: &Potential) -> Result<f64> {
    Ok(-legendre_phi(MacroState::new(r_bar, 0.0, e_int), pot)?)
}

/// Large-deviation rate `I(x) = Phi(x) - x . lambda + Theta(lambda)`.
pub fn rate_function(x: MacroState, lam: Lambda, pot: &Potential) -> Result<f64> {
    let phi = legendre_phi(x, pot)?;
    let theta = partition_log(lam, pot)?;
    Ok(phi - lam.dot(&x.conserved()) + theta)
}

/// One line of a thermodynamic table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoRow {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub r_bar: f64,
    pub p_bar: f64,
    #[serde(rename = "E")]
    pub e_tot: f64,
    pub tension: f64,
    pub beta: f64,
    pub sound_speed: f64,
    pub entropy: f64,
}

/// Thermodynamic record at parameters `lam`.
pub fn tabulate_lambda(lam: Lambda, pot: &Potential) -> Result<ThermoRow> {
    let m = moments(lam, pot)?;
    let u = m.state;
    let e = u.e_int();
    Ok(ThermoRow {
        lambda1: lam.l1,
        lambda2: lam.l2,
        lambda3: lam.l3,
        r_bar: u.r_bar,
        p_bar: u.p_bar,
        e_tot: u.e_tot,
        tension: lam.tension(),
        beta: lam.l3,
        sound_speed: sound_speed(u.r_bar, e, pot)?,
        entropy: entropy(u.r_bar, e, pot)?,
    })
}

/// Thermodynamic record at macro state `u`.
pub fn tabulate_state(u: MacroState, pot: &Potential) -> Result<ThermoRow> {
    let lam = invert_to_lambda(u, pot)?;
    let e = u.e_int();
    Ok(ThermoRow {
        lambda1: lam.l1,
        lambda2: lam.l2,
        lambda3: lam.l3,
        r_bar: u.r_bar,
        p_bar: u.p_bar,
        e_tot: u.e_tot,
        tension: lam.tension(),
        beta: lam.l3,
        sound_speed: sound_speed(u.r_bar, e, pot)?,
        entropy: entropy(u.r_bar, e, pot)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: Potential = Potential::Harmonic;

    fn theta_harmonic(l: Lambda) -> f64 {
        LN_2PI - l.l3.ln() + (l.l1 * l.l1 + l.l2 * l.l2) / (2.0 * l.l3)
    }

    #[test]
    fn partition_log_harmonic_examples() {
        for (l, expect) in [
            (Lambda::new(0.0, 0.0, 1.0), LN_2PI),
            (Lambda::new(1.0, 0.0, 1.0), LN_2PI + 0.5),
            (Lambda::new(1.0, 2.0, 2.0), LN_2PI - 2f64.ln() + 1.25),
        ] {
            let got = partition_log(l, &H).unwrap();
            assert!((got - expect).abs() < 1e-10, "{l:?}: {got} vs {expect}");
            assert!((theta_harmonic(l) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn nonpositive_beta_rejected() {
        assert!(matches!(
            partition_log(Lambda::new(0.0, 0.0, 0.0), &H),
            Err(Error::NonConvergent { .. })
        ));
        assert!(matches!(
            grad_theta(Lambda::new(0.0, 0.0, -1.0), &H),
            Err(Error::NonConvergent { .. })
        ));
    }

    #[test]
    fn grad_theta_harmonic_examples() {
        let u = grad_theta(Lambda::new(0.0, 0.0, 1.0), &H).unwrap();
        assert!(u.r_bar.abs() < 1e-12 && u.p_bar == 0.0 && (u.e_tot - 1.0).abs() < 1e-12);
        let u = grad_theta(Lambda::new(1.0, 0.0, 1.0), &H).unwrap();
        assert!((u.r_bar - 1.0).abs() < 1e-12 && (u.e_tot - 1.5).abs() < 1e-12);
        let cos = Potential::Coslattice { a: 0.5 };
        assert_eq!(grad_theta(Lambda::new(0.0, 0.0, 2.0), &cos).unwrap().p_bar, 0.0);
    }

    #[test]
    fn hessian_harmonic_unit_variance() {
        let h = hessian_theta(Lambda::new(0.0, 0.0, 1.0), &H).unwrap();
        assert!((h[0][0] - 1.0).abs() < 1e-12);
        assert!((h[2][2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inversion_harmonic_examples() {
        let l = invert_to_lambda(MacroState::new(1.0, 0.0, 1.5), &H).unwrap();
        assert!((l.l1 - 1.0).abs() < 1e-10 && l.l2 == 0.0 && (l.l3 - 1.0).abs() < 1e-10);
        let l = invert_to_lambda(MacroState::new(0.0, 0.0, 1.0), &H).unwrap();
        assert!(l.l1.abs() < 1e-10 && (l.l3 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inadmissible_state_rejected() {
        // internal energy at or below the potential floor
        let err = invert_to_lambda(MacroState::new(1.0, 0.0, 0.5), &H).unwrap_err();
        assert!(matches!(err, Error::NotAdmissible(_)));
        let err = invert_to_lambda(MacroState::new(0.0, 2.0, 1.0), &H).unwrap_err();
        assert!(matches!(err, Error::NotAdmissible(_)));
    }

    #[test]
    fn phi_and_entropy_harmonic() {
        let phi = legendre_phi(MacroState::new(0.0, 0.0, 1.0), &H).unwrap();
        assert!((phi - (-LN_2PI - 1.0)).abs() < 1e-10);
        let phi = legendre_phi(MacroState::new(1.0, 0.0, 1.5), &H).unwrap();
        assert!((phi - (-1.0 - LN_2PI)).abs() < 1e-10);
        let s = entropy(0.0, 1.0, &H).unwrap();
        assert!((s - (LN_2PI + 1.0)).abs() < 1e-10);
    }

    #[test]
    fn rate_function_harmonic() {
        let lam = Lambda::new(0.0, 0.0, 1.0);
        let i = rate_function(MacroState::new(1.0, 0.0, 1.5), lam, &H).unwrap();
        assert!((i - 0.5).abs() < 1e-10);
        let x = grad_theta(lam, &H).unwrap();
        assert!(rate_function(x, lam, &H).unwrap().abs() < 1e-10);
    }

    #[test]
    fn tension_and_sound_speed_harmonic() {
        assert!((tension(1.0, 1.5, &H).unwrap() - 1.0).abs() < 1e-10);
        assert!(tension(0.0, 1.0, &H).unwrap().abs() < 1e-10);
        for (r, e) in [(0.0, 1.0), (1.0, 1.5), (-0.7, 2.0)] {
            assert!((sound_speed(r, e, &H).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn implicit_tension_gradient_matches_differences() {
        let cos = Potential::Coslattice { a: 0.5 };
        let (r, e) = (0.4, 1.1);
        let inv = invert(MacroState::new(r, 0.0, e), &cos).unwrap();
        let (p, pr, pe) = inv.tension_gradient();
        let (p2, pr2, pe2) = tension_partials(r, e, &cos).unwrap();
        assert!((p - p2).abs() < 1e-12);
        assert!((pr - pr2).abs() < 1e-7, "{pr} vs {pr2}");
        assert!((pe - pe2).abs() < 1e-7, "{pe} vs {pe2}");
    }
}
