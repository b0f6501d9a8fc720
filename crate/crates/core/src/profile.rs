//! Boundary tension schedules and initial macroscopic profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::thermo::MacroState;

/// Boundary force `tau(t)` at macroscopic time `t`, with two derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TensionSchedule {
    Constant { tau: f64 },
    /// `base + amp sin(omega t)`.
    Sine { base: f64, amp: f64, omega: f64 },
    /// `base + amp (1 - cos(omega t))^2 / 4`: rises from `base` with
    /// `tau'(0) = tau''(0) = 0`.
    SmoothRamp { base: f64, amp: f64, omega: f64 },
    /// Arbitrary expression in `t`.
    Expr { tau: Expr },
}

impl TensionSchedule {
    pub fn tau(&self, t: f64) -> f64 {
        match self {
            Self::Constant { tau } => *tau,
            Self::Sine { base, amp, omega } => base + amp * (omega * t).sin(),
            Self::SmoothRamp { base, amp, omega } => {
                let u = 1.0 - (omega * t).cos();
                base + 0.25 * amp * u * u
            }
            Self::Expr { tau } => tau.eval(0.0, t),
        }
    }

    pub fn dtau(&self, t: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Sine { amp, omega, .. } => amp * omega * (omega * t).cos(),
            Self::SmoothRamp { amp, omega, .. } => {
                let (s, c) = (omega * t).sin_cos();
                0.5 * amp * omega * (1.0 - c) * s
            }
            Self::Expr { tau } => tau.derivative(Var::T).eval(0.0, t),
        }
    }

    pub fn d2tau(&self, t: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Sine { amp, omega, .. } => -amp * omega * omega * (omega * t).sin(),
            Self::SmoothRamp { amp, omega, .. } => {
                let (s, c) = (omega * t).sin_cos();
                0.5 * amp * omega * omega * (s * s + (1.0 - c) * c)
            }
            Self::Expr { tau } => tau.derivative(Var::T).derivative(Var::T).eval(0.0, t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(name, format!("must be finite, got {v}")))
            }
        };
        match self {
            Self::Constant { tau } => finite("tau", *tau),
            Self::Sine { base, amp, omega } | Self::SmoothRamp { base, amp, omega } => {
                finite("base", *base)?;
                finite("amp", *amp)?;
                finite("omega", *omega)
            }
            Self::Expr { tau } => {
                if tau.depends_on(Var::X) {
                    return Err(Error::config("tau", "schedule may only depend on t"));
                }
                finite("tau(0)", tau.eval(0.0, 0.0))
            }
        }
    }

    /// Largest relative mismatch between the analytic derivatives and
    /// centered differences over `[0, horizon]`.
    pub fn derivative_consistency(&self, horizon: f64) -> f64 {
        let h = 1e-4;
        let mut worst: f64 = 0.0;
        for k in 0..=20 {
            let t = horizon * k as f64 / 20.0;
            let fd1 = (self.tau(t + h) - self.tau(t - h)) / (2.0 * h);
            let fd2 = (self.dtau(t + h) - self.dtau(t - h)) / (2.0 * h);
            let e1 = (fd1 - self.dtau(t)).abs() / self.dtau(t).abs().max(1.0);
            let e2 = (fd2 - self.d2tau(t)).abs() / self.d2tau(t).abs().max(1.0);
            worst = worst.max(e1).max(e2);
        }
        worst
    }
}

/// Initial data `(r0, p0, E0)` on `[0, 1]` with two spatial derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MacroProfile {
    Constant { state: MacroState },
    /// Expressions in `x` for stretch, velocity and total energy.
    Analytic { r: Expr, p: Expr, e_tot: Expr },
    /// Nodal values with linear interpolation.
    Sampled { x: Vec<f64>, r: Vec<f64>, p: Vec<f64>, e_tot: Vec<f64> },
}

impl MacroProfile {
    pub fn constant(state: MacroState) -> Self {
        Self::Constant { state }
    }

    pub fn analytic(r: &str, p: &str, e_tot: &str) -> Result<Self> {
        let parse = |field: &str, s: &str| {
            Expr::parse(s).map_err(|e| Error::config(field, e.to_string()))
        };
        Ok(Self::Analytic { r: parse("r", r)?, p: parse("p", p)?, e_tot: parse("e_tot", e_tot)? })
    }

    pub fn state(&self, x: f64) -> MacroState {
        let [r, p, e] = self.derivative(x, 0);
        MacroState::new(r, p, e)
    }

    /// `order`-th derivative in `x` of `(r, p, E)`, `order <= 2`.
    pub fn derivative(&self, x: f64, order: usize) -> [f64; 3] {
        match self {
            Self::Constant { state } => {
                if order == 0 {
                    [state.r_bar, state.p_bar, state.e_tot]
                } else {
                    [0.0; 3]
                }
            }
            Self::Analytic { r, p, e_tot } => {
                let d = |e: &Expr| {
                    let mut e = e.clone();
                    for _ in 0..order {
                        e = e.derivative(Var::X);
                    }
                    e.eval(x, 0.0)
                };
                [d(r), d(p), d(e_tot)]
            }
            Self::Sampled { .. } => match order {
                0 => self.sampled_at(x),
                1 => {
                    let h = self.sample_spacing();
                    let (a, b) = (self.sampled_at(x + h), self.sampled_at(x - h));
                    std::array::from_fn(|k| (a[k] - b[k]) / (2.0 * h))
                }
                _ => {
                    let h = self.sample_spacing();
                    let (a, m, b) = (self.sampled_at(x + h), self.sampled_at(x), self.sampled_at(x - h));
                    std::array::from_fn(|k| (a[k] - 2.0 * m[k] + b[k]) / (h * h))
                }
            },
        }
    }

    fn sample_spacing(&self) -> f64 {
        match self {
            Self::Sampled { x, .. } if x.len() > 1 => (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64,
            _ => 1e-3,
        }
    }

    fn sampled_at(&self, xq: f64) -> [f64; 3] {
        let Self::Sampled { x, r, p, e_tot } = self else { unreachable!() };
        let n = x.len();
        if n == 1 || xq <= x[0] {
            return [r[0], p[0], e_tot[0]];
        }
        if xq >= x[n - 1] {
            return [r[n - 1], p[n - 1], e_tot[n - 1]];
        }
        let j = x.partition_point(|&v| v <= xq).clamp(1, n - 1);
        let w = (xq - x[j - 1]) / (x[j] - x[j - 1]);
        let lin = |v: &[f64]| v[j - 1] + w * (v[j] - v[j - 1]);
        [lin(r), lin(p), lin(e_tot)]
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { state } => {
                if [state.r_bar, state.p_bar, state.e_tot].iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::config("state", "non-finite constant profile"))
                }
            }
            Self::Analytic { r, p, e_tot } => {
                for (name, e) in [("r", r), ("p", p), ("e_tot", e_tot)] {
                    if e.depends_on(Var::T) {
                        return Err(Error::config(name, "initial profile may only depend on x"));
                    }
                }
                Ok(())
            }
            Self::Sampled { x, r, p, e_tot } => {
                if x.is_empty() {
                    return Err(Error::config("x", "sampled profile needs at least one node"));
                }
                if r.len() != x.len() || p.len() != x.len() || e_tot.len() != x.len() {
                    return Err(Error::config("x", "sampled columns differ in length"));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::config("x", "nodes must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    /// Reads a CSV with columns `x,r,p,E`.
    pub fn from_csv(path: &std::path::Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let (mut x, mut r, mut p, mut e) = (vec![], vec![], vec![], vec![]);
        for rec in rdr.deserialize::<(f64, f64, f64, f64)>() {
            let (a, b, c, d) = rec?;
            x.push(a);
            r.push(b);
            p.push(c);
            e.push(d);
        }
        let prof = Self::Sampled { x, r, p, e_tot: e };
        prof.validate()?;
        Ok(prof)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_derivatives_consistent() {
        let scheds = [
            TensionSchedule::Constant { tau: 1.0 },
            TensionSchedule::Sine { base: 1.0, amp: 0.2, omega: 1.0 },
            TensionSchedule::SmoothRamp { base: 1.0, amp: 0.5, omega: std::f64::consts::TAU },
            TensionSchedule::Expr { tau: Expr::parse("1 + 0.1*t^3").unwrap() },
        ];
        for s in &scheds {
            assert!(s.derivative_consistency(1.0) < 1e-5, "{s:?}");
        }
        let ramp = &scheds[2];
        assert_eq!(ramp.tau(0.0), 1.0);
        assert_eq!(ramp.dtau(0.0), 0.0);
        assert_eq!(ramp.d2tau(0.0), 0.0);
    }

    #[test]
    fn analytic_profile_derivatives() {
        let p = MacroProfile::analytic("1 + x^2", "sin(pi*x)", "2").unwrap();
        assert_eq!(p.derivative(0.5, 1)[0], 1.0);
        assert_eq!(p.derivative(0.5, 2)[0], 2.0);
        assert_eq!(p.state(0.0).p_bar, 0.0);
    }

    #[test]
    fn sampled_profile_interpolates_linearly() {
        let p = MacroProfile::Sampled {
            x: vec![0.0, 0.5, 1.0],
            r: vec![0.0, 1.0, 0.0],
            p: vec![0.0; 3],
            e_tot: vec![1.0; 3],
        };
        p.validate().unwrap();
        assert!((p.state(0.25).r_bar - 0.5).abs() < 1e-15);
        assert_eq!(p.state(2.0).r_bar, 0.0);
    }
}
