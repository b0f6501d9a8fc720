//! Nearest-neighbour spring potentials `V(r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bundled interaction potentials.
///
/// All of them are convex, which the thermodynamics relies on: the energy
/// floor at fixed mean stretch is then `V(r)` (Jensen) and every single-site
/// Gibbs density is log-concave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Potential {
    /// `V(r) = r^2 / 2`.
    Harmonic,
    /// `V(r) = r^2 / 2 + a (1 - cos r)` with `0 < a < 1`.
    Coslattice { a: f64 },
    /// `V(r) = r^2 / 2 + b r^4 / 4`. Quartic growth violates the bounded-curvature
    /// hypothesis of the hydrodynamic theory; kept as a stress test.
    Fpu { b: f64 },
}

impl Potential {
    pub fn coslattice(a: f64) -> Result<Self> {
        let p = Potential::Coslattice { a };
        p.validate()?;
        Ok(p)
    }

    pub fn fpu(b: f64) -> Result<Self> {
        let p = Potential::Fpu { b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Harmonic => Ok(()),
            Potential::Coslattice { a } => {
                if a > 0.0 && a < 1.0 {
                    Ok(())
                } else {
                    Err(Error::config("potential.a", format!("must lie in (0, 1), got {a}")))
                }
            }
            Potential::Fpu { b } => {
                if b > 0.0 && b.is_finite() {
                    log::warn!(
                        "fpu potential (b = {b}) grows quartically: curvature is unbounded and the \
                         hydrodynamic-limit hypotheses do not hold; results are a stress test only"
                    );
                    Ok(())
                } else {
                    Err(Error::config("potential.b", format!("must be positive, got {b}")))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Potential::Harmonic => "harmonic",
            Potential::Coslattice { .. } => "coslattice",
            Potential::Fpu { .. } => "fpu",
        }
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Potential::Harmonic => 0.5 * r * r,
            Potential::Coslattice { a } => 0.5 * r * r + a * (1.0 - r.cos()),
            Potential::Fpu { b } => {
                let r2 = r * r;
                0.5 * r2 + 0.25 * b * r2 * r2
            }
        }
    }

    /// `V'(r)`.
    #[inline]
    pub fn force(&self, r: f64) -> f64 {
        match *self {
            Potential::Harmonic => r,
            Potential::Coslattice { a } => r + a * r.sin(),
            Potential::Fpu { b } => r + b * r * r * r,
        }
    }

    /// `V''(r)`.
    #[inline]
    pub fn curvature(&self, r: f64) -> f64 {
        match *self {
            Potential::Harmonic => 1.0,
            Potential::Coslattice { a } => 1.0 + a * r.cos(),
            Potential::Fpu { b } => 1.0 + 3.0 * b * r * r,
        }
    }

    /// Whether `V''` is bounded above (growth at most quadratic).
    pub fn curvature_bound_ok(&self) -> bool {
        !matches!(self, Potential::Fpu { .. })
    }

    /// Global lower bound on `V''`; strictly positive for the bundled set.
    pub fn curvature_floor(&self) -> f64 {
        match *self {
            Potential::Harmonic => 1.0,
            Potential::Coslattice { a } => 1.0 - a,
            Potential::Fpu { .. } => 1.0,
        }
    }

    /// Supremum of `V''` over `|r| <= probe_radius` (the global supremum when
    /// the curvature is bounded).
    pub fn curvature_sup(&self, probe_radius: f64) -> f64 {
        match *self {
            Potential::Harmonic => 1.0,
            Potential::Coslattice { a } => 1.0 + a,
            Potential::Fpu { b } => 1.0 + 3.0 * b * probe_radius * probe_radius,
        }
    }

    /// Radius beyond which `V(r)/|r| >= 10` holds for this potential.
    pub fn growth_probe_radius(&self) -> f64 {
        match *self {
            Potential::Harmonic | Potential::Coslattice { .. } => 20.0,
            Potential::Fpu { b } => {
                // r/2 + b r^3/4 >= 10
                let mut r: f64 = 1.0;
                while 0.5 * r + 0.25 * b * r.powi(3) < 10.0 {
                    r *= 1.25;
                }
                r
            }
        }
    }

    /// Default microscopic step `1e-3 / sqrt(sup V'')`, probing `|r| <= 10`
    /// for unbounded curvature.
    pub fn default_dt_micro(&self) -> f64 {
        1e-3 / self.curvature_sup(10.0).sqrt()
    }

    /// Lowest internal energy compatible with mean stretch `r_bar`.
    pub fn energy_floor(&self, r_bar: f64) -> f64 {
        self.value(r_bar)
    }
}

/// Outcome of sampling the potential invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialReport {
    pub nonnegative: bool,
    pub superlinear: bool,
    pub curvature_bounded: bool,
    pub derivatives_consistent: bool,
}

impl PotentialReport {
    pub fn all_ok(&self) -> bool {
        self.nonnegative && self.superlinear && self.curvature_bounded && self.derivatives_consistent
    }
}

/// Samples the potential on `[-R, R]` and checks positivity, growth,
/// curvature bound and derivative consistency (centered differences).
pub fn probe(pot: &Potential) -> PotentialReport {
    let radius = pot.growth_probe_radius();
    let samples: Vec<f64> = (0..=400).map(|i| -2.0 * radius + 4.0 * radius * i as f64 / 400.0).collect();
    let nonnegative = samples.iter().all(|&r| pot.value(r) >= 0.0);
    let superlinear = samples
        .iter()
        .filter(|r| r.abs() >= radius)
        .all(|&r| pot.value(r) / r.abs() >= 10.0);
    let curvature_bounded = if pot.curvature_bound_ok() {
        let bound = pot.curvature_sup(f64::INFINITY);
        samples.iter().all(|&r| pot.curvature(r) <= bound)
    } else {
        true
    };
    let derivatives_consistent = samples.iter().filter(|r| r.abs() <= 5.0).all(|&r| {
        let h = 1e-4 * r.abs().max(1.0);
        let d1 = (pot.value(r + h) - pot.value(r - h)) / (2.0 * h);
        let d2 = (pot.force(r + h) - pot.force(r - h)) / (2.0 * h);
        let f = pot.force(r);
        let c = pot.curvature(r);
        (d1 - f).abs() <= 1e-6 * f.abs().max(1.0) && (d2 - c).abs() <= 1e-6 * c.abs().max(1.0)
    });
    PotentialReport {
        nonnegative,
        superlinear,
        curvature_bounded,
        derivatives_consistent,
    }
}
