//! Equation of state `(r, e) -> (P, c^2)` with an optional interpolation table.
//!
//! The table lives on a uniform grid in `(r, e - V(r))` so that the
//! admissible region becomes a half-plane, and uses tensor-product cubic
//! Lagrange interpolation. Node values come from the implicit derivatives of
//! the Newton inversion, so `c^2` is tabulated directly rather than
//! differentiated from the interpolant.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::thermo::{self, MacroState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosPoint {
    pub tension: f64,
    pub c2: f64,
}

/// Direct evaluation through the thermodynamic inversion.
pub fn eos_direct(r: f64, e_int: f64, pot: &Potential) -> Result<EosPoint> {
    let inv = thermo::invert(MacroState::new(r, 0.0, e_int), pot)?;
    let (p, pr, pe) = inv.tension_gradient();
    Ok(EosPoint { tension: p, c2: thermo::sound_speed_sq_from(p, pr, pe) })
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    h: f64,
    n: usize,
}

impl Axis {
    fn covering(lo: f64, hi: f64, h: f64) -> Self {
        // one extra node on each side so the stencil is centred at the edges
        let lo = lo - h;
        let n = ((hi + h - lo) / h).ceil() as usize + 1;
        Self { lo, h, n: n.max(4) }
    }

    fn node(&self, i: usize) -> f64 {
        self.lo + self.h * i as f64
    }

    fn hi(&self) -> f64 {
        self.node(self.n - 1)
    }

    fn contains(&self, x: f64) -> bool {
        x >= self.node(1) && x <= self.node(self.n - 2)
    }

    /// First stencil index and the four cubic Lagrange weights.
    fn stencil(&self, x: f64) -> (usize, [f64; 4]) {
        let s = (x - self.lo) / self.h;
        let i = (s.floor() as isize - 1).clamp(0, self.n as isize - 4) as usize;
        let t = s - i as f64;
        let w = [
            -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
            t * (t - 2.0) * (t - 3.0) / 2.0,
            -t * (t - 1.0) * (t - 3.0) / 2.0,
            t * (t - 1.0) * (t - 2.0) / 6.0,
        ];
        (i, w)
    }
}

#[derive(Debug, Clone)]
struct Table {
    r: Axis,
    eta: Axis,
    tension: Vec<f64>,
    c2: Vec<f64>,
}

impl Table {
    fn build(r: Axis, eta: Axis, pot: &Potential) -> Self {
        let nodes: Vec<(f64, f64)> = (0..r.n)
            .flat_map(|i| (0..eta.n).map(move |j| (i, j)))
            .map(|(i, j)| (r.node(i), eta.node(j)))
            .collect();
        let vals: Vec<(f64, f64)> = nodes
            .par_iter()
            .map(|&(ri, etaj)| {
                if etaj <= 0.0 {
                    return (f64::NAN, f64::NAN);
                }
                match eos_direct(ri, pot.value(ri) + etaj, pot) {
                    Ok(p) => (p.tension, p.c2),
                    Err(_) => (f64::NAN, f64::NAN),
                }
            })
            .collect();
        let (tension, c2) = vals.into_iter().unzip();
        Self { r, eta, tension, c2 }
    }

    fn eval(&self, r: f64, eta: f64) -> Option<EosPoint> {
        let (i0, wr) = self.r.stencil(r);
        let (j0, we) = self.eta.stencil(eta);
        let (mut p, mut c2) = (0.0, 0.0);
        for (a, wa) in wr.iter().enumerate() {
            let row = (i0 + a) * self.eta.n + j0;
            let (mut pp, mut cc) = (0.0, 0.0);
            for (b, wb) in we.iter().enumerate() {
                pp += wb * self.tension[row + b];
                cc += wb * self.c2[row + b];
            }
            p += wa * pp;
            c2 += wa * cc;
        }
        (p.is_finite() && c2.is_finite()).then_some(EosPoint { tension: p, c2 })
    }
}

/// Equation-of-state evaluator used inside the solver loop.
#[derive(Debug, Clone)]
pub struct Eos {
    pot: Potential,
    spacing: Option<f64>,
    table: Option<Table>,
    rebuilds: usize,
}

impl Eos {
    /// Exact thermodynamic evaluation at every call.
    pub fn direct(pot: &Potential) -> Self {
        Self { pot: *pot, spacing: None, table: None, rebuilds: 0 }
    }

    /// Tabulated evaluation with node spacing `h` in both `r` and `e - V(r)`.
    pub fn tabulated(pot: &Potential, h: f64) -> Self {
        Self { pot: *pot, spacing: Some(h), table: None, rebuilds: 0 }
    }

    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    /// Number of times the table has been (re)built.
    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    /// Builds the table to cover the given `(r, e)` states with a margin.
    pub fn prepare(&mut self, states: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
        let Some(h) = self.spacing else { return Ok(()) };
        let mut box_ = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for (r, e) in states {
            let eta = e - self.pot.value(r);
            if !(eta > 0.0) {
                return Err(Error::NotAdmissible(format!("(r, e) = ({r}, {e}) below the energy floor")));
            }
            box_ = [box_[0].min(r), box_[1].max(r), box_[2].min(eta), box_[3].max(eta)];
        }
        if let Some(t) = &self.table {
            box_ = [box_[0].min(t.r.node(1)), box_[1].max(t.r.hi() - t.r.h), box_[2].min(t.eta.node(1)), box_[3].max(t.eta.hi() - t.eta.h)];
        }
        if !box_[0].is_finite() {
            return Ok(());
        }
        let pad_r = 0.05 + 0.25 * (box_[1] - box_[0]);
        let pad_e = 0.05 + 0.25 * (box_[3] - box_[2]);
        let r = Axis::covering(box_[0] - pad_r, box_[1] + pad_r, h);
        let eta_lo = (box_[2] - pad_e).max(0.5 * box_[2]);
        let eta = Axis::covering(eta_lo, box_[3] + pad_e, h);
        self.table = Some(Table::build(r, eta, &self.pot));
        self.rebuilds += 1;
        log::debug!("eos table {}x{} nodes (rebuild {})", r.n, eta.n, self.rebuilds);
        Ok(())
    }

    pub fn eval(&mut self, r: f64, e_int: f64) -> Result<EosPoint> {
        let eta = e_int - self.pot.value(r);
        if !(eta > 0.0) || !r.is_finite() {
            return Err(Error::NotAdmissible(format!(
                "internal energy {e_int} not above floor at r = {r}"
            )));
        }
        if self.spacing.is_none() {
            return eos_direct(r, e_int, &self.pot);
        }
        let inside = self.table.as_ref().map(|t| t.r.contains(r) && t.eta.contains(eta)).unwrap_or(false);
        if !inside {
            self.prepare([(r, e_int)])?;
        }
        match self.table.as_ref().and_then(|t| t.eval(r, eta)) {
            Some(p) => Ok(p),
            None => eos_direct(r, e_int, &self.pot),
        }
    }
}
