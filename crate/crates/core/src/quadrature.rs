//! Gauss-Legendre quadrature on bounded intervals.
//!
//! Two drivers share one rule: [`integrate_bisect`] refines a uniform
//! composite partition by global bisection (the node set then moves
//! continuously with the integration bounds, so integrals stay smooth in
//! any parameters the integrand depends on), and [`integrate_adaptive`]
//! subdivides locally where the integrand is hard.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// The shared 20-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(20))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates a vector-valued `f` over `[a, b]` with this rule.
    pub fn panel<const K: usize>(&self, f: &impl Fn(f64) -> [f64; K], a: f64, b: f64) -> [f64; K] {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = [0.0; K];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            for k in 0..K {
                acc[k] += w * v[k];
            }
        }
        for a in acc.iter_mut() {
            *a *= half;
        }
        acc
    }

    /// Uniform composite rule with `panels` panels.
    pub fn composite<const K: usize>(
        &self,
        f: &impl Fn(f64) -> [f64; K],
        a: f64,
        b: f64,
        panels: usize,
    ) -> [f64; K] {
        let h = (b - a) / panels as f64;
        let mut acc = [0.0; K];
        for j in 0..panels {
            let lo = a + h * j as f64;
            let hi = if j + 1 == panels { b } else { lo + h };
            let v = self.panel(f, lo, hi);
            for k in 0..K {
                acc[k] += v[k];
            }
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn converged<const K: usize>(fine: &[f64; K], coarse: &[f64; K], abs_tol: f64) -> bool {
    fine.iter()
        .zip(coarse)
        .all(|(f, c)| (f - c).abs() <= abs_tol * f.abs().max(1.0))
}

/// Composite Gauss-Legendre with global bisection: the uniform partition of
/// `[a, b]` starts at `initial_panels` and doubles until two successive
/// levels agree to `abs_tol` (scaled by `max(1, |I|)` per component).
pub fn integrate_bisect<const K: usize>(
    f: impl Fn(f64) -> [f64; K],
    a: f64,
    b: f64,
    abs_tol: f64,
    initial_panels: usize,
) -> Result<[f64; K]> {
    let rule = GaussLegendre::standard();
    let mut panels = initial_panels.max(1);
    let mut coarse = rule.composite(&f, a, b, panels);
    for _ in 0..12 {
        panels *= 2;
        let fine = rule.composite(&f, a, b, panels);
        if fine.iter().any(|v| !v.is_finite()) {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if converged(&fine, &coarse, abs_tol) {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::QuadratureFailure(format!(
        "no convergence on [{a}, {b}] after {panels} panels"
    )))
}

/// Locally adaptive Gauss-Legendre: a panel is accepted when its two halves
/// reproduce it to within its share of `abs_tol`.
pub fn integrate_adaptive<const K: usize>(
    f: impl Fn(f64) -> [f64; K],
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<[f64; K]> {
    let rule = GaussLegendre::standard();
    let total = (b - a).abs();
    let mut acc = [0.0; K];
    let mut stack = vec![(a, b, rule.panel(&f, a, b), 0u32)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.panel(&f, lo, mid);
        let right = rule.panel(&f, mid, hi);
        let mut halves = [0.0; K];
        for k in 0..K {
            halves[k] = left[k] + right[k];
        }
        let share = abs_tol * (hi - lo).abs() / total;
        let ok = halves
            .iter()
            .zip(&whole)
            .all(|(h, w)| (h - w).abs() <= share.max(f64::EPSILON * h.abs()));
        if ok {
            for k in 0..K {
                acc[k] += halves[k];
            }
        } else if depth >= 40 {
            return Err(Error::QuadratureFailure(format!(
                "adaptive refinement exhausted near [{lo}, {hi}]"
            )));
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(acc)
}
