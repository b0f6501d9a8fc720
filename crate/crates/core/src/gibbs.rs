//! Exact sampling from single-site Gibbs measures and (local-)Gibbs product
//! measures.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::chain::ChainState;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::profile::MacroProfile;
use crate::thermo::{self, force_inverse, Lambda};

/// Maximum consecutive rejections before the envelope is declared broken.
const MAX_TRIALS: u64 = 1000;

/// Purpose tag of a random stream; members get disjoint streams per purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Initial-state sampling.
    Init = 0,
    /// Poisson clocks and bond choices of the exchange noise.
    Noise = 1,
    /// Anything else (tests, diagnostics).
    Aux = 2,
}

/// The generator for `(member, purpose)` derived from one root seed.
pub fn stream_rng(seed: u64, member: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member * 4 + purpose as u64);
    rng
}

#[derive(Debug, Clone, Copy)]
enum Envelope {
    /// Gaussian proposal; `log(f/q)` is concave with maximum 0 at the mode.
    Gauss { sigma: f64 },
    /// Flat core on `[-w_left, w_right]` with exponential tails from tangents.
    Tails { w_left: f64, w_right: f64, slope_left: f64, slope_right: f64, drop_left: f64, drop_right: f64 },
}

/// A prepared rejection sampler for `nu_lambda`.
#[derive(Debug, Clone)]
pub struct SiteSampler {
    lam: Lambda,
    pot: Potential,
    mode: f64,
    v_mode: f64,
    envelope: Envelope,
    p_mean: f64,
    p_sd: f64,
}

impl SiteSampler {
    pub fn new(lam: Lambda, pot: &Potential) -> Result<Self> {
        if !(lam.l3 > 0.0) {
            return Err(Error::NonConvergent { l3: lam.l3 });
        }
        let mode = force_inverse(pot, lam.l1 / lam.l3);
        let kappa = lam.l3 * pot.curvature(mode);
        let kappa_min = lam.l3 * pot.curvature_floor();
        let envelope = if kappa > 1e-8 && kappa_min > 0.0 {
            let var = (1.44 / kappa).max(1.0 / kappa_min);
            Envelope::Gauss { sigma: var.sqrt() }
        } else {
            Self::tail_envelope(lam, pot, mode)
        };
        Ok(Self {
            lam,
            pot: *pot,
            mode,
            v_mode: pot.value(mode),
            envelope,
            p_mean: lam.l2 / lam.l3,
            p_sd: lam.l3.sqrt().recip(),
        })
    }

    fn tail_envelope(lam: Lambda, pot: &Potential, mode: f64) -> Envelope {
        let v0 = pot.value(mode);
        let ell = |d: f64| lam.l1 * d - lam.l3 * (pot.value(mode + d) - v0);
        let slope = |d: f64| lam.l1 - lam.l3 * pot.force(mode + d);
        // edge of the core where ell has dropped by one
        let edge = |sign: f64| {
            let mut hi = 1.0;
            while ell(sign * hi) > -1.0 {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if ell(sign * mid) > -1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        let (wl, wr) = (edge(-1.0), edge(1.0));
        Envelope::Tails {
            w_left: wl,
            w_right: wr,
            slope_left: slope(-wl),
            slope_right: slope(wr),
            drop_left: ell(-wl),
            drop_right: ell(wr),
        }
    }

    pub fn lambda(&self) -> Lambda {
        self.lam
    }

    /// `log f(r) - log f(mode)` for the unnormalised stretch density.
    #[inline]
    fn log_ratio(&self, r: f64) -> f64 {
        self.lam.l1 * (r - self.mode) - self.lam.l3 * (self.pot.value(r) - self.v_mode)
    }

    pub fn sample_r<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_TRIALS {
            let u: f64 = rng.gen();
            match self.envelope {
                Envelope::Gauss { sigma } => {
                    let z: f64 = StandardNormal.sample(rng);
                    let d = sigma * z;
                    let r = self.mode + d;
                    let log_acc = self.log_ratio(r) + 0.5 * z * z;
                    if u.ln() <= log_acc {
                        return Ok(r);
                    }
                }
                Envelope::Tails { w_left, w_right, slope_left, slope_right, drop_left, drop_right } => {
                    // masses: core (height 1), tails exp(drop + slope * excess)
                    let core = w_left + w_right;
                    let tl = drop_left.exp() / slope_left;
                    let tr = drop_right.exp() / -slope_right;
                    let pick: f64 = rng.gen::<f64>() * (core + tl + tr);
                    let e: f64 = Exp1.sample(rng);
                    let (d, log_env) = if pick < core {
                        (pick - w_left, 0.0)
                    } else if pick < core + tl {
                        let x = e / slope_left;
                        (-w_left - x, drop_left - slope_left * x)
                    } else {
                        let x = e / -slope_right;
                        (w_right + x, drop_right + slope_right * x)
                    };
                    if u.ln() <= self.log_ratio(self.mode + d) - log_env {
                        return Ok(self.mode + d);
                    }
                }
            }
        }
        Err(Error::EnvelopeFailure { accepted: 0, trials: MAX_TRIALS })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let r = self.sample_r(rng)?;
        let z: f64 = StandardNormal.sample(rng);
        Ok((r, self.p_mean + self.p_sd * z))
    }
}

/// One draw `(r, p)` from `nu_lambda`.
pub fn sample_site<R: Rng + ?Sized>(lam: Lambda, pot: &Potential, rng: &mut R) -> Result<(f64, f64)> {
    SiteSampler::new(lam, pot)?.sample(rng)
}

/// `lambda . zeta(r, p) - Theta(lambda)`.
pub fn log_density_site(lam: Lambda, r: f64, p: f64, pot: &Potential) -> Result<f64> {
    let theta = thermo::partition_log(lam, pot)?;
    let e = 0.5 * p * p + pot.value(r);
    Ok(lam.l1 * r + lam.l2 * p - lam.l3 * e - theta)
}

/// Parameters `lambda(i/N)` for sites `i = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaProfile {
    pub values: Vec<Lambda>,
}

impl LambdaProfile {
    pub fn constant(lam: Lambda, n: usize) -> Self {
        Self { values: vec![lam; n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> Lambda) -> Self {
        Self { values: (1..=n).map(|i| f(i as f64 / n as f64)).collect() }
    }

    /// Pushes a macroscopic profile through `invert_to_lambda` at `x_i = i/N`.
    pub fn from_macro(profile: &MacroProfile, n: usize, pot: &Potential) -> Result<Self> {
        if let MacroProfile::Constant { state } = profile {
            return Ok(Self::constant(thermo::invert_to_lambda(*state, pot)?, n));
        }
        let values = (1..=n)
            .into_par_iter()
            .map(|i| thermo::invert_to_lambda(profile.state(i as f64 / n as f64), pot))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A chain drawn from the product measure with site `i` distributed as
/// `nu_{lambda(i/N)}`.
pub fn sample_chain<R: Rng + ?Sized>(profile: &LambdaProfile, pot: &Potential, rng: &mut R) -> Result<ChainState> {
    let n = profile.len();
    let mut r = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut cached: Option<SiteSampler> = None;
    for lam in &profile.values {
        if cached.as_ref().map(|s| s.lam != *lam).unwrap_or(true) {
            cached = Some(SiteSampler::new(*lam, pot)?);
        }
        let (ri, pi) = cached.as_ref().expect("sampler prepared").sample(rng)?;
        r.push(ri);
        p.push(pi);
    }
    Ok(ChainState::new(r, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn harmonic_moments() {
        let mut rng = stream_rng(7, 0, Stream::Aux);
        let s = SiteSampler::new(Lambda::new(1.0, 0.0, 1.0), &Potential::Harmonic).unwrap();
        let n = 200_000;
        let (rs, ps): (Vec<f64>, Vec<f64>) = (0..n).map(|_| s.sample(&mut rng).unwrap()).unzip();
        let (mr, vr) = mean_var(&rs);
        let (mp, vp) = mean_var(&ps);
        let se = 1.0 / (n as f64).sqrt();
        assert!((mr - 1.0).abs() < 4.0 * se && mp.abs() < 4.0 * se);
        assert!((vr - 1.0).abs() < 4.0 * 2f64.sqrt() * se);
        assert!((vp - 1.0).abs() < 4.0 * 2f64.sqrt() * se);
    }

    #[test]
    fn tail_envelope_is_valid() {
        // force the fallback and compare with the Gaussian path
        let pot = Potential::coslattice(0.5).unwrap();
        let lam = Lambda::new(0.6, 0.0, 1.0);
        let mut s = SiteSampler::new(lam, &pot).unwrap();
        s.envelope = SiteSampler::tail_envelope(lam, &pot, s.mode);
        let mut rng = stream_rng(3, 0, Stream::Aux);
        let n = 100_000;
        let rs: Vec<f64> = (0..n).map(|_| s.sample_r(&mut rng).unwrap()).collect();
        let (m, v) = mean_var(&rs);
        let exact = thermo::moments(lam, &pot).unwrap();
        let se = (exact.var_r / n as f64).sqrt();
        assert!((m - exact.state.r_bar).abs() < 5.0 * se, "{m} vs {}", exact.state.r_bar);
        assert!((v - exact.var_r).abs() < 0.03 * exact.var_r);
    }

    #[test]
    fn log_density_examples() {
        let h = Potential::Harmonic;
        let lam = Lambda::new(0.0, 0.0, 1.0);
        let v = log_density_site(lam, 0.0, 0.0, &h).unwrap();
        assert!((v + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
        let lam = Lambda::new(0.3, 0.7, 1.4);
        let a = log_density_site(lam, 0.2, 0.9, &h).unwrap();
        let b = log_density_site(lam, 0.2, -0.9, &h).unwrap();
        assert!((a - b - 2.0 * 0.7 * 0.9).abs() < 1e-12);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map({
            let mut r = stream_rng(1, 2, Stream::Init);
            move |_| r.gen()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut r = stream_rng(1, 2, Stream::Init);
            move |_| r.gen()
        }).collect();
        let c: u64 = stream_rng(1, 2, Stream::Noise).gen();
        assert_eq!(a, b);
        assert_ne!(a[0], c);
    }
}
