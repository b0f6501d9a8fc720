use hydrochain::gibbs::{self, LambdaProfile, SiteSampler, Stream};
use hydrochain::profile::MacroProfile;
use hydrochain::thermo::{self, Lambda};
use hydrochain::Potential;

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    // Chebyshev fit, relative error below 1.2e-7
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t * (-z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806 + t * (0.27886807 + t * (-1.13520398 + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[test]
fn harmonic_stretch_is_gaussian() {
    let pot = Potential::Harmonic;
    let lam = Lambda::from_tension(0.7, 0.0, 2.0);
    let s = SiteSampler::new(lam, &pot).unwrap();
    let mut rng = gibbs::stream_rng(9, 0, Stream::Aux);
    let mut xs: Vec<f64> = (0..20_000).map(|_| s.sample_r(&mut rng).unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let sd = (1.0 / 2.0f64).sqrt();
    let d = xs
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = normal_cdf((x - 0.7) / sd);
            (f - k as f64 / n).abs().max((f - (k + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    // Kolmogorov-Smirnov at the 0.1% level
    assert!(d < 1.95 / n.sqrt(), "KS distance {d}");
}

#[test]
fn site_moments_match_thermodynamics() {
    for pot in [Potential::Coslattice { a: 0.5 }, Potential::Fpu { b: 0.5 }] {
        let lam = Lambda::from_tension(0.8, 0.3, 1.5);
        let u = thermo::grad_theta(lam, &pot).unwrap();
        let s = SiteSampler::new(lam, &pot).unwrap();
        let mut rng = gibbs::stream_rng(4, 0, Stream::Aux);
        let draws: Vec<(f64, f64)> = (0..40_000).map(|_| s.sample(&mut rng).unwrap()).collect();
        let r: Vec<f64> = draws.iter().map(|d| d.0).collect();
        let p: Vec<f64> = draws.iter().map(|d| d.1).collect();
        let e: Vec<f64> = draws.iter().map(|d| 0.5 * d.1 * d.1 + pot.value(d.0)).collect();
        for (v, target) in [(&r, u.r_bar), (&p, u.p_bar), (&e, u.e_tot)] {
            let (m, var) = mean_var(v);
            assert!((m - target).abs() < 5.0 * (var / v.len() as f64).sqrt(), "{pot:?}: {m} vs {target}");
        }
    }
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let pot = Potential::Coslattice { a: 0.5 };
    let prof = LambdaProfile::constant(Lambda::new(1.0, 0.0, 1.0), 100);
    let a = gibbs::sample_chain(&prof, &pot, &mut gibbs::stream_rng(1, 3, Stream::Init)).unwrap();
    let b = gibbs::sample_chain(&prof, &pot, &mut gibbs::stream_rng(1, 3, Stream::Init)).unwrap();
    let c = gibbs::sample_chain(&prof, &pot, &mut gibbs::stream_rng(1, 4, Stream::Init)).unwrap();
    let d = gibbs::sample_chain(&prof, &pot, &mut gibbs::stream_rng(2, 3, Stream::Init)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.r, c.r);
    assert_ne!(a.r, d.r);
}

#[test]
fn local_profile_is_tracked() {
    let pot = Potential::Coslattice { a: 0.5 };
    let prof = MacroProfile::analytic("1 + 0.3*sin(pi*x)", "0.2*x", "2 + 0.5*x").unwrap();
    let n = 400;
    let lp = LambdaProfile::from_macro(&prof, n, &pot).unwrap();
    let chains: Vec<_> = (0..200).map(|m| gibbs::sample_chain(&lp, &pot, &mut gibbs::stream_rng(8, m, Stream::Init)).unwrap()).collect();
    for i in [40, 200, 360] {
        let u = prof.state(i as f64 / n as f64);
        let r: Vec<f64> = chains.iter().map(|c| c.r[i - 1]).collect();
        let (m, var) = mean_var(&r);
        assert!((m - u.r_bar).abs() < 5.0 * (var / r.len() as f64).sqrt(), "site {i}: {m} vs {}", u.r_bar);
    }
}

#[test]
fn single_site_chain() {
    let pot = Potential::Harmonic;
    let c = gibbs::sample_chain(&LambdaProfile::constant(Lambda::new(0.0, 0.0, 1.0), 1), &pot, &mut gibbs::stream_rng(0, 0, Stream::Init)).unwrap();
    assert_eq!(c.n(), 1);
}
