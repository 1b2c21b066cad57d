//! Parameter model against closed forms and direct sampling.

use lfc_core::{
    hypothesis_priors, sensor_error_probabilities, ParameterDistribution, SafetyBand,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn band() -> SafetyBand {
    SafetyBand::drinking_water_ph()
}

#[test]
fn truncated_sampler_moments() {
    // σ = 6 puts real mass on both truncation edges.
    let dist = ParameterDistribution::ph(6.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 1_000_000;
    let draws: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    assert!((mean - 7.0).abs() < 3.0 * (var / n as f64).sqrt(), "mean {mean}");

    // Variance of N(0, 6²) truncated to ±7/6 standard units:
    // σ²(1 − 2aφ(a) / (2Φ(a) − 1)).
    let a: f64 = 7.0 / 6.0;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let want = 36.0 * (1.0 - 2.0 * a * phi(a) / simpson(phi, -a, a));
    assert!((var - want).abs() / want < 5e-3, "variance {var} vs {want}");
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 10_000;
    let h = (hi - lo) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h))
        .sum();
    (f(lo) + f(hi) + inner) * h / 3.0
}

#[test]
fn sampler_matches_rejection_histogram() {
    let dist = ParameterDistribution::ph(3.0).unwrap();
    let normal = Normal::new(7.0, 3.0).unwrap();
    let mut a = ChaCha8Rng::seed_from_u64(1);
    let mut b = ChaCha8Rng::seed_from_u64(2);
    let n = 400_000;
    let mut ours = [0u64; 14];
    let mut reference = [0u64; 14];
    for _ in 0..n {
        ours[(dist.sample(&mut a).floor() as usize).min(13)] += 1;
        let theta = loop {
            let t: f64 = normal.sample(&mut b);
            if (0.0..=14.0).contains(&t) {
                break t;
            }
        };
        reference[(theta.floor() as usize).min(13)] += 1;
    }
    for bin in 0..14 {
        let p = reference[bin] as f64 / n as f64;
        let q = ours[bin] as f64 / n as f64;
        let se = (2.0 * p * (1.0 - p) / n as f64).sqrt().max(1e-6);
        assert!((p - q).abs() < 4.0 * se, "bin {bin}: {q} vs {p}");
    }
}

#[test]
fn prior_is_monotone_in_spread() {
    let mut last = 1.0;
    for i in 0..200 {
        let sigma = 0.05 * 1.05f64.powi(i);
        let p = hypothesis_priors(&ParameterDistribution::ph(sigma).unwrap(), &band()).unwrap();
        assert!(p.p_h0 <= last + 1e-15, "sigma {sigma}");
        assert!((p.p_h0 + p.p_h1 - 1.0).abs() < 1e-15);
        last = p.p_h0;
    }
    assert!(last < 0.15);
}

#[test]
fn prior_limits() {
    let tight = hypothesis_priors(&ParameterDistribution::ph(0.01).unwrap(), &band()).unwrap();
    assert_eq!(tight.p_h0, 1.0);
    let flat = hypothesis_priors(&ParameterDistribution::ph(1e4).unwrap(), &band()).unwrap();
    assert!((flat.p_h0 - 1.0 / 7.0).abs() < 1e-6);
    // One standard deviation: Φ(1.5) − Φ(−0.5) over Φ(7) − Φ(−7).
    let unit = hypothesis_priors(&ParameterDistribution::ph(1.0).unwrap(), &band()).unwrap();
    assert!((unit.p_h0 - 0.624_655_260_006_75).abs() < 1e-9, "{}", unit.p_h0);
}

#[test]
fn sensor_rates_match_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for &(delta, sigma) in &[(0.1, 1.0), (0.3, 2.0), (0.8, 3.2)] {
        let dist = ParameterDistribution::ph(sigma).unwrap();
        let q = sensor_error_probabilities(&dist, &band(), delta).unwrap();
        let normal = Normal::new(7.0, sigma).unwrap();
        let (mut n0, mut n1, mut fa, mut miss) = (0u64, 0u64, 0u64, 0u64);
        for _ in 0..1_000_000 {
            let theta = loop {
                let t: f64 = normal.sample(&mut rng);
                if (0.0..=14.0).contains(&t) {
                    break t;
                }
            };
            let measured = theta + rng.random_range(-delta..=delta);
            let alarm = !(6.5..=8.5).contains(&measured);
            if (6.5..=8.5).contains(&theta) {
                n0 += 1;
                fa += u64::from(alarm);
            } else {
                n1 += 1;
                miss += u64::from(!alarm);
            }
        }
        for (k, n, p) in [(fa, n0, q.pf), (miss, n1, q.pm)] {
            let est = k as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((est - p).abs() < 4.0 * se, "delta {delta} sigma {sigma}: {est} vs {p}");
        }
    }
}

#[test]
fn sensor_rates_monotone_in_delta() {
    for &sigma in &[1.0, 1.8, 3.16] {
        let dist = ParameterDistribution::ph(sigma).unwrap();
        let mut last = (0.0, 0.0);
        for i in 0..=40 {
            let r = sensor_error_probabilities(&dist, &band(), i as f64 * 0.025).unwrap();
            assert!(r.pf >= last.0 - 1e-12 && r.pm >= last.1 - 1e-12, "sigma {sigma}, step {i}");
            last = (r.pf, r.pm);
        }
    }
}
