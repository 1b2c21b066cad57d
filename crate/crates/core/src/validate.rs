//! Self-check suite run by the `validate` command.
//!
//! Each property compares a production code path against an independent
//! reference: exhaustive enumeration for hard fusion, linear-domain
//! marginalization for soft fusion, the closed-form Rayleigh BER, and direct
//! sampling for the sensor error rates.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{hard_detect, sample_channel, transmit};
use crate::error::Result;
use crate::fusion::{
    bits_of, fuse_and, fuse_map_hd, fuse_map_sd, fuse_max_hd, fuse_ml_hd, fuse_n_out_of_m, fuse_or,
    BayesOracle, CostMatrix, FusionDecision, HardLink, HardSideInfo, SoftLink, SoftSideInfo,
};
use crate::model::{
    local_decision, measure, sensor_error_probabilities, HypothesisPriors, ParameterDistribution,
    SafetyBand, SensorProfile,
};

/// Signature of a hard-decision MAP implementation under test.
pub type HardMapRule = fn(&HardSideInfo, &[bool], &CostMatrix) -> Result<FusionDecision>;

#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub seed: u64,
    pub min_sensors: usize,
    pub max_sensors: usize,
    pub draws_per_size: usize,
    pub soft_instances: usize,
    pub ber_trials: u64,
    pub quadrature_samples: u64,
    pub cost: CostMatrix,
    pub hard_map: HardMapRule,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            min_sensors: 2,
            max_sensors: 10,
            draws_per_size: 100,
            soft_instances: 1000,
            ber_trials: 1_000_000,
            quadrature_samples: 1_000_000,
            cost: CostMatrix::default(),
            hard_map: fuse_map_hd,
        }
    }
}

fn timed(name: &'static str, f: impl FnOnce() -> std::result::Result<String, String>) -> PropertyOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    PropertyOutcome {
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Random hard side information with equivalent rates in `(0.001, 0.999)`.
pub fn random_hard_info<R: Rng + ?Sized>(rng: &mut R, m: usize) -> HardSideInfo {
    let links = (0..m)
        .map(|_| HardLink {
            pf_eq: rng.random_range(0.001..0.999),
            pm_eq: rng.random_range(0.001..0.999),
        })
        .collect();
    let priors = HypothesisPriors::new(rng.random_range(0.02..0.98)).expect("prior in range");
    HardSideInfo::new(links, priors).expect("valid links")
}

/// Relative tolerance for treating two expected costs as equal.
pub const COST_TIE_TOL: f64 = 1e-12;

/// The MAP rule under test agrees with the exhaustive oracle on every input
/// (up to exact cost ties) and its Bayes risk is no larger than that of any
/// competing hard rule.
pub fn check_oracle_optimality(opts: &ValidationOptions) -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut inputs = 0usize;
    let mut ties = 0usize;
    for m in opts.min_sensors..=opts.max_sensors {
        let mut bits = vec![false; m];
        for draw in 0..opts.draws_per_size {
            let info = random_hard_info(&mut rng, m);
            let oracle = BayesOracle::new(&info, &opts.cost).map_err(|e| e.to_string())?;
            let mut table = Vec::with_capacity(1 << m);
            for mask in 0..1usize << m {
                bits_of(mask, &mut bits);
                let got = (opts.hard_map)(&info, &bits, &opts.cost)
                    .map_err(|e| e.to_string())?
                    .alarm;
                inputs += 1;
                if got != oracle.optimal_decision(mask) {
                    if oracle.is_tie(mask, COST_TIE_TOL) {
                        ties += 1;
                    } else {
                        return Err(format!("M={m} draw {draw}: decision differs from optimum at input {mask:#b}"));
                    }
                }
                table.push(got);
            }
            let ours = oracle.table_cost(&table);
            let best = oracle.optimal_cost();
            let slack = COST_TIE_TOL * best.abs().max(f64::MIN_POSITIVE);
            if ours > best + slack {
                return Err(format!("M={m} draw {draw}: cost {ours} above optimum {best}"));
            }
            let compare = |label: String, cost: f64| {
                if ours > cost + COST_TIE_TOL * cost.abs() {
                    Err(format!("M={m} draw {draw}: cost {ours} above {label} cost {cost}"))
                } else {
                    Ok(())
                }
            };
            let competitors: [(&str, f64); 5] = [
                ("or", oracle.expected_cost(|b| fuse_or(b).unwrap())),
                ("and", oracle.expected_cost(|b| fuse_and(b).unwrap())),
                ("ml", oracle.expected_cost(|b| fuse_ml_hd(&info, b).unwrap().alarm)),
                ("max", oracle.expected_cost(|b| fuse_max_hd(&info, b).unwrap().alarm)),
                (
                    "unit-cost map",
                    oracle.expected_cost(|b| fuse_map_hd(&info, b, &CostMatrix::UNIT).unwrap().alarm),
                ),
            ];
            for (label, cost) in competitors {
                compare(label.to_owned(), cost)?;
            }
            for n in 1..=m {
                let cost = oracle.expected_cost(|b| fuse_n_out_of_m(b, n).unwrap());
                compare(format!("{n}-out-of-{m}"), cost)?;
            }
        }
    }
    Ok(format!("{inputs} inputs checked, {ties} exact ties"))
}

/// Posterior odds of the soft observations by direct summation over each
/// sensor's unknown bit, in the linear domain.
pub fn direct_soft_log_odds(info: &SoftSideInfo, samples: &[Complex64]) -> f64 {
    let mut num = info.priors.p_h1;
    let mut den = info.priors.p_h0;
    for (l, &r) in info.links.iter().zip(samples) {
        let norm = 1.0 / (std::f64::consts::PI * l.noise_var);
        let given_one = norm * (-(r + l.h).norm_sqr() / l.noise_var).exp();
        let given_zero = norm * (-(r - l.h).norm_sqr() / l.noise_var).exp();
        num *= given_one * (1.0 - l.pm) + given_zero * l.pm;
        den *= given_one * l.pf + given_zero * (1.0 - l.pf);
    }
    num.ln() - den.ln()
}

fn random_soft_instance<R: Rng + ?Sized>(rng: &mut R, m: usize) -> (SoftSideInfo, Vec<Complex64>) {
    let links = (0..m)
        .map(|_| SoftLink {
            pf: rng.random_range(0.01..0.99),
            pm: rng.random_range(0.01..0.99),
            h: Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)),
            noise_var: rng.random_range(0.2..2.0),
        })
        .collect();
    let priors = HypothesisPriors::new(rng.random_range(0.05..0.95)).expect("prior in range");
    let samples = (0..m)
        .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
        .collect();
    (SoftSideInfo::new(links, priors).expect("valid links"), samples)
}

/// Relative error with a unit floor, so values near zero are compared
/// absolutely.
pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

pub fn check_soft_marginalization(opts: &ValidationOptions) -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5d);
    let mut worst = 0.0f64;
    for i in 0..opts.soft_instances {
        let m = rng.random_range(1..=4);
        let (info, samples) = random_soft_instance(&mut rng, m);
        let got = fuse_map_sd(&info, &samples, &CostMatrix::UNIT)
            .map_err(|e| e.to_string())?
            .log_lr;
        let want = direct_soft_log_odds(&info, &samples);
        let err = rel_err(got, want);
        worst = worst.max(err);
        if err > 1e-9 {
            return Err(format!("instance {i}: {got} vs {want}"));
        }
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

/// Average BPSK error rate over Rayleigh fading, `½(1 − √(γ/(1+γ)))`.
pub fn rayleigh_ber(avg_snr: f64) -> f64 {
    0.5 * (1.0 - (avg_snr / (1.0 + avg_snr)).sqrt())
}

/// Simulated bit errors at 10 dB, within 3 standard errors of the closed form.
pub fn check_channel_ber(opts: &ValidationOptions) -> std::result::Result<String, String> {
    let snr = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xbe);
    let mut errors = 0u64;
    for i in 0..opts.ber_trials {
        let bit = i % 2 == 1;
        let ch = sample_channel(snr, &mut rng).map_err(|e| e.to_string())?;
        if hard_detect(&transmit(bit, &ch, &mut rng)).alarm != bit {
            errors += 1;
        }
    }
    let want = rayleigh_ber(snr);
    let got = errors as f64 / opts.ber_trials as f64;
    let se = (want * (1.0 - want) / opts.ber_trials as f64).sqrt();
    let detail = format!("{got:.5} vs {want:.5} ({:.2} se)", (got - want) / se);
    if (got - want).abs() <= 3.0 * se {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Sampled `(pf, pm, n_h0, n_h1)` for one sensor, drawing θ by rejection from
/// the untruncated Gaussian.
pub fn sampled_error_rates<R: Rng + ?Sized>(
    dist: &ParameterDistribution,
    band: &SafetyBand,
    delta: f64,
    samples: u64,
    rng: &mut R,
) -> (f64, f64, u64, u64) {
    let profile = SensorProfile {
        delta,
        gain: 1.0,
        pf: 0.0,
        pm: 0.0,
    };
    let (mut n0, mut n1, mut fa, mut miss) = (0u64, 0u64, 0u64, 0u64);
    let mut drawn = 0;
    while drawn < samples {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        let theta = dist.theta0 + dist.sigma * z;
        if !(dist.theta_min..=dist.theta_max).contains(&theta) {
            continue;
        }
        drawn += 1;
        let alarm = local_decision(measure(theta, &profile, rng), band);
        if local_decision(theta, band) {
            n1 += 1;
            miss += u64::from(!alarm);
        } else {
            n0 += 1;
            fa += u64::from(alarm);
        }
    }
    let rate = |k: u64, n: u64| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    (rate(fa, n0), rate(miss, n1), n0, n1)
}

/// Whether a sampled rate agrees with `want` within `k` standard errors.
/// The standard error uses the reference rate so zero rates are handled.
pub fn within_binomial(got: f64, want: f64, n: u64, k: f64) -> bool {
    if n == 0 {
        return true;
    }
    let se = (want * (1.0 - want) / n as f64).sqrt();
    (got - want).abs() <= k * se + 0.5 / n as f64
}

pub fn check_sensor_quadrature(opts: &ValidationOptions) -> std::result::Result<String, String> {
    let band = SafetyBand::drinking_water_ph();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9a);
    let mut checked = 0;
    for &delta in &[0.1, 0.5] {
        for &sigma in &[1.0, 3.0] {
            let dist = ParameterDistribution::ph(sigma).map_err(|e| e.to_string())?;
            let q = sensor_error_probabilities(&dist, &band, delta).map_err(|e| e.to_string())?;
            let (pf, pm, n0, n1) = sampled_error_rates(&dist, &band, delta, opts.quadrature_samples, &mut rng);
            if !within_binomial(pf, q.pf, n0, 3.0) || !within_binomial(pm, q.pm, n1, 3.0) {
                return Err(format!(
                    "delta={delta} sigma={sigma}: quadrature ({:.5}, {:.5}) vs sampled ({pf:.5}, {pm:.5})",
                    q.pf, q.pm
                ));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} grid points"))
}

/// Runs every property and returns one outcome each, in a fixed order.
pub fn run_validation(opts: &ValidationOptions) -> Vec<PropertyOutcome> {
    vec![
        timed("hard MAP matches exhaustive oracle", || check_oracle_optimality(opts)),
        timed("soft MAP matches direct marginalization", || check_soft_marginalization(opts)),
        timed("Rayleigh BPSK error rate", || check_channel_ber(opts)),
        timed("sensor error rates match sampling", || check_sensor_quadrature(opts)),
    ]
}
