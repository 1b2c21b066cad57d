//! The monitored-parameter model: a truncated Gaussian for the true value,
//! a safety band, the linear sensor with bounded uniform error, and the
//! resulting per-sensor false-alarm and missed-detection probabilities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    integrate, normal_cdf, normal_mass_between, normal_pdf, normal_quantile, normal_sf,
    QuadratureOptions,
};

/// pH scale used by the drinking-water case study.
pub const PH_CENTER: f64 = 7.0;
pub const PH_MIN: f64 = 0.0;
pub const PH_MAX: f64 = 14.0;

/// Gaussian with mean `theta0` and standard deviation `sigma`, truncated to
/// `[theta_min, theta_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterDistribution {
    pub theta0: f64,
    pub sigma: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl ParameterDistribution {
    pub fn new(theta0: f64, sigma: f64, theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(theta0.is_finite() && theta_min.is_finite() && theta_max.is_finite()) {
            return Err(Error::param("theta", "support and center must be finite"));
        }
        if !(theta_min < theta0 && theta0 < theta_max) {
            return Err(Error::param(
                "theta0",
                format!("must lie strictly inside ({theta_min}, {theta_max}), got {theta0}"),
            ));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(Self {
            theta0,
            sigma,
            theta_min,
            theta_max,
        })
    }

    /// pH distribution centered at 7 on `[0, 14]`.
    pub fn ph(sigma: f64) -> Result<Self> {
        Self::new(PH_CENTER, sigma, PH_MIN, PH_MAX)
    }

    #[inline]
    fn standardize(&self, theta: f64) -> f64 {
        (theta - self.theta0) / self.sigma
    }

    /// Untruncated Gaussian mass on the support.
    fn support_mass(&self) -> f64 {
        normal_mass_between(self.standardize(self.theta_min), self.standardize(self.theta_max))
    }

    /// Truncated density at `theta` (zero outside the support).
    pub fn density(&self, theta: f64) -> f64 {
        if theta < self.theta_min || theta > self.theta_max {
            return 0.0;
        }
        normal_pdf(self.standardize(theta)) / (self.sigma * self.support_mass())
    }

    /// Draw θ by inverting the truncated CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lo = self.standardize(self.theta_min);
        let hi = self.standardize(self.theta_max);
        let u: f64 = rng.random();
        // Work in whichever tail keeps the CDF values away from 1.
        let z = if lo > 0.0 {
            let (a, b) = (normal_sf(lo), normal_sf(hi));
            -normal_quantile(b + u * (a - b))
        } else {
            let (a, b) = (normal_cdf(lo), normal_cdf(hi));
            normal_quantile(a + u * (b - a))
        };
        let z = if z.is_finite() { z.clamp(lo, hi) } else { 0.0_f64.clamp(lo, hi) };
        (self.theta0 + self.sigma * z).clamp(self.theta_min, self.theta_max)
    }
}

/// `sample_theta` as a free function.
pub fn sample_theta<R: Rng + ?Sized>(dist: &ParameterDistribution, rng: &mut R) -> f64 {
    dist.sample(rng)
}

/// Closed safety interval `[tau_min, tau_max]`; values on the boundary are safe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyBand {
    pub tau_min: f64,
    pub tau_max: f64,
}

impl SafetyBand {
    pub fn new(tau_min: f64, tau_max: f64) -> Result<Self> {
        if !(tau_min.is_finite() && tau_max.is_finite() && tau_min < tau_max) {
            return Err(Error::param(
                "tau",
                format!("need finite tau_min < tau_max, got [{tau_min}, {tau_max}]"),
            ));
        }
        Ok(Self { tau_min, tau_max })
    }

    /// Drinking-water pH limits, 6.5 to 8.5.
    pub fn drinking_water_ph() -> Self {
        Self {
            tau_min: 6.5,
            tau_max: 8.5,
        }
    }

    #[inline]
    pub fn contains(&self, value: f64) -> bool {
        value >= self.tau_min && value <= self.tau_max
    }

    pub fn check_within(&self, dist: &ParameterDistribution) -> Result<()> {
        if self.tau_min < dist.theta_min || self.tau_max > dist.theta_max {
            return Err(Error::param(
                "tau",
                format!(
                    "band [{}, {}] exceeds support [{}, {}]",
                    self.tau_min, self.tau_max, dist.theta_min, dist.theta_max
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisPriors {
    pub p_h0: f64,
    pub p_h1: f64,
}

impl HypothesisPriors {
    pub fn new(p_h0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_h0) {
            return Err(Error::param("p_h0", format!("must be in [0, 1], got {p_h0}")));
        }
        Ok(Self {
            p_h0,
            p_h1: 1.0 - p_h0,
        })
    }

    pub fn equal() -> Self {
        Self { p_h0: 0.5, p_h1: 0.5 }
    }

    /// `ln(P(H1) / P(H0))`, possibly infinite.
    #[inline]
    pub fn log_ratio(&self) -> f64 {
        self.p_h1.ln() - self.p_h0.ln()
    }

    /// Swap the roles of the two hypotheses.
    pub fn swapped(&self) -> Self {
        Self {
            p_h0: self.p_h1,
            p_h1: self.p_h0,
        }
    }
}

/// Probability that the parameter lies inside (H0) or outside (H1) the band.
pub fn hypothesis_priors(
    dist: &ParameterDistribution,
    band: &SafetyBand,
) -> Result<HypothesisPriors> {
    band.check_within(dist)?;
    let support = dist.support_mass();
    let inside = normal_mass_between(dist.standardize(band.tau_min), dist.standardize(band.tau_max));
    if !(support > 0.0 && support.is_finite()) {
        return Err(Error::NumericalDegeneracy(format!(
            "truncation mass underflows for sigma = {:e}",
            dist.sigma
        )));
    }
    HypothesisPriors::new((inside / support).clamp(0.0, 1.0))
}

/// One sensor: error bound, calibration gain, and its local error rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorProfile {
    pub delta: f64,
    pub gain: f64,
    pub pf: f64,
    pub pm: f64,
}

impl SensorProfile {
    /// Calibrated (`gain = 1`) sensor with error bound `delta`, rates
    /// computed for the given distribution and band.
    pub fn calibrated(
        dist: &ParameterDistribution,
        band: &SafetyBand,
        delta: f64,
    ) -> Result<Self> {
        let rates = sensor_error_probabilities_with_gain(dist, band, delta, 1.0)?;
        Ok(Self {
            delta,
            gain: 1.0,
            pf: rates.pf,
            pm: rates.pm,
        })
    }
}

/// Measured value `gain·θ + e`, with `e` uniform on `[-delta, delta]`.
pub fn measure<R: Rng + ?Sized>(theta: f64, profile: &SensorProfile, rng: &mut R) -> f64 {
    let error = if profile.delta > 0.0 {
        rng.random_range(-profile.delta..=profile.delta)
    } else {
        0.0
    };
    profile.gain * theta + error
}

/// Alarm (`true`) iff the measurement falls strictly outside the band.
#[inline]
pub fn local_decision(measured: f64, band: &SafetyBand) -> bool {
    !band.contains(measured)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorErrorRates {
    pub pf: f64,
    pub pm: f64,
}

/// `P(x_m = 1 | x = 0)` and `P(x_m = 0 | x = 1)` for a calibrated sensor.
pub fn sensor_error_probabilities(
    dist: &ParameterDistribution,
    band: &SafetyBand,
    delta: f64,
) -> Result<SensorErrorRates> {
    sensor_error_probabilities_with_gain(dist, band, delta, 1.0)
}

/// Conditional error rates for a sensor with arbitrary positive gain.
///
/// Integrates the Gaussian density over θ against the exact probability that
/// the measurement lands outside the band given θ, which is piecewise linear
/// in θ for uniform sensing error. If a hypothesis carries zero mass its
/// conditional rate is reported as 0.
pub fn sensor_error_probabilities_with_gain(
    dist: &ParameterDistribution,
    band: &SafetyBand,
    delta: f64,
    gain: f64,
) -> Result<SensorErrorRates> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be finite and >= 0, got {delta}")));
    }
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::param("gain", format!("must be positive, got {gain}")));
    }
    band.check_within(dist)?;

    let SafetyBand { tau_min, tau_max } = *band;
    let p_outside = move |theta: f64| -> f64 {
        let measured = gain * theta;
        if delta == 0.0 {
            return if band.contains(measured) { 0.0 } else { 1.0 };
        }
        let width = 2.0 * delta;
        let below = ((tau_min - measured + delta) / width).clamp(0.0, 1.0);
        let above = ((measured + delta - tau_max) / width).clamp(0.0, 1.0);
        (below + above).min(1.0)
    };
    let density = |theta: f64| normal_pdf(dist.standardize(theta)) / dist.sigma;

    let s = dist.sigma;
    let breakpoints = [
        (tau_min - delta) / gain,
        (tau_min + delta) / gain,
        (tau_max - delta) / gain,
        (tau_max + delta) / gain,
        tau_min,
        tau_max,
        dist.theta0,
        dist.theta0 - 4.0 * s,
        dist.theta0 + 4.0 * s,
        dist.theta0 - 10.0 * s,
        dist.theta0 + 10.0 * s,
    ];

    let z = |t: f64| dist.standardize(t);
    let mass_safe = normal_mass_between(z(tau_min), z(tau_max));
    let mass_unsafe =
        normal_mass_between(z(dist.theta_min), z(tau_min)) + normal_mass_between(z(tau_max), z(dist.theta_max));

    let conditional = |mass: f64, pieces: &[(f64, f64)], integrand: &dyn Fn(f64) -> f64| -> Result<f64> {
        if mass <= 0.0 {
            return Ok(0.0);
        }
        let opts = QuadratureOptions {
            abs_tol: 1e-11 * mass,
            rel_tol: 1e-11,
            ..QuadratureOptions::default()
        };
        let mut total = 0.0;
        for &(lo, hi) in pieces {
            total += integrate(integrand, lo, hi, &breakpoints, opts)?;
        }
        Ok((total / mass).clamp(0.0, 1.0))
    };

    let false_alarm = |t: f64| density(t) * p_outside(t);
    let missed = |t: f64| density(t) * (1.0 - p_outside(t));
    let pf = conditional(mass_safe, &[(tau_min, tau_max)], &false_alarm)?;
    let pm = conditional(
        mass_unsafe,
        &[(dist.theta_min, tau_min), (tau_max, dist.theta_max)],
        &missed,
    )?;
    Ok(SensorErrorRates { pf, pm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn rejects_invalid_distributions() {
        assert!(ParameterDistribution::new(7.0, 0.0, 0.0, 14.0).is_err());
        assert!(ParameterDistribution::new(0.0, 1.0, 0.0, 14.0).is_err());
        assert!(ParameterDistribution::new(7.0, f64::NAN, 0.0, 14.0).is_err());
        assert!(SafetyBand::new(8.5, 6.5).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        for &sigma in &[0.05, 1.0, 3.0, 50.0] {
            let d = ParameterDistribution::ph(sigma).unwrap();
            let total = integrate(|t| d.density(t), 0.0, 14.0, &[7.0], QuadratureOptions::default())
                .unwrap();
            assert!((total - 1.0).abs() < 1e-9, "sigma {sigma}: {total}");
        }
    }

    #[test]
    fn tiny_sigma_samples_collapse_to_center() {
        let d = ParameterDistribution::ph(1e-12).unwrap();
        let mut r = rng(1);
        for _ in 0..1000 {
            assert!((d.sample(&mut r) - 7.0).abs() < 1e-9);
        }
    }

    #[test]
    fn samples_stay_in_support() {
        let d = ParameterDistribution::new(1.0, 5.0, 0.5, 14.0).unwrap();
        let mut r = rng(2);
        for _ in 0..10_000 {
            let v = d.sample(&mut r);
            assert!((0.5..=14.0).contains(&v));
        }
    }

    #[test]
    fn priors_limits() {
        let band = SafetyBand::drinking_water_ph();
        let narrow = hypothesis_priors(&ParameterDistribution::ph(1e-6).unwrap(), &band).unwrap();
        assert!((narrow.p_h0 - 1.0).abs() < 1e-12);
        let wide = hypothesis_priors(&ParameterDistribution::ph(1e3).unwrap(), &band).unwrap();
        assert!((wide.p_h0 - 2.0 / 14.0).abs() < 1e-4);
        assert_eq!(wide.p_h0 + wide.p_h1, 1.0);
    }

    #[test]
    fn priors_reject_band_outside_support() {
        let d = ParameterDistribution::new(7.0, 1.0, 6.0, 8.0).unwrap();
        assert!(hypothesis_priors(&d, &SafetyBand::drinking_water_ph()).is_err());
    }

    #[test]
    fn priors_report_degenerate_truncation() {
        let d = ParameterDistribution::new(7.0, 1e306, 0.0, 14.0).unwrap();
        let err = hypothesis_priors(&d, &SafetyBand::new(6.5, 8.5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NumericalDegeneracy(_)));
    }

    #[test]
    fn measurement_support() {
        let mut r = rng(3);
        let exact = SensorProfile { delta: 0.0, gain: 1.0, pf: 0.0, pm: 0.0 };
        assert_eq!(measure(7.0, &exact, &mut r), 7.0);
        let noisy = SensorProfile { delta: 0.5, ..exact };
        for _ in 0..1000 {
            let v = measure(7.0, &noisy, &mut r);
            assert!((6.5..=7.5).contains(&v));
        }
        let near = SensorProfile { delta: 0.2, ..exact };
        let band = SafetyBand::drinking_water_ph();
        let alarms = (0..10_000)
            .filter(|_| local_decision(measure(8.4, &near, &mut r), &band))
            .count();
        // Three quarters of [8.2, 8.6] is safe.
        assert!((alarms as f64 / 10_000.0 - 0.25).abs() < 0.03);
    }

    #[test]
    fn local_decision_boundaries() {
        let band = SafetyBand::drinking_water_ph();
        assert!(!local_decision(7.0, &band));
        assert!(local_decision(8.6, &band));
        assert!(local_decision(6.4, &band));
        assert!(!local_decision(6.5, &band));
        assert!(!local_decision(8.5, &band));
    }

    #[test]
    fn perfect_sensor_never_errs() {
        let d = ParameterDistribution::ph(1.0).unwrap();
        let r = sensor_error_probabilities(&d, &SafetyBand::drinking_water_ph(), 0.0).unwrap();
        assert_eq!((r.pf, r.pm), (0.0, 0.0));
    }

    #[test]
    fn error_rates_grow_with_delta() {
        let band = SafetyBand::drinking_water_ph();
        for &sigma in &[0.5, 1.0, 2.0, 3.16] {
            let d = ParameterDistribution::ph(sigma).unwrap();
            let mut last = (0.0, 0.0);
            for &delta in &[0.01, 0.1, 0.2, 0.5, 1.0] {
                let r = sensor_error_probabilities(&d, &band, delta).unwrap();
                assert!(r.pf > last.0 && r.pm > last.1, "sigma {sigma} delta {delta}");
                assert!(r.pf <= 1.0 && r.pm <= 1.0);
                last = (r.pf, r.pm);
            }
        }
    }

    #[test]
    fn small_delta_rates_vanish() {
        let d = ParameterDistribution::ph(1.0).unwrap();
        let r = sensor_error_probabilities(&d, &SafetyBand::drinking_water_ph(), 1e-6).unwrap();
        assert!(r.pf < 1e-6 && r.pm < 1e-6);
    }

    #[test]
    fn calibrated_profile_uses_unit_gain() {
        let d = ParameterDistribution::ph(1.0).unwrap();
        let band = SafetyBand::drinking_water_ph();
        let p = SensorProfile::calibrated(&d, &band, 0.3).unwrap();
        let r = sensor_error_probabilities(&d, &band, 0.3).unwrap();
        assert_eq!(p.gain, 1.0);
        assert_eq!((p.pf, p.pm), (r.pf, r.pm));
        assert!(sensor_error_probabilities(&d, &band, -0.1).is_err());
    }
}
