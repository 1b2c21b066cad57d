//! Fusion rules applied at the local fusion center.
//!
//! Counting rules (OR, AND, n-out-of-M) look only at the hard-detected bits.
//! The likelihood-ratio rules (MAP, ML, MAX) work in the log domain: a
//! decision is the comparison of `log ζ` against the log of the threshold in
//! force, with ties resolved toward an alarm.

mod oracle;

pub use oracle::{bayes_oracle_hd, bits_of, BayesOracle, OracleTable, MAX_ORACLE_SENSORS};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::LinkStats;
use crate::error::{Error, Result};
use crate::model::HypothesisPriors;
use crate::numeric::log_sum_exp2;

/// Probabilities are clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]` before any
/// logarithm is taken.
pub const PROB_FLOOR: f64 = 1e-12;

#[inline]
fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

fn check_prob(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be in [0, 1], got {p}")))
    }
}

/// Bayes costs; `cij` is the cost of deciding `Hi` when `Hj` holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    pub c00: f64,
    pub c01: f64,
    pub c10: f64,
    pub c11: f64,
}

impl CostMatrix {
    pub const UNIT: CostMatrix = CostMatrix {
        c00: 0.0,
        c01: 1.0,
        c10: 1.0,
        c11: 0.0,
    };

    pub fn new(c00: f64, c01: f64, c10: f64, c11: f64) -> Result<Self> {
        let cost = Self { c00, c01, c10, c11 };
        cost.validate()?;
        Ok(cost)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.c00, self.c01, self.c10, self.c11];
        if all.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::param("cost", "costs must be finite and non-negative"));
        }
        if !(self.c01 > self.c11) {
            return Err(Error::param("cost", "need c01 > c11 (a miss must cost more than a hit)"));
        }
        if !(self.c10 > self.c00) {
            return Err(Error::param(
                "cost",
                "need c10 > c00 (a false alarm must cost more than a correct rejection)",
            ));
        }
        Ok(())
    }

    /// Cost of deciding `decide` when `truth` holds.
    #[inline]
    pub fn cost(&self, decide: bool, truth: bool) -> f64 {
        match (decide, truth) {
            (false, false) => self.c00,
            (false, true) => self.c01,
            (true, false) => self.c10,
            (true, true) => self.c11,
        }
    }

    /// Relabel H0 and H1.
    pub fn swapped(&self) -> Self {
        Self {
            c00: self.c11,
            c01: self.c10,
            c10: self.c01,
            c11: self.c00,
        }
    }
}

/// Missed detections cost ten times a false alarm; correct decisions are free.
impl Default for CostMatrix {
    fn default() -> Self {
        Self {
            c00: 0.0,
            c01: 10.0,
            c10: 1.0,
            c11: 0.0,
        }
    }
}

/// Likelihood-ratio threshold minimizing the Bayes risk, `(c10 − c00)/(c01 − c11)`.
pub fn modified_threshold(cost: &CostMatrix) -> Result<f64> {
    cost.validate()?;
    Ok((cost.c10 - cost.c00) / (cost.c01 - cost.c11))
}

fn log_threshold(cost: &CostMatrix) -> Result<f64> {
    modified_threshold(cost).map(f64::ln)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionDecision {
    pub alarm: bool,
    /// `log ζ` (including the prior ratio for MAP rules).
    pub log_lr: f64,
    pub log_threshold: f64,
}

impl FusionDecision {
    #[inline]
    fn compare(log_lr: f64, log_threshold: f64) -> Self {
        Self {
            alarm: log_lr >= log_threshold,
            log_lr,
            log_threshold,
        }
    }
}

/// Rates seen by the LFC for a hard-detected bit from one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardLink {
    pub pf_eq: f64,
    pub pm_eq: f64,
}

impl From<LinkStats> for HardLink {
    fn from(s: LinkStats) -> Self {
        Self {
            pf_eq: s.pf_eq,
            pm_eq: s.pm_eq,
        }
    }
}

impl HardLink {
    /// `ln β_m` for an alarm bit, `ln α_m` otherwise.
    #[inline]
    pub fn log_weight(&self, alarm: bool) -> f64 {
        let pf = clamp_prob(self.pf_eq);
        let pm = clamp_prob(self.pm_eq);
        if alarm {
            (1.0 - pm).ln() - pf.ln()
        } else {
            pm.ln() - (1.0 - pf).ln()
        }
    }
}

/// Per-sensor information available to the soft rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftLink {
    pub pf: f64,
    pub pm: f64,
    #[serde(with = "crate::serde_complex")]
    pub h: Complex64,
    pub noise_var: f64,
}

impl SoftLink {
    /// Log of this sensor's factor in ζ^SD for received sample `r`.
    pub fn log_factor(&self, r: Complex64) -> f64 {
        // x_m = 1 is sent as -h, x_m = 0 as +h.
        let log_l1 = -(r + self.h).norm_sqr() / self.noise_var;
        let log_l0 = -(r - self.h).norm_sqr() / self.noise_var;
        soft_log_factor(log_l1, log_l0, self.pf, self.pm)
    }
}

/// `ln` of `[L1(1 − pm) + L0·pm] / [L1·pf + L0(1 − pf)]` given
/// `log_l1 = ln P(r | x_m = 1)` and `log_l0 = ln P(r | x_m = 0)`, each known
/// only up to a common additive constant.
#[inline]
pub fn soft_log_factor(log_l1: f64, log_l0: f64, pf: f64, pm: f64) -> f64 {
    let pf = clamp_prob(pf);
    let pm = clamp_prob(pm);
    let num = log_sum_exp2(log_l1 + (1.0 - pm).ln(), log_l0 + pm.ln());
    let den = log_sum_exp2(log_l1 + pf.ln(), log_l0 + (1.0 - pf).ln());
    num - den
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardSideInfo {
    pub links: Vec<HardLink>,
    pub priors: HypothesisPriors,
}

impl HardSideInfo {
    pub fn new(links: Vec<HardLink>, priors: HypothesisPriors) -> Result<Self> {
        for l in &links {
            check_prob("pf_eq", l.pf_eq)?;
            check_prob("pm_eq", l.pm_eq)?;
        }
        Ok(Self { links, priors })
    }

    /// Identical links for every sensor.
    pub fn uniform(m: usize, link: HardLink, priors: HypothesisPriors) -> Result<Self> {
        Self::new(vec![link; m], priors)
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    fn check_bits(&self, bits: &[bool]) -> Result<()> {
        if bits.len() != self.links.len() {
            return Err(Error::LengthMismatch {
                what: "bits",
                got: bits.len(),
                expected: self.links.len(),
            });
        }
        Ok(())
    }

    /// `Σ ln(β_m or α_m)`, the hard log-likelihood ratio without priors.
    pub fn log_likelihood_ratio(&self, bits: &[bool]) -> Result<f64> {
        self.check_bits(bits)?;
        Ok(self
            .links
            .iter()
            .zip(bits)
            .map(|(link, &b)| link.log_weight(b))
            .sum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftSideInfo {
    pub links: Vec<SoftLink>,
    pub priors: HypothesisPriors,
}

impl SoftSideInfo {
    pub fn new(links: Vec<SoftLink>, priors: HypothesisPriors) -> Result<Self> {
        for l in &links {
            check_prob("pf", l.pf)?;
            check_prob("pm", l.pm)?;
            if !(l.noise_var > 0.0) {
                return Err(Error::param("noise_var", format!("must be positive, got {}", l.noise_var)));
            }
        }
        Ok(Self { links, priors })
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    fn check_samples(&self, samples: &[Complex64]) -> Result<()> {
        if samples.len() != self.links.len() {
            return Err(Error::LengthMismatch {
                what: "samples",
                got: samples.len(),
                expected: self.links.len(),
            });
        }
        Ok(())
    }

    /// Per-sensor soft log factors.
    pub fn log_factors(&self, samples: &[Complex64]) -> Result<Vec<f64>> {
        self.check_samples(samples)?;
        Ok(self
            .links
            .iter()
            .zip(samples)
            .map(|(link, &r)| link.log_factor(r))
            .collect())
    }

    pub fn log_likelihood_ratio(&self, samples: &[Complex64]) -> Result<f64> {
        self.check_samples(samples)?;
        Ok(self
            .links
            .iter()
            .zip(samples)
            .map(|(link, &r)| link.log_factor(r))
            .sum())
    }
}

pub fn fuse_or(bits: &[bool]) -> Result<bool> {
    if bits.is_empty() {
        return Err(Error::EmptyInput("bits"));
    }
    Ok(bits.iter().any(|&b| b))
}

pub fn fuse_and(bits: &[bool]) -> Result<bool> {
    if bits.is_empty() {
        return Err(Error::EmptyInput("bits"));
    }
    Ok(bits.iter().all(|&b| b))
}

/// Alarm iff at least `n` of the `M` bits are set.
pub fn fuse_n_out_of_m(bits: &[bool], n: usize) -> Result<bool> {
    if bits.is_empty() {
        return Err(Error::EmptyInput("bits"));
    }
    if n == 0 || n > bits.len() {
        return Err(Error::param(
            "n",
            format!("must be in 1..={}, got {n}", bits.len()),
        ));
    }
    Ok(bits.iter().filter(|&&b| b).count() >= n)
}

/// Hard-decision MAP fusion with the Bayes-cost threshold.
pub fn fuse_map_hd(
    info: &HardSideInfo,
    bits: &[bool],
    cost: &CostMatrix,
) -> Result<FusionDecision> {
    let llr = info.log_likelihood_ratio(bits)?;
    Ok(FusionDecision::compare(
        llr + info.priors.log_ratio(),
        log_threshold(cost)?,
    ))
}

/// Soft-decision MAP fusion on the received complex samples.
pub fn fuse_map_sd(
    info: &SoftSideInfo,
    samples: &[Complex64],
    cost: &CostMatrix,
) -> Result<FusionDecision> {
    let llr = info.log_likelihood_ratio(samples)?;
    Ok(FusionDecision::compare(
        llr + info.priors.log_ratio(),
        log_threshold(cost)?,
    ))
}

/// Maximum-likelihood fusion on hard bits: the MAP rule with a flat prior and threshold 1.
pub fn fuse_ml_hd(info: &HardSideInfo, bits: &[bool]) -> Result<FusionDecision> {
    Ok(FusionDecision::compare(info.log_likelihood_ratio(bits)?, 0.0))
}

pub fn fuse_ml_sd(info: &SoftSideInfo, samples: &[Complex64]) -> Result<FusionDecision> {
    Ok(FusionDecision::compare(info.log_likelihood_ratio(samples)?, 0.0))
}

/// Follow the single sensor whose factor has the largest `|log LR|`,
/// breaking magnitude ties toward the alarm side.
fn most_reliable(factors: impl Iterator<Item = f64>) -> Option<f64> {
    factors.fold(None, |best, f| match best {
        None => Some(f),
        Some(b) if f.abs() > b.abs() || (f.abs() == b.abs() && f > b) => Some(f),
        keep => keep,
    })
}

/// MAX rule on soft observations: decide with the most confident sensor alone
/// against the prior-ratio threshold.
pub fn fuse_max(info: &SoftSideInfo, samples: &[Complex64]) -> Result<FusionDecision> {
    if info.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let factors = info.log_factors(samples)?;
    let best = most_reliable(factors.into_iter()).expect("nonempty");
    Ok(FusionDecision::compare(best + info.priors.log_ratio(), 0.0))
}

/// MAX rule on hard bits, using the per-sensor weights `ln β_m` / `ln α_m`.
pub fn fuse_max_hd(info: &HardSideInfo, bits: &[bool]) -> Result<FusionDecision> {
    if info.is_empty() {
        return Err(Error::EmptyInput("bits"));
    }
    info.check_bits(bits)?;
    let best = most_reliable(info.links.iter().zip(bits).map(|(l, &b)| l.log_weight(b)))
        .expect("nonempty");
    Ok(FusionDecision::compare(best + info.priors.log_ratio(), 0.0))
}
