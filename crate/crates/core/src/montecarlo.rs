//! End-to-end trials and contamination sweeps.
//!
//! One trial draws the true parameter, lets every sensor measure and decide,
//! sends the decisions over independently faded links, and applies every
//! configured fusion rule to the same received data. Per grid point the
//! trials are independent and are run in parallel; results are reduced as
//! integer counts, so the output never depends on scheduling.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{
    bit_error_prob, db_to_linear, equivalent_probabilities, hard_detect, sample_channel, transmit,
};
use crate::error::{Error, Result};
use crate::fusion::{
    fuse_and, fuse_map_hd, fuse_map_sd, fuse_max, fuse_max_hd, fuse_ml_hd, fuse_ml_sd,
    fuse_n_out_of_m, fuse_or, CostMatrix, HardLink, HardSideInfo, SoftLink, SoftSideInfo,
};
use crate::model::{
    hypothesis_priors, local_decision, measure, HypothesisPriors, ParameterDistribution,
    SafetyBand, SensorProfile, PH_CENTER, PH_MAX, PH_MIN,
};
use crate::rng::{substream, Consumer, TrialStreams, SCENARIO_SCOPE};

/// Fusion rules a scenario can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Or,
    And,
    NOutOfM(usize),
    /// MAX rule on soft samples.
    Max,
    /// MAX rule on hard-detected bits.
    MaxHd,
    MlHd,
    MlSd,
    MapHd,
    MapSd,
    ModifiedMapHd,
    ModifiedMapSd,
}

impl Rule {
    /// Rules compared in the standard sweep.
    pub fn default_set() -> Vec<Rule> {
        vec![
            Rule::MapHd,
            Rule::MapSd,
            Rule::ModifiedMapHd,
            Rule::ModifiedMapSd,
            Rule::MlHd,
            Rule::MlSd,
            Rule::Max,
        ]
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Or => f.write_str("or"),
            Rule::And => f.write_str("and"),
            Rule::NOutOfM(n) => write!(f, "n-of-m:{n}"),
            Rule::Max => f.write_str("max"),
            Rule::MaxHd => f.write_str("max-hd"),
            Rule::MlHd => f.write_str("ml-hd"),
            Rule::MlSd => f.write_str("ml-sd"),
            Rule::MapHd => f.write_str("map-hd"),
            Rule::MapSd => f.write_str("map-sd"),
            Rule::ModifiedMapHd => f.write_str("mod-map-hd"),
            Rule::ModifiedMapSd => f.write_str("mod-map-sd"),
        }
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rule = match s.trim() {
            "or" => Rule::Or,
            "and" => Rule::And,
            "max" => Rule::Max,
            "max-hd" => Rule::MaxHd,
            "ml-hd" => Rule::MlHd,
            "ml-sd" => Rule::MlSd,
            "map-hd" => Rule::MapHd,
            "map-sd" => Rule::MapSd,
            "mod-map-hd" => Rule::ModifiedMapHd,
            "mod-map-sd" => Rule::ModifiedMapSd,
            other => match other.strip_prefix("n-of-m:").map(str::parse::<usize>) {
                Some(Ok(n)) => Rule::NOutOfM(n),
                _ => {
                    return Err(Error::InvalidConfig {
                        field: "rules".into(),
                        reason: format!("unknown rule `{other}`"),
                    })
                }
            },
        };
        Ok(rule)
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameter model and safety band shared by every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterModel {
    pub theta0: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub band: SafetyBand,
}

impl Default for ParameterModel {
    fn default() -> Self {
        Self {
            theta0: PH_CENTER,
            theta_min: PH_MIN,
            theta_max: PH_MAX,
            band: SafetyBand::drinking_water_ph(),
        }
    }
}

impl ParameterModel {
    /// Distribution at contamination level `db`, with `σ² = 10^(db/10)`.
    pub fn distribution(&self, contamination_db: f64) -> Result<ParameterDistribution> {
        ParameterDistribution::new(
            self.theta0,
            db_to_linear(contamination_db).sqrt(),
            self.theta_min,
            self.theta_max,
        )
    }
}

/// A fully resolved sweep definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub m_sensors: usize,
    pub delta_bar: f64,
    pub contamination_db_grid: Vec<f64>,
    pub avg_snr_db: f64,
    pub model: ParameterModel,
    pub cost: CostMatrix,
    pub trials: u64,
    pub seed: u64,
    pub rules: Vec<Rule>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            m_sensors: 5,
            delta_bar: 0.1,
            contamination_db_grid: (0..=10).map(f64::from).collect(),
            avg_snr_db: 10.0,
            model: ParameterModel::default(),
            cost: CostMatrix::default(),
            trials: 100_000,
            seed: 1,
            rules: Rule::default_set(),
        }
    }
}

/// One problem found while validating a [`ScenarioConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

impl ScenarioConfig {
    /// Every invariant violation, by field.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let mut push = |field, reason: String| out.push(ConfigIssue { field, reason });
        if self.m_sensors == 0 {
            push("sensors", "must be at least 1".into());
        }
        if self.trials == 0 {
            push("trials", "must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.delta_bar) {
            push("delta_bar", format!("must be in [0, 1], got {}", self.delta_bar));
        }
        if self.contamination_db_grid.is_empty() {
            push("contamination_db", "grid must not be empty".into());
        }
        if let Some(bad) = self.contamination_db_grid.iter().find(|v| !v.is_finite()) {
            push("contamination_db", format!("grid values must be finite, got {bad}"));
        }
        if !self.avg_snr_db.is_finite() {
            push("snr_db", format!("must be finite, got {}", self.avg_snr_db));
        }
        if let Err(e) = self.cost.validate() {
            push("cost", e.to_string());
        }
        if self.rules.is_empty() {
            push("rules", "at least one rule is required".into());
        }
        for rule in &self.rules {
            if let Rule::NOutOfM(n) = rule {
                if *n == 0 || *n > self.m_sensors {
                    push("rules", format!("{rule} needs 1 <= n <= {}", self.m_sensors));
                }
            }
        }
        let m = &self.model;
        if let Err(e) = ParameterDistribution::new(m.theta0, 1.0, m.theta_min, m.theta_max)
            .and_then(|d| SafetyBand::new(m.band.tau_min, m.band.tau_max).and_then(|b| b.check_within(&d)))
        {
            push("model", e.to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.issues().into_iter().next() {
            None => Ok(()),
            Some(issue) => Err(Error::InvalidConfig {
                field: issue.field.into(),
                reason: issue.reason,
            }),
        }
    }

    /// Range of the uniform distribution the sensor error bounds are drawn
    /// from; its mean is exactly `delta_bar`.
    pub fn delta_range(&self) -> (f64, f64) {
        let d = self.delta_bar;
        ((2.0 * d - 1.0).max(0.0), (2.0 * d).min(1.0))
    }

    /// Error bounds of the cluster's sensors. The same cluster is used at
    /// every grid point.
    pub fn draw_deltas(&self) -> Vec<f64> {
        let (lo, hi) = self.delta_range();
        let mut rng = substream(self.seed, SCENARIO_SCOPE, 0, Consumer::Profiles);
        (0..self.m_sensors)
            .map(|_| if hi > lo { rng.random_range(lo..=hi) } else { lo })
            .collect()
    }
}

/// Everything a trial needs at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointParams {
    pub contamination_db: f64,
    pub dist: ParameterDistribution,
    pub band: SafetyBand,
    pub priors: HypothesisPriors,
    pub profiles: Vec<SensorProfile>,
    pub avg_snr: f64,
    pub cost: CostMatrix,
    pub rules: Vec<Rule>,
}

impl PointParams {
    pub fn resolve(cfg: &ScenarioConfig, deltas: &[f64], contamination_db: f64) -> Result<Self> {
        let dist = cfg.model.distribution(contamination_db)?;
        let band = cfg.model.band;
        let priors = hypothesis_priors(&dist, &band)?;
        let profiles = deltas
            .iter()
            .map(|&d| SensorProfile::calibrated(&dist, &band, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            contamination_db,
            dist,
            band,
            priors,
            profiles,
            avg_snr: db_to_linear(cfg.avg_snr_db),
            cost: cfg.cost,
            rules: cfg.rules.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub truth: bool,
    pub local_bits: Vec<bool>,
    pub detected_bits: Vec<bool>,
    /// One decision per configured rule, in configuration order.
    pub decisions: Vec<bool>,
}

/// Run one sense → decide → transmit → fuse cycle.
pub fn run_trial(params: &PointParams, streams: &mut TrialStreams) -> Result<TrialRecord> {
    let theta = params.dist.sample(&mut streams.theta);
    let truth = local_decision(theta, &params.band);

    let m = params.profiles.len();
    let mut local_bits = Vec::with_capacity(m);
    let mut detected_bits = Vec::with_capacity(m);
    let mut samples: Vec<Complex64> = Vec::with_capacity(m);
    let mut hard = Vec::with_capacity(m);
    let mut soft = Vec::with_capacity(m);
    for profile in &params.profiles {
        let measured = measure(theta, profile, &mut streams.sensing);
        let bit = local_decision(measured, &params.band);
        let channel = sample_channel(params.avg_snr, &mut streams.fading)?;
        let received = transmit(bit, &channel, &mut streams.noise);
        let link = equivalent_probabilities(profile.pf, profile.pm, bit_error_prob(&channel))?;
        local_bits.push(bit);
        detected_bits.push(hard_detect(&received).alarm);
        samples.push(received.r);
        hard.push(HardLink::from(link));
        soft.push(SoftLink {
            pf: profile.pf,
            pm: profile.pm,
            h: channel.h,
            noise_var: channel.noise_var,
        });
    }
    let hard = HardSideInfo::new(hard, params.priors)?;
    let soft = SoftSideInfo::new(soft, params.priors)?;

    let decisions = params
        .rules
        .iter()
        .map(|rule| {
            Ok(match *rule {
                Rule::Or => fuse_or(&detected_bits)?,
                Rule::And => fuse_and(&detected_bits)?,
                Rule::NOutOfM(n) => fuse_n_out_of_m(&detected_bits, n)?,
                Rule::Max => fuse_max(&soft, &samples)?.alarm,
                Rule::MaxHd => fuse_max_hd(&hard, &detected_bits)?.alarm,
                Rule::MlHd => fuse_ml_hd(&hard, &detected_bits)?.alarm,
                Rule::MlSd => fuse_ml_sd(&soft, &samples)?.alarm,
                Rule::MapHd => fuse_map_hd(&hard, &detected_bits, &CostMatrix::UNIT)?.alarm,
                Rule::MapSd => fuse_map_sd(&soft, &samples, &CostMatrix::UNIT)?.alarm,
                Rule::ModifiedMapHd => fuse_map_hd(&hard, &detected_bits, &params.cost)?.alarm,
                Rule::ModifiedMapSd => fuse_map_sd(&soft, &samples, &params.cost)?.alarm,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TrialRecord {
        truth,
        local_bits,
        detected_bits,
        decisions,
    })
}

/// Counts of `(decision, truth)` pairs for one rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    /// `cells[decide][truth]`.
    pub cells: [[u64; 2]; 2],
}

impl ConfusionCounts {
    #[inline]
    pub fn record(&mut self, decide: bool, truth: bool) {
        self.cells[decide as usize][truth as usize] += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        for d in 0..2 {
            for t in 0..2 {
                self.cells[d][t] += other.cells[d][t];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn truth_count(&self, truth: bool) -> u64 {
        self.cells[0][truth as usize] + self.cells[1][truth as usize]
    }
}

/// Derived totals for one rule at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuleMetrics {
    pub pf_tot: f64,
    pub pm_tot: f64,
    pub avg_cost: f64,
    pub pe_tot: f64,
    pub stderr_pf: f64,
    pub stderr_pm: f64,
    pub stderr_cost: f64,
    pub stderr_pe: f64,
    pub trials: u64,
}

/// Bayes risk `C11 P1 (1 − PM) + C01 P1 PM + C10 P0 PF + C00 P0 (1 − PF)`.
pub fn compute_cost(pf_tot: f64, pm_tot: f64, priors: &HypothesisPriors, cost: &CostMatrix) -> f64 {
    cost.c11 * priors.p_h1 * (1.0 - pm_tot)
        + cost.c01 * priors.p_h1 * pm_tot
        + cost.c10 * priors.p_h0 * pf_tot
        + cost.c00 * priors.p_h0 * (1.0 - pf_tot)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn binomial_stderr(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

/// Standard error of the mean of a per-trial cost that takes `cell` values.
fn cost_stderr(counts: &ConfusionCounts, cost: &CostMatrix, mean: f64) -> f64 {
    let n = counts.total();
    if n < 2 {
        return 0.0;
    }
    let mut second = 0.0;
    for (d, row) in counts.cells.iter().enumerate() {
        for (t, &k) in row.iter().enumerate() {
            let c = cost.cost(d == 1, t == 1);
            second += c * c * k as f64;
        }
    }
    let n_f = n as f64;
    let var = ((second / n_f - mean * mean) * n_f / (n_f - 1.0)).max(0.0);
    (var / n_f).sqrt()
}

impl ConfusionCounts {
    /// Rates and costs, with the class frequencies observed in these trials
    /// standing in for the priors so that the average cost is exactly the
    /// mean per-trial cost.
    pub fn metrics(&self, cost: &CostMatrix) -> RuleMetrics {
        let n = self.total();
        let n0 = self.truth_count(false);
        let n1 = self.truth_count(true);
        let pf_tot = ratio(self.cells[1][0], n0);
        let pm_tot = ratio(self.cells[0][1], n1);
        let empirical = HypothesisPriors {
            p_h0: ratio(n0, n),
            p_h1: ratio(n1, n),
        };
        let avg_cost = compute_cost(pf_tot, pm_tot, &empirical, cost);
        let pe_tot = compute_cost(pf_tot, pm_tot, &empirical, &CostMatrix::UNIT);
        RuleMetrics {
            pf_tot,
            pm_tot,
            avg_cost,
            pe_tot,
            stderr_pf: binomial_stderr(pf_tot, n0),
            stderr_pm: binomial_stderr(pm_tot, n1),
            stderr_cost: cost_stderr(self, cost, avg_cost),
            stderr_pe: cost_stderr(self, &CostMatrix::UNIT, pe_tot),
            trials: n,
        }
    }
}

/// Running confusion counts for every configured rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricsAccumulator {
    pub rules: Vec<Rule>,
    pub counts: Vec<ConfusionCounts>,
}

impl MetricsAccumulator {
    pub fn new(rules: &[Rule]) -> Self {
        Self {
            rules: rules.to_vec(),
            counts: vec![ConfusionCounts::default(); rules.len()],
        }
    }

    pub fn record(&mut self, trial: &TrialRecord) {
        for (c, &d) in self.counts.iter_mut().zip(&trial.decisions) {
            c.record(d, trial.truth);
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.merge(b);
        }
        self
    }

    pub fn trials(&self) -> u64 {
        self.counts.first().map_or(0, ConfusionCounts::total)
    }

    pub fn metrics(&self, cost: &CostMatrix) -> Vec<(Rule, RuleMetrics)> {
        self.rules
            .iter()
            .zip(&self.counts)
            .map(|(&r, c)| (r, c.metrics(cost)))
            .collect()
    }
}

/// Results at one contamination level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub contamination_db: f64,
    pub sigma: f64,
    pub priors: HypothesisPriors,
    pub profiles: Vec<SensorProfile>,
    pub accumulator: MetricsAccumulator,
    pub metrics: Vec<(Rule, RuleMetrics)>,
}

impl PointResult {
    pub fn rule(&self, rule: Rule) -> Option<&RuleMetrics> {
        self.metrics.iter().find(|(r, _)| *r == rule).map(|(_, m)| m)
    }
}

/// One output record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub rule: Rule,
    pub contamination_db: f64,
    pub pf_tot: f64,
    pub pm_tot: f64,
    pub avg_cost: f64,
    pub pe_tot: f64,
    pub stderr_cost: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub points: Vec<PointResult>,
}

impl ScenarioResult {
    /// Rows grouped by rule (configuration order), then by grid point.
    pub fn rows(&self) -> Vec<ResultRow> {
        let mut rows = Vec::with_capacity(self.config.rules.len() * self.points.len());
        for &rule in &self.config.rules {
            for p in &self.points {
                let m = p.rule(rule).expect("every point evaluates every rule");
                rows.push(ResultRow {
                    rule,
                    contamination_db: p.contamination_db,
                    pf_tot: m.pf_tot,
                    pm_tot: m.pm_tot,
                    avg_cost: m.avg_cost,
                    pe_tot: m.pe_tot,
                    stderr_cost: m.stderr_cost,
                    trials: m.trials,
                });
            }
        }
        rows
    }

    /// Average-cost curve of one rule across the grid, `(cost, stderr)`.
    pub fn cost_curve(&self, rule: Rule) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.rule(rule).map(|m| (m.avg_cost, m.stderr_cost)))
            .collect()
    }
}

/// Run every trial at one grid point.
pub fn run_point(params: &PointParams, seed: u64, grid_index: u64, trials: u64) -> Result<MetricsAccumulator> {
    (0..trials)
        .into_par_iter()
        .try_fold(
            || MetricsAccumulator::new(&params.rules),
            |mut acc, t| {
                let mut streams = TrialStreams::new(seed, grid_index, t);
                acc.record(&run_trial(params, &mut streams)?);
                Ok(acc)
            },
        )
        .try_reduce(|| MetricsAccumulator::new(&params.rules), |a, b| Ok(a.merge(b)))
}

/// Sweep the contamination grid.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let deltas = cfg.draw_deltas();
    let points = cfg
        .contamination_db_grid
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            let wrap = |e: Error| Error::GridPoint {
                contamination_db: db,
                source: Box::new(e),
            };
            let params = PointParams::resolve(cfg, &deltas, db).map_err(wrap)?;
            let accumulator = run_point(&params, cfg.seed, i as u64, cfg.trials).map_err(wrap)?;
            Ok(PointResult {
                contamination_db: db,
                sigma: params.dist.sigma,
                priors: params.priors,
                profiles: params.profiles,
                metrics: accumulator.metrics(&cfg.cost),
                accumulator,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioResult {
        config: cfg.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_with(deltas: &[f64], snr_db: f64, rules: Vec<Rule>) -> PointParams {
        let cfg = ScenarioConfig {
            m_sensors: deltas.len(),
            avg_snr_db: snr_db,
            rules,
            ..ScenarioConfig::default()
        };
        PointParams::resolve(&cfg, deltas, 3.0).unwrap()
    }

    #[test]
    fn rule_names_round_trip() {
        let mut all = Rule::default_set();
        all.extend([Rule::Or, Rule::And, Rule::NOutOfM(3), Rule::MaxHd]);
        for r in all {
            assert_eq!(r.to_string().parse::<Rule>().unwrap(), r);
        }
        assert!("median".parse::<Rule>().is_err());
        assert!("n-of-m:x".parse::<Rule>().is_err());
    }

    #[test]
    fn config_issues_name_fields() {
        let cfg = ScenarioConfig {
            m_sensors: 0,
            trials: 0,
            delta_bar: 1.5,
            contamination_db_grid: vec![],
            rules: vec![Rule::NOutOfM(9)],
            ..ScenarioConfig::default()
        };
        let fields: Vec<_> = cfg.issues().iter().map(|i| i.field).collect();
        for f in ["sensors", "trials", "delta_bar", "contamination_db", "rules"] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
        assert!(ScenarioConfig::default().issues().is_empty());
    }

    #[test]
    fn delta_draws_have_requested_mean_range() {
        for (bar, lo, hi) in [(0.1, 0.0, 0.2), (0.5, 0.0, 1.0), (0.8, 0.6, 1.0), (0.0, 0.0, 0.0)] {
            let cfg = ScenarioConfig {
                delta_bar: bar,
                m_sensors: 2000,
                ..ScenarioConfig::default()
            };
            let (a, b) = cfg.delta_range();
            assert!((a - lo).abs() < 1e-12 && (b - hi).abs() < 1e-12);
            assert!((0.5 * (a + b) - bar).abs() < 1e-12);
            let deltas = cfg.draw_deltas();
            assert!(deltas.iter().all(|d| (a..=b).contains(d)));
            let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
            assert!((mean - bar).abs() < 0.03);
        }
    }

    #[test]
    fn error_free_pipeline_is_always_right() {
        let mut rules = Rule::default_set();
        rules.extend([Rule::Or, Rule::And, Rule::NOutOfM(2), Rule::MaxHd]);
        let params = params_with(&[0.0; 4], 150.0, rules);
        for t in 0..2000 {
            let rec = run_trial(&params, &mut TrialStreams::new(3, 0, t)).unwrap();
            assert!(rec.local_bits.iter().all(|&b| b == rec.truth));
            assert!(rec.detected_bits.iter().all(|&b| b == rec.truth));
            assert!(rec.decisions.iter().all(|&d| d == rec.truth), "trial {t}: {rec:?}");
        }
    }

    #[test]
    fn trials_replay_bit_identically() {
        let params = params_with(&[0.1, 0.3, 0.5], 10.0, Rule::default_set());
        for t in 0..50 {
            let a = run_trial(&params, &mut TrialStreams::new(9, 1, t)).unwrap();
            let b = run_trial(&params, &mut TrialStreams::new(9, 1, t)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn dead_links_give_coin_flips() {
        let params = params_with(&[0.0; 3], -150.0, vec![Rule::MapHd]);
        let trials = 100_000u64;
        let ones: u64 = (0..trials)
            .map(|t| {
                let rec = run_trial(&params, &mut TrialStreams::new(5, 0, t)).unwrap();
                rec.detected_bits.iter().filter(|&&b| b).count() as u64
            })
            .sum();
        let n = 3.0 * trials as f64;
        let frac = ones as f64 / n;
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / n).sqrt(), "{frac}");
    }

    #[test]
    fn compute_cost_examples() {
        let priors = HypothesisPriors::new(0.8).unwrap();
        let c = compute_cost(0.05, 0.1, &priors, &CostMatrix::default());
        assert!((c - 0.24).abs() < 1e-15);
        assert_eq!(compute_cost(0.0, 0.0, &priors, &CostMatrix::default()), 0.0);
        let pe = compute_cost(0.05, 0.1, &priors, &CostMatrix::UNIT);
        assert!((pe - (0.2 * 0.1 + 0.8 * 0.05)).abs() < 1e-15);
    }

    #[test]
    fn metrics_from_counts() {
        let counts = ConfusionCounts {
            cells: [[700, 20], [80, 200]],
        };
        let m = counts.metrics(&CostMatrix::default());
        assert_eq!(m.trials, 1000);
        assert!((m.pf_tot - 80.0 / 780.0).abs() < 1e-15);
        assert!((m.pm_tot - 20.0 / 220.0).abs() < 1e-15);
        assert!((m.avg_cost - (20.0 * 10.0 + 80.0) / 1000.0).abs() < 1e-15);
        let unit = counts.metrics(&CostMatrix::UNIT);
        assert_eq!(unit.avg_cost, unit.pe_tot);
        assert!((unit.pe_tot - 0.1).abs() < 1e-15);
        // Sample standard error of a {0, 1, 10}-valued cost.
        let mean: f64 = 0.28;
        let second = (20.0 * 100.0 + 80.0) / 1000.0;
        let se = ((second - mean * mean) * 1000.0 / 999.0 / 1000.0).sqrt();
        assert!((m.stderr_cost - se).abs() < 1e-15);
    }

    #[test]
    fn small_scenario_conserves_counts_and_replays() {
        let cfg = ScenarioConfig {
            trials: 3000,
            contamination_db_grid: vec![0.0, 5.0, 10.0],
            rules: vec![Rule::MapHd, Rule::ModifiedMapSd, Rule::Or, Rule::NOutOfM(3)],
            ..ScenarioConfig::default()
        };
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a, b);
        for p in &a.points {
            for c in &p.accumulator.counts {
                assert_eq!(c.total(), 3000);
            }
        }
        assert_eq!(a.rows().len(), 12);
    }

    #[test]
    fn unit_cost_scenario_reports_error_probability() {
        let cfg = ScenarioConfig {
            trials: 2000,
            contamination_db_grid: vec![2.0],
            cost: CostMatrix::UNIT,
            ..ScenarioConfig::default()
        };
        let res = run_scenario(&cfg).unwrap();
        for (_, m) in &res.points[0].metrics {
            assert_eq!(m.avg_cost, m.pe_tot);
        }
    }

    #[test]
    fn grid_errors_carry_context() {
        let cfg = ScenarioConfig {
            trials: 10,
            contamination_db_grid: vec![0.0, 7000.0],
            ..ScenarioConfig::default()
        };
        match run_scenario(&cfg) {
            Err(Error::GridPoint { contamination_db, .. }) => assert_eq!(contamination_db, 7000.0),
            other => panic!("expected grid-point error, got {other:?}"),
        }
    }
}
