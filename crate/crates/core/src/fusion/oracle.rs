//! Exhaustive Bayes-optimal reference for hard-decision fusion.
//!
//! For small M every one of the 2^M detected bit vectors is enumerated and
//! its exact likelihood under each hypothesis is formed as a plain product of
//! the per-sensor equivalent probabilities. No logarithms, clamping or
//! thresholds are involved, so the table is an independent check on the
//! log-domain MAP rules.

use super::{CostMatrix, HardSideInfo};
use crate::error::{Error, Result};
use crate::model::HypothesisPriors;

pub const MAX_ORACLE_SENSORS: usize = 12;

/// Expands the bits of `mask` (bit `m` is sensor `m`) into `out`.
pub fn bits_of(mask: usize, out: &mut [bool]) {
    for (m, b) in out.iter_mut().enumerate() {
        *b = (mask >> m) & 1 == 1;
    }
}

#[derive(Debug, Clone)]
pub struct BayesOracle {
    sensors: usize,
    priors: HypothesisPriors,
    cost: CostMatrix,
    /// `(P(v | H0), P(v | H1))` indexed by bit-vector mask.
    likelihoods: Vec<(f64, f64)>,
}

impl BayesOracle {
    pub fn new(info: &HardSideInfo, cost: &CostMatrix) -> Result<Self> {
        let m = info.len();
        if m > MAX_ORACLE_SENSORS {
            return Err(Error::OracleTooLarge {
                got: m,
                max: MAX_ORACLE_SENSORS,
            });
        }
        cost.validate()?;
        let likelihoods = (0..1usize << m)
            .map(|mask| {
                info.links.iter().enumerate().fold((1.0, 1.0), |(l0, l1), (i, link)| {
                    if (mask >> i) & 1 == 1 {
                        (l0 * link.pf_eq, l1 * (1.0 - link.pm_eq))
                    } else {
                        (l0 * (1.0 - link.pf_eq), l1 * link.pm_eq)
                    }
                })
            })
            .collect();
        Ok(Self {
            sensors: m,
            priors: info.priors,
            cost: *cost,
            likelihoods,
        })
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn likelihoods(&self, mask: usize) -> (f64, f64) {
        self.likelihoods[mask]
    }

    /// Joint expected-cost contributions `(decide 0, decide 1)` of input `mask`.
    pub fn conditional_costs(&self, mask: usize) -> (f64, f64) {
        let (l0, l1) = self.likelihoods[mask];
        let w0 = self.priors.p_h0 * l0;
        let w1 = self.priors.p_h1 * l1;
        let c = &self.cost;
        (c.c00 * w0 + c.c01 * w1, c.c10 * w0 + c.c11 * w1)
    }

    /// Cost-minimizing decision for `mask`; ties go to the alarm.
    pub fn optimal_decision(&self, mask: usize) -> bool {
        let (decide0, decide1) = self.conditional_costs(mask);
        decide1 <= decide0
    }

    /// Whether both decisions at `mask` have (relatively) equal cost.
    pub fn is_tie(&self, mask: usize, rel_tol: f64) -> bool {
        let (a, b) = self.conditional_costs(mask);
        (a - b).abs() <= rel_tol * a.abs().max(b.abs())
    }

    pub fn decision_table(&self) -> Vec<bool> {
        (0..self.likelihoods.len())
            .map(|mask| self.optimal_decision(mask))
            .collect()
    }

    /// Exact Bayes risk of a deterministic hard-fusion rule.
    pub fn expected_cost<F: FnMut(&[bool]) -> bool>(&self, mut rule: F) -> f64 {
        let mut bits = vec![false; self.sensors];
        (0..self.likelihoods.len())
            .map(|mask| {
                bits_of(mask, &mut bits);
                let (decide0, decide1) = self.conditional_costs(mask);
                if rule(&bits) {
                    decide1
                } else {
                    decide0
                }
            })
            .sum()
    }

    /// Exact Bayes risk of a rule given as a decision table indexed by mask.
    pub fn table_cost(&self, table: &[bool]) -> f64 {
        (0..self.likelihoods.len())
            .map(|mask| {
                let (decide0, decide1) = self.conditional_costs(mask);
                if table[mask] {
                    decide1
                } else {
                    decide0
                }
            })
            .sum()
    }

    pub fn optimal_cost(&self) -> f64 {
        (0..self.likelihoods.len())
            .map(|mask| {
                let (decide0, decide1) = self.conditional_costs(mask);
                if decide1 <= decide0 {
                    decide1
                } else {
                    decide0
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    /// Optimal decision per input, indexed by bit-vector mask.
    pub decisions: Vec<bool>,
    pub optimal_cost: f64,
}

/// Cost-minimizing decision for each of the `2^M` hard inputs.
pub fn bayes_oracle_hd(info: &HardSideInfo, cost: &CostMatrix) -> Result<OracleTable> {
    let oracle = BayesOracle::new(info, cost)?;
    Ok(OracleTable {
        decisions: oracle.decision_table(),
        optimal_cost: oracle.optimal_cost(),
    })
}
