//! Distributed contamination detection over fading sensor links.
//!
//! Sensors threshold a noisy reading of a water-quality parameter against a
//! safety band, send one bit each over Rayleigh-faded BPSK links, and a
//! fusion center combines the bits (or the raw received samples) into a
//! single contamination decision.
//!
//! ```
//! use lfc_core::{ParameterDistribution, SafetyBand, hypothesis_priors};
//!
//! let dist = ParameterDistribution::ph(1.0).unwrap();
//! let priors = hypothesis_priors(&dist, &SafetyBand::drinking_water_ph()).unwrap();
//! assert!(priors.p_h0 > 0.5);
//! ```

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod fusion;
pub mod model;
pub mod montecarlo;
pub mod numeric;
pub mod report;
pub mod rng;
mod serde_complex;
pub mod validate;

pub use channel::{
    bit_error_prob, db_to_linear, equivalent_probabilities, hard_detect, sample_channel, transmit,
    ChannelRealization, HardDetection, LinkStats, ReceivedSample,
};
pub use error::{Error, Result};
pub use fusion::{
    bayes_oracle_hd, bits_of, fuse_and, fuse_map_hd, fuse_map_sd, fuse_max, fuse_max_hd,
    fuse_ml_hd, fuse_ml_sd, fuse_n_out_of_m, fuse_or, modified_threshold, soft_log_factor,
    BayesOracle, CostMatrix, FusionDecision, HardLink, HardSideInfo, OracleTable, SoftLink,
    SoftSideInfo,
};
pub use model::{
    hypothesis_priors, local_decision, measure, sample_theta, sensor_error_probabilities,
    sensor_error_probabilities_with_gain, HypothesisPriors, ParameterDistribution, SafetyBand,
    SensorErrorRates, SensorProfile,
};
pub use montecarlo::{
    compute_cost, run_point, run_scenario, run_trial, ConfusionCounts, MetricsAccumulator,
    ParameterModel, PointParams, PointResult, ResultRow, Rule, RuleMetrics, ScenarioConfig,
    ScenarioResult, TrialRecord,
};
pub use rng::TrialStreams;
