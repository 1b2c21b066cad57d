//! Configuration files and flag overrides.
//!
//! A file holds an optional `[defaults]` table and any number of
//! `[[scenario]]` tables. Each scenario starts from the built-in defaults,
//! then the file defaults, then its own table, then command-line flags.
//! With no scenario tables the defaults alone form one scenario.
//!
//! ```toml
//! [defaults]
//! trials = 100000
//! cost = { c00 = 0, c01 = 10, c10 = 1, c11 = 0 }
//!
//! [[scenario]]
//! name = "m20-d0.5"
//! sensors = 20
//! delta_bar = 0.5
//! ```

use std::path::Path;

use lfc_core::montecarlo::ConfigIssue;
use lfc_core::{CostMatrix, ParameterModel, Rule, SafetyBand, ScenarioConfig};
use serde::Deserialize;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelTable {
    pub theta0: Option<f64>,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostTable {
    pub c00: f64,
    pub c01: f64,
    pub c10: f64,
    pub c11: f64,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTable {
    pub name: Option<String>,
    pub sensors: Option<usize>,
    pub delta_bar: Option<f64>,
    pub contamination_db: Option<Vec<f64>>,
    pub snr_db: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub rules: Option<Vec<Rule>>,
    pub cost: Option<CostTable>,
    pub model: Option<ModelTable>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub defaults: ScenarioTable,
    #[serde(default)]
    pub scenario: Vec<ScenarioTable>,
}

/// Problems found while loading or resolving a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub scenario: Option<String>,
    pub issues: Vec<String>,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let prefix = self.scenario.as_ref().map(|s| format!("scenario `{s}`: ")).unwrap_or_default();
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{prefix}{issue}")?;
        }
        Ok(())
    }
}

impl ConfigError {
    fn single(issue: impl Into<String>) -> Self {
        Self {
            scenario: None,
            issues: vec![issue.into()],
        }
    }
}

pub fn parse(text: &str) -> Result<ConfigFile, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::single(format!("config: {}", e.message())))
}

pub fn load(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::single(format!("config: cannot read {}: {e}", path.display())))?;
    parse(&text)
}

/// Values from command-line flags, applied last.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub sensors: Option<usize>,
    pub delta_bar: Option<f64>,
    pub snr_db: Option<f64>,
    pub rules: Option<Vec<Rule>>,
}

fn apply_model(model: &mut ParameterModel, t: &ModelTable) {
    let ParameterModel { theta0, theta_min, theta_max, band } = model;
    *theta0 = t.theta0.unwrap_or(*theta0);
    *theta_min = t.theta_min.unwrap_or(*theta_min);
    *theta_max = t.theta_max.unwrap_or(*theta_max);
    *band = SafetyBand {
        tau_min: t.tau_min.unwrap_or(band.tau_min),
        tau_max: t.tau_max.unwrap_or(band.tau_max),
    };
}

fn apply(cfg: &mut ScenarioConfig, t: &ScenarioTable) {
    if let Some(v) = &t.name {
        cfg.name = v.clone();
    }
    if let Some(v) = t.sensors {
        cfg.m_sensors = v;
    }
    if let Some(v) = t.delta_bar {
        cfg.delta_bar = v;
    }
    if let Some(v) = &t.contamination_db {
        cfg.contamination_db_grid = v.clone();
    }
    if let Some(v) = t.snr_db {
        cfg.avg_snr_db = v;
    }
    if let Some(v) = t.trials {
        cfg.trials = v;
    }
    if let Some(v) = t.seed {
        cfg.seed = v;
    }
    if let Some(v) = &t.rules {
        cfg.rules = v.clone();
    }
    if let Some(c) = &t.cost {
        cfg.cost = CostMatrix {
            c00: c.c00,
            c01: c.c01,
            c10: c.c10,
            c11: c.c11,
        };
    }
    if let Some(m) = &t.model {
        apply_model(&mut cfg.model, m);
    }
}

impl Overrides {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        apply(
            cfg,
            &ScenarioTable {
                sensors: self.sensors,
                delta_bar: self.delta_bar,
                snr_db: self.snr_db,
                trials: self.trials,
                seed: self.seed,
                rules: self.rules.clone(),
                ..ScenarioTable::default()
            },
        );
    }
}

fn issue_text(i: &ConfigIssue) -> String {
    i.to_string()
}

/// Fully resolved and validated scenarios, in file order.
pub fn resolve(file: &ConfigFile, overrides: &Overrides) -> Result<Vec<ScenarioConfig>, ConfigError> {
    let mut base = ScenarioConfig::default();
    apply(&mut base, &file.defaults);
    let tables: Vec<ScenarioTable> = if file.scenario.is_empty() {
        vec![ScenarioTable::default()]
    } else {
        file.scenario.clone()
    };
    let mut out = Vec::with_capacity(tables.len());
    for (i, t) in tables.iter().enumerate() {
        let mut cfg = base.clone();
        if file.scenario.len() > 1 && t.name.is_none() {
            cfg.name = format!("scenario-{}", i + 1);
        }
        apply(&mut cfg, t);
        overrides.apply(&mut cfg);
        let issues = cfg.issues();
        if !issues.is_empty() {
            return Err(ConfigError {
                scenario: Some(cfg.name.clone()),
                issues: issues.iter().map(issue_text).collect(),
            });
        }
        out.push(cfg);
    }
    let mut names: Vec<&str> = out.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(ConfigError::single(format!("name: scenario `{}` appears twice", w[0])));
    }
    if let Some(bad) = out.iter().find(|c| !valid_file_stem(&c.name)) {
        return Err(ConfigError::single(format!(
            "name: `{}` must be nonempty and use only letters, digits, '.', '-' or '_'",
            bad.name
        )));
    }
    Ok(out)
}

/// Parameter model from `[defaults.model]`, for commands that need nothing else.
pub fn resolve_model(file: &ConfigFile) -> Result<ParameterModel, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    if let Some(m) = &file.defaults.model {
        apply_model(&mut cfg.model, m);
    }
    let issues: Vec<String> = cfg.issues().iter().filter(|i| i.field == "model").map(issue_text).collect();
    if issues.is_empty() {
        Ok(cfg.model)
    } else {
        Err(ConfigError { scenario: None, issues })
    }
}

fn valid_file_stem(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_'))
}

/// Parses a comma-separated rule list.
pub fn parse_rules(s: &str) -> Result<Vec<Rule>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.parse::<Rule>().map_err(|e| e.to_string()))
        .collect()
}

/// Parses a comma-separated list of numbers, or `start:stop:step`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(format!("range `{s}` needs step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    let values = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    Ok(values)
}
