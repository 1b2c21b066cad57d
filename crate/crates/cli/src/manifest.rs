use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use lfc_core::ScenarioConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEntry {
    pub name: String,
    pub seed: u64,
    pub config_digest: String,
    pub output: PathBuf,
}

/// Record of one `simulate` invocation, written next to its CSV files.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Digest over every resolved scenario, in order.
    pub config_digest: String,
    pub timestamp_unix: u64,
    pub scenarios: Vec<ScenarioEntry>,
    pub resolved: Vec<ScenarioConfig>,
}

/// SHA-256 of the canonical JSON form, as lowercase hex.
pub fn digest<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("configs serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(configs: &[ScenarioConfig], outputs: &[PathBuf]) -> Self {
        let scenarios = configs
            .iter()
            .zip(outputs)
            .map(|(c, o)| ScenarioEntry {
                name: c.name.clone(),
                seed: c.seed,
                config_digest: digest(c),
                output: o.clone(),
            })
            .collect();
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            config_digest: digest(configs),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            scenarios,
            resolved: configs.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_tracks_config_content() {
        let a = ScenarioConfig::default();
        let b = ScenarioConfig { seed: 2, ..a.clone() };
        assert_eq!(digest(&a), digest(&a.clone()));
        assert_ne!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }
}
