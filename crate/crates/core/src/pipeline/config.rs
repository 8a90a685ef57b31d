use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::{LatencyScope, DEFAULT_MIN_PTS};
use crate::error::{Error, Result};
use crate::fleet::FleetConfig;
use crate::model_space::X_MAX;
use crate::search::{AccuracyModel, NcsConfig};
use crate::surrogate::{GbrtParams, SuiteMode};

/// When a candidate's accuracy is judged during search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccuracyEval {
    /// Only the pruning already fine-tuned in earlier iterations is recovered.
    #[default]
    PreFineTune,
    /// The candidate is scored as if already fine-tuned.
    PostFineTune,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterSettings {
    /// DBSCAN radius in milliseconds; `None` picks the k-distance knee.
    pub eps: Option<f64>,
    pub min_pts: usize,
    pub latency_scope: LatencyScope,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        ClusterSettings {
            eps: None,
            min_pts: DEFAULT_MIN_PTS,
            latency_scope: LatencyScope::FullCluster,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HdapConfig {
    /// Outer prune / fine-tune iterations.
    pub iterations: usize,
    pub ncs: NcsConfig,
    pub alpha: f64,
    pub fleet: FleetConfig,
    /// Measured profiles (CSV) to use instead of the simulated fleet.
    pub profiles: Option<PathBuf>,
    /// Model to prune; the built-in `vgg-small` when absent.
    pub model: Option<PathBuf>,
    /// Benchmark model for clustering; the model itself when absent.
    pub benchmark: Option<PathBuf>,
    pub surrogate: GbrtParams,
    pub mode: SuiteMode,
    /// Pruning vectors measured to train the surrogate suite.
    pub samples: usize,
    /// Train / test vectors for the three-mode MAPE comparison.
    pub mape_train: usize,
    pub mape_test: usize,
    /// Upper bound on every ratio within one iteration.
    pub per_iteration_prune_cap: f64,
    pub cluster: ClusterSettings,
    pub accuracy: AccuracyModel,
    pub accuracy_eval: AccuracyEval,
    pub seed: u64,
}

impl Default for HdapConfig {
    fn default() -> Self {
        HdapConfig {
            iterations: 20,
            ncs: NcsConfig::default(),
            alpha: 0.5,
            fleet: FleetConfig::default(),
            profiles: None,
            model: None,
            benchmark: None,
            surrogate: GbrtParams::default(),
            mode: SuiteMode::Clustering,
            samples: 5000,
            mape_train: 100,
            mape_test: 100,
            per_iteration_prune_cap: 0.3,
            cluster: ClusterSettings::default(),
            accuracy: AccuracyModel::default(),
            accuracy_eval: AccuracyEval::PreFineTune,
            seed: 0,
        }
    }
}

impl HdapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        if !(self.per_iteration_prune_cap > 0.0 && self.per_iteration_prune_cap <= X_MAX) {
            return Err(Error::Config(format!(
                "per_iteration_prune_cap must be in (0, {X_MAX}], got {}",
                self.per_iteration_prune_cap
            )));
        }
        if self.samples < 2 || self.mape_train < 2 || self.mape_test < 1 {
            return Err(Error::Config(
                "samples and mape_train need at least 2 rows, mape_test at least 1".into(),
            ));
        }
        if self.cluster.min_pts == 0 {
            return Err(Error::Config("cluster.min_pts must be at least 1".into()));
        }
        if let Some(eps) = self.cluster.eps {
            if !(eps > 0.0) {
                return Err(Error::Config(format!("cluster.eps must be positive, got {eps}")));
            }
        }
        if !(0.0..=1.0).contains(&self.accuracy.base_accuracy) {
            return Err(Error::Config("accuracy.base_accuracy must be in [0, 1]".into()));
        }
        self.surrogate.validate()?;
        self.fleet.validate()?;
        self.search_config(1).validate()
    }

    /// NCS settings for iteration `t`: bounded by the per-iteration cap and
    /// seeded per iteration.
    pub fn search_config(&self, t: usize) -> NcsConfig {
        NcsConfig {
            upper: self.per_iteration_prune_cap,
            seed: crate::rng::derive_key(&[crate::rng::domain::PIPELINE, self.seed, 0x5EA, t as u64]),
            ..self.ncs.clone()
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: HdapConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_settings() {
        let c = HdapConfig::default();
        assert_eq!(c.iterations, 20);
        assert_eq!(c.ncs.population, 10);
        assert_eq!(c.ncs.generations, 100);
        assert_eq!(c.alpha, 0.5);
        c.validate().unwrap();
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: HdapConfig = serde_json::from_str(r#"{"iterations": 3, "ncs": {"generations": 5}}"#).unwrap();
        assert_eq!(c.iterations, 3);
        assert_eq!(c.ncs.generations, 5);
        assert_eq!(c.ncs.population, 10);
        assert_eq!(c.samples, 5000);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            HdapConfig { iterations: 0, ..HdapConfig::default() },
            HdapConfig { alpha: 0.0, ..HdapConfig::default() },
            HdapConfig { per_iteration_prune_cap: 1.0, ..HdapConfig::default() },
            HdapConfig { samples: 1, ..HdapConfig::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }
}
