//! Evaluation modes: one ensemble per device, one for the whole fleet, or
//! one per device cluster.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::LatencyDataset;
use super::gbrt::{fit_gbrt, GbrtEnsemble, GbrtParams, TrainingSet};
use crate::cluster::ClusterPartition;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteMode {
    PerDevice,
    Unified,
    Clustering,
}

impl SuiteMode {
    pub const ALL: [SuiteMode; 3] = [SuiteMode::PerDevice, SuiteMode::Clustering, SuiteMode::Unified];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteMode::PerDevice => "per-device",
            SuiteMode::Unified => "unified",
            SuiteMode::Clustering => "clustering",
        }
    }
}

impl fmt::Display for SuiteMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-device" => Ok(SuiteMode::PerDevice),
            "unified" => Ok(SuiteMode::Unified),
            "clustering" => Ok(SuiteMode::Clustering),
            other => Err(Error::Config(format!(
                "unknown surrogate mode `{other}` (expected per-device, unified or clustering)"
            ))),
        }
    }
}

/// Token used as the key of the single unified ensemble.
pub const UNIFIED_KEY: &str = "ALL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyedEnsemble<T> {
    /// Device id, [`UNIFIED_KEY`], or the 1-based cluster number.
    pub key: String,
    pub ensemble: GbrtEnsemble<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSuite<T> {
    pub mode: SuiteMode,
    pub models: Vec<KeyedEnsemble<T>>,
    /// Index into `models` serving each fleet device.
    pub device_model: Vec<usize>,
}

impl<T: Scalar> SurrogateSuite<T> {
    pub fn n_features(&self) -> usize {
        self.models.first().map_or(0, |m| m.ensemble.n_features)
    }

    /// Fleet-average latency estimate for one feature vector.
    ///
    /// Clustering mode averages the cluster predictions without weights,
    /// per-device mode averages every device, unified mode has one model.
    pub fn estimate_average_latency(&self, features: &[T]) -> Result<T> {
        if self.models.is_empty() {
            return Err(Error::Domain("empty surrogate suite".into()));
        }
        let mut total = T::zero();
        for m in &self.models {
            total = total + m.ensemble.predict(features)?;
        }
        Ok(total / T::count(self.models.len()))
    }

    /// Prediction of the ensemble responsible for fleet device `device`.
    pub fn predict_device(&self, device: usize, features: &[T]) -> Result<T> {
        let idx = *self.device_model.get(device).ok_or_else(|| {
            Error::Domain(format!(
                "device index {device} outside fleet of {}",
                self.device_model.len()
            ))
        })?;
        self.models[idx].ensemble.predict(features)
    }

    pub fn validate(&self, n_devices: usize, k: Option<usize>) -> Result<()> {
        let expected = match self.mode {
            SuiteMode::PerDevice => Some(n_devices),
            SuiteMode::Unified => Some(1),
            SuiteMode::Clustering => k,
        };
        if let Some(expected) = expected {
            if self.models.len() != expected {
                return Err(Error::Input(format!(
                    "{} suite holds {} ensembles, expected {expected}",
                    self.mode,
                    self.models.len()
                )));
            }
        }
        if self.device_model.len() != n_devices
            || self.device_model.iter().any(|&i| i >= self.models.len())
        {
            return Err(Error::Input("suite device map does not match the fleet".into()));
        }
        Ok(())
    }
}

impl SurrogateSuite<f64> {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).map_err(|e| Error::json("surrogate suite", e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }
}

/// Trains the ensembles of `mode` on a collected dataset. All modes see the
/// same feature rows and differ only in their targets.
pub fn build_suite_from_dataset(
    mode: SuiteMode,
    data: &LatencyDataset,
    partition: &ClusterPartition,
    params: &GbrtParams,
) -> Result<SurrogateSuite<f64>> {
    let n_devices = data.n_devices();
    if partition.len() != n_devices {
        return Err(Error::Dimension {
            expected: n_devices,
            actual: partition.len(),
        });
    }
    let (keys, target_sets, device_model): (Vec<String>, Vec<Vec<f64>>, Vec<usize>) = match mode {
        SuiteMode::PerDevice => (
            data.device_ids.clone(),
            (0..n_devices).map(|d| data.device_targets(d)).collect(),
            (0..n_devices).collect(),
        ),
        SuiteMode::Unified => (
            vec![UNIFIED_KEY.to_string()],
            vec![data.fleet_targets()],
            vec![0; n_devices],
        ),
        SuiteMode::Clustering => (
            (1..=partition.k).map(|c| c.to_string()).collect(),
            data.cluster_targets(partition),
            partition.assignments.clone(),
        ),
    };
    let ensembles = target_sets
        .into_par_iter()
        .map(|targets| {
            let set = TrainingSet::new(data.features.clone(), targets)?;
            fit_gbrt(&set, params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurrogateSuite {
        mode,
        models: keys
            .into_iter()
            .zip(ensembles)
            .map(|(key, ensemble)| KeyedEnsemble { key, ensemble })
            .collect(),
        device_model,
    })
}
