//! Collection of (pruning vector, per-device latency) measurements.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gbrt::TrainingSet;
use crate::cluster::ClusterPartition;
use crate::error::{Error, Result};
use crate::fleet::{measure_latency, Fleet};
use crate::model_space::{encode_features, prune, ModelSpec, PruningVector, X_MAX};
use crate::rng;
use crate::scalar::order_free_mean;

/// Feature rows together with the measured mean latency of every device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyDataset {
    pub device_ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    /// `device_ms[row][device]`
    pub device_ms: Vec<Vec<f64>>,
}

impl LatencyDataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_devices(&self) -> usize {
        self.device_ids.len()
    }

    pub fn device_targets(&self, device: usize) -> Vec<f64> {
        self.device_ms.iter().map(|row| row[device]).collect()
    }

    /// Fleet-average latency per row.
    pub fn fleet_targets(&self) -> Vec<f64> {
        self.device_ms.iter().map(|row| order_free_mean(row)).collect()
    }

    /// Cluster-mean latency per row, one vector per cluster.
    pub fn cluster_targets(&self, partition: &ClusterPartition) -> Vec<Vec<f64>> {
        (0..partition.k)
            .map(|c| {
                let members = partition.members(c);
                self.device_ms
                    .iter()
                    .map(|row| {
                        let vals: Vec<f64> = members.iter().map(|&m| row[m]).collect();
                        order_free_mean(&vals)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).map_err(|e| Error::json("dataset", e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }
}

/// `count` vectors drawn uniformly from `[0, upper]^dim`; row `r` uses its
/// own stream so prefixes are stable when `count` grows.
pub fn sample_pruning_vectors(dim: usize, count: usize, upper: f64, seed: u64) -> Vec<PruningVector> {
    let upper = upper.min(X_MAX);
    (0..count)
        .map(|r| {
            let mut rng = rng::stream(&[rng::domain::SAMPLE, seed, r as u64]);
            let values = (0..dim).map(|_| rng.random_range(0.0..=upper)).collect();
            PruningVector::new(values).expect("sampled inside bounds")
        })
        .collect()
}

/// Prunes `model` with every vector and measures each pruned model on
/// every device.
pub fn collect_dataset(
    fleet: &Fleet,
    model: &ModelSpec,
    vectors: &[PruningVector],
    reps: usize,
    seed: u64,
) -> Result<LatencyDataset> {
    let device_ms = vectors
        .par_iter()
        .enumerate()
        .map(|(r, x)| {
            let pruned = prune(model, x)?;
            let row_seed = rng::derive_key(&[seed, r as u64]);
            Ok(fleet
                .devices
                .iter()
                .map(|d| measure_latency(d, &pruned, reps, row_seed).mean_ms)
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(LatencyDataset {
        device_ids: fleet.ids(),
        features: vectors.iter().map(encode_features).collect(),
        device_ms,
    })
}

/// Per-cluster training sets: identical feature rows, cluster-mean targets.
pub fn sample_training_set(
    fleet: &Fleet,
    partition: &ClusterPartition,
    model: &ModelSpec,
    count: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<TrainingSet<f64>>> {
    if count == 0 {
        return Err(Error::Domain("training sample count must be at least 1".into()));
    }
    let vectors = sample_pruning_vectors(model.prunable_count(), count, X_MAX, seed);
    training_sets_from_vectors(fleet, partition, model, &vectors, reps, seed)
}

pub fn training_sets_from_vectors(
    fleet: &Fleet,
    partition: &ClusterPartition,
    model: &ModelSpec,
    vectors: &[PruningVector],
    reps: usize,
    seed: u64,
) -> Result<Vec<TrainingSet<f64>>> {
    let data = collect_dataset(fleet, model, vectors, reps, seed)?;
    data.cluster_targets(partition)
        .into_iter()
        .map(|targets| TrainingSet::new(data.features.clone(), targets))
        .collect()
}
