//! Per-cluster latency surrogates: boosted regression trees trained on
//! pruning vectors, the three evaluation modes, and MAPE assessment.

mod dataset;
mod gbrt;
mod suite;
mod tree;

pub use dataset::{
    collect_dataset, sample_pruning_vectors, sample_training_set, training_sets_from_vectors,
    LatencyDataset,
};
pub use gbrt::{
    fit_gbrt, fit_gbrt_traced, GbrtEnsemble, GbrtParams, TrainingSet, PREDICTION_FLOOR_MS,
};
pub use suite::{build_suite_from_dataset, KeyedEnsemble, SuiteMode, SurrogateSuite, UNIFIED_KEY};
pub use tree::{Node, RegressionTree};

use crate::cluster::ClusterPartition;
use crate::error::{Error, Result};
use crate::fleet::Fleet;
use crate::model_space::{ModelSpec, PruningVector, X_MAX};
use crate::scalar::Scalar;

/// Mean absolute percentage error, in percent.
pub fn mape<T: Scalar>(predictions: &[T], truths: &[T]) -> Result<T> {
    if predictions.is_empty() || predictions.len() != truths.len() {
        return Err(Error::Dimension {
            expected: truths.len(),
            actual: predictions.len(),
        });
    }
    let mut total = T::zero();
    for (&p, &t) in predictions.iter().zip(truths) {
        if !(t > T::zero()) {
            return Err(Error::Domain(format!("MAPE truth {t} is not positive")));
        }
        total = total + (p - t).abs() / t;
    }
    Ok(T::lit(100.0) * total / T::count(truths.len()))
}

/// Suite estimate of the fleet-average latency for a pruning vector.
pub fn estimate_average_latency(suite: &SurrogateSuite<f64>, x: &PruningVector) -> Result<f64> {
    suite.estimate_average_latency(x.values())
}

/// Samples `count` vectors, measures them and trains a suite of `mode`.
#[allow(clippy::too_many_arguments)]
pub fn build_suite(
    mode: SuiteMode,
    fleet: &Fleet,
    partition: &ClusterPartition,
    model: &ModelSpec,
    count: usize,
    reps: usize,
    seed: u64,
    params: &GbrtParams,
) -> Result<SurrogateSuite<f64>> {
    let vectors = sample_pruning_vectors(model.prunable_count(), count, X_MAX, seed);
    let data = collect_dataset(fleet, model, &vectors, reps, seed)?;
    build_suite_from_dataset(mode, &data, partition, params)
}

/// MAPE of a suite against per-device held-out measurements: every
/// (row, device) pair is scored with the ensemble serving that device.
pub fn device_level_mape(suite: &SurrogateSuite<f64>, test: &LatencyDataset) -> Result<f64> {
    let mut predictions = Vec::with_capacity(test.len() * test.n_devices());
    let mut truths = Vec::with_capacity(predictions.capacity());
    for (x, row) in test.features.iter().zip(&test.device_ms) {
        for (d, &truth) in row.iter().enumerate() {
            predictions.push(suite.predict_device(d, x)?);
            truths.push(truth);
        }
    }
    mape(&predictions, &truths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterPartition;
    use crate::fleet::{base_latency_ms, simulate_fleet, DeviceProfile, FleetConfig};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn dev(id: &str, scale: f64) -> DeviceProfile {
        DeviceProfile {
            device_id: id.into(),
            scale,
            noise_std: 0.0,
            latent_group: None,
        }
    }

    fn singleton_partition(n: usize) -> ClusterPartition {
        ClusterPartition {
            assignments: (0..n).collect(),
            k: n,
            representatives: (0..n).collect(),
        }
    }

    fn small_params() -> GbrtParams {
        GbrtParams {
            n_rounds: 40,
            ..GbrtParams::default()
        }
    }

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        approx::assert_relative_eq!(mape(&[110.0], &[100.0]).unwrap(), 10.0, max_relative = 1e-12);
        approx::assert_relative_eq!(
            mape(&[90.0, 110.0], &[100.0, 100.0]).unwrap(),
            10.0,
            max_relative = 1e-12
        );
        assert!(matches!(mape(&[1.0], &[0.0]), Err(Error::Domain(_))));
        assert!(mape::<f64>(&[], &[]).is_err());
        assert!(mape(&[1.0f32], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_vector_targets_are_unpruned_latency() {
        let m = ModelSpec::vgg_small();
        let fleet = Fleet::new(vec![dev("a", 1.0), dev("b", 3.0)]).unwrap();
        let p = ClusterPartition {
            assignments: vec![0, 0],
            k: 1,
            representatives: vec![0],
        };
        let sets = training_sets_from_vectors(&fleet, &p, &m, &[PruningVector::zeros(8)], 5, 0)
            .unwrap();
        approx::assert_relative_eq!(sets[0].targets[0], 2.0 * base_latency_ms(&m), max_relative = 1e-12);
    }

    #[test]
    fn cluster_targets_scale_linearly() {
        let m = ModelSpec::vgg_small();
        let fleet = Fleet::new(vec![dev("a", 1.0), dev("b", 2.0)]).unwrap();
        let sets = sample_training_set(&fleet, &singleton_partition(2), &m, 20, 3, 9).unwrap();
        assert_eq!(sets[0].features, sets[1].features);
        for (a, b) in sets[0].targets.iter().zip(&sets[1].targets) {
            assert_eq!(*b, 2.0 * a);
        }
        assert_eq!(
            sets,
            sample_training_set(&fleet, &singleton_partition(2), &m, 20, 3, 9).unwrap()
        );
    }

    #[test]
    fn suite_mode_sizes_and_estimates() {
        let m = ModelSpec::vgg_small();
        let fleet = simulate_fleet(&FleetConfig {
            n_devices: 6,
            ..FleetConfig::default()
        })
        .unwrap();
        let partition = ClusterPartition {
            assignments: vec![0, 1, 2, 0, 1, 2],
            k: 3,
            representatives: vec![0, 1, 2],
        };
        let vectors = sample_pruning_vectors(8, 30, X_MAX, 1);
        let data = collect_dataset(&fleet, &m, &vectors, 5, 1).unwrap();
        for (mode, expected) in [
            (SuiteMode::PerDevice, 6),
            (SuiteMode::Unified, 1),
            (SuiteMode::Clustering, 3),
        ] {
            let suite = build_suite_from_dataset(mode, &data, &partition, &small_params()).unwrap();
            assert_eq!(suite.models.len(), expected);
            suite.validate(6, Some(3)).unwrap();
            let x = &vectors[0];
            let manual: f64 = suite
                .models
                .iter()
                .map(|k| k.ensemble.predict(x.values()).unwrap())
                .sum::<f64>()
                / expected as f64;
            approx::assert_relative_eq!(
                estimate_average_latency(&suite, x).unwrap(),
                manual,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn single_device_fleet_modes_agree() {
        let m = ModelSpec::vgg_small();
        let fleet = Fleet::new(vec![DeviceProfile {
            noise_std: 0.03,
            ..dev("solo", 1.2)
        }])
        .unwrap();
        let partition = singleton_partition(1);
        let vectors = sample_pruning_vectors(8, 25, X_MAX, 2);
        let data = collect_dataset(&fleet, &m, &vectors, 5, 2).unwrap();
        let suites: Vec<_> = SuiteMode::ALL
            .iter()
            .map(|&mode| build_suite_from_dataset(mode, &data, &partition, &small_params()).unwrap())
            .collect();
        for x in sample_pruning_vectors(8, 10, X_MAX, 99) {
            let est: Vec<f64> = suites
                .iter()
                .map(|s| estimate_average_latency(s, &x).unwrap())
                .collect();
            assert_eq!(est[0], est[1]);
            assert_eq!(est[1], est[2]);
        }
    }

    #[test]
    fn singleton_clusters_match_per_device_targets() {
        let m = ModelSpec::vgg_small();
        let fleet = simulate_fleet(&FleetConfig {
            n_devices: 4,
            n_groups: 2,
            group_scales: vec![1.0, 1.5],
            ..FleetConfig::default()
        })
        .unwrap();
        let vectors = sample_pruning_vectors(8, 12, X_MAX, 3);
        let data = collect_dataset(&fleet, &m, &vectors, 4, 3).unwrap();
        let cluster = data.cluster_targets(&singleton_partition(4));
        for d in 0..4 {
            assert_eq!(cluster[d], data.device_targets(d));
        }
    }

    #[test]
    fn identical_per_device_ensembles_average_to_one() {
        let data = TrainingSet::new(
            (0..10).map(|i| vec![i as f64 / 10.0]).collect(),
            (0..10).map(|i| 1.0 + i as f64).collect(),
        )
        .unwrap();
        let e = fit_gbrt(&data, &small_params()).unwrap();
        let suite = SurrogateSuite {
            mode: SuiteMode::PerDevice,
            models: (0..3)
                .map(|i| KeyedEnsemble {
                    key: format!("d{i}"),
                    ensemble: e.clone(),
                })
                .collect(),
            device_model: vec![0, 1, 2],
        };
        let x = [0.35];
        approx::assert_relative_eq!(
            suite.estimate_average_latency(&x).unwrap(),
            e.predict(&x).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn estimates_from_two_clusters() {
        let constant = |v: f64| GbrtEnsemble::<f64> {
            base_prediction: v,
            learning_rate: 0.05,
            n_features: 2,
            params: GbrtParams::default(),
            trees: vec![],
        };
        let suite = SurrogateSuite {
            mode: SuiteMode::Clustering,
            models: vec![
                KeyedEnsemble { key: "1".into(), ensemble: constant(10.0) },
                KeyedEnsemble { key: "2".into(), ensemble: constant(20.0) },
            ],
            device_model: vec![0, 1, 1],
        };
        assert_eq!(suite.estimate_average_latency(&[0.0, 0.0]).unwrap(), 15.0);
        assert_eq!(suite.predict_device(2, &[0.0, 0.0]).unwrap(), 20.0);
        assert!(suite.validate(3, Some(2)).is_ok());
        assert!(suite.validate(3, Some(3)).is_err());
    }

    #[test]
    fn persistence_is_bit_exact() {
        let m = ModelSpec::vgg_small();
        let fleet = simulate_fleet(&FleetConfig {
            n_devices: 3,
            ..FleetConfig::default()
        })
        .unwrap();
        let partition = singleton_partition(3);
        let suite = build_suite(SuiteMode::Clustering, &fleet, &partition, &m, 40, 5, 4, &small_params())
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("suite.json");
        suite.save(&path).unwrap();
        let back = SurrogateSuite::load(&path).unwrap();
        assert_eq!(back, suite);
        for x in sample_pruning_vectors(8, 50, X_MAX, 17) {
            assert_eq!(
                estimate_average_latency(&back, &x).unwrap().to_bits(),
                estimate_average_latency(&suite, &x).unwrap().to_bits()
            );
        }
    }

    /// Finds the leaf by checking which root-to-leaf box contains `x`.
    fn box_oracle(tree: &RegressionTree<f64>, x: &[f64]) -> f64 {
        fn leaves(
            nodes: &[Node<f64>],
            i: usize,
            path: &mut Vec<(usize, f64, bool)>,
            out: &mut Vec<(Vec<(usize, f64, bool)>, f64)>,
        ) {
            match &nodes[i] {
                Node::Leaf { value } => out.push((path.clone(), *value)),
                Node::Split { feature, threshold, left, right } => {
                    path.push((*feature, *threshold, true));
                    leaves(nodes, *left, path, out);
                    path.pop();
                    path.push((*feature, *threshold, false));
                    leaves(nodes, *right, path, out);
                    path.pop();
                }
            }
        }
        let mut all = Vec::new();
        leaves(&tree.nodes, 0, &mut Vec::new(), &mut all);
        let hits: Vec<f64> = all
            .into_iter()
            .filter(|(conds, _)| {
                conds
                    .iter()
                    .all(|&(f, t, le)| if le { x[f] <= t } else { x[f] > t })
            })
            .map(|(_, v)| v)
            .collect();
        assert_eq!(hits.len(), 1, "leaf boxes must tile the space");
        hits[0]
    }

    proptest! {
        #[test]
        fn tree_matches_box_oracle(seed in 0u64..1_000, depth in 0usize..4, probe in prop::collection::vec(-0.2f64..1.2, 3)) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(4..40);
            let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| (rng.random_range(0..6) as f64) / 5.0).collect()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..5.0)).collect();
            let e = fit_gbrt(&TrainingSet::new(rows.clone(), y).unwrap(), &GbrtParams {
                n_rounds: 3, max_depth: depth, learning_rate: 0.5, min_leaf: 1,
            }).unwrap();
            for tree in &e.trees {
                prop_assert!(tree.nodes.len() <= 15);
                prop_assert!(tree.depth() <= depth);
                prop_assert!(tree.is_well_formed(3));
                prop_assert_eq!(tree.evaluate(&probe), box_oracle(tree, &probe));
                for r in &rows {
                    prop_assert_eq!(tree.evaluate(r), box_oracle(tree, r));
                }
            }
        }

        #[test]
        fn prediction_is_pure(seed in 0u64..200) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random(), rng.random()]).collect();
            let y: Vec<f64> = rows.iter().map(|r| 1.0 + r[0] * r[1]).collect();
            let e = fit_gbrt(&TrainingSet::new(rows, y).unwrap(), &small_params()).unwrap();
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            prop_assert_eq!(e.predict(&x).unwrap().to_bits(), e.predict(&x).unwrap().to_bits());
        }
    }
}
