//! Density-based device clustering on benchmark-latency features, the
//! total partition built from it, and per-cluster latency.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fleet::{measure_latency, Fleet};
use crate::model_space::ModelSpec;
use crate::scalar::{euclidean, order_free_mean, Scalar};

pub const DEFAULT_MIN_PTS: usize = 3;

/// Raw DBSCAN outcome for one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Cluster(usize),
    Noise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbscanLabels {
    pub labels: Vec<Label>,
    pub core: Vec<bool>,
}

impl DbscanLabels {
    pub fn cluster_count(&self) -> usize {
        self.labels
            .iter()
            .filter_map(|l| match l {
                Label::Cluster(c) => Some(c + 1),
                Label::Noise => None,
            })
            .max()
            .unwrap_or(0)
    }
}

fn check_features<T: Scalar>(features: &[Vec<T>]) -> Result<usize> {
    let dim = features
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Input("no feature vectors".into()))?;
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            actual: bad.len(),
        });
    }
    Ok(dim)
}

/// Euclidean DBSCAN.
///
/// A point is core when at least `min_pts` points (itself included) lie
/// within `eps` (inclusive). Clusters are the connected components of core
/// points, numbered by their lowest core index. A border point joins the
/// cluster of its lowest-index core neighbour.
pub fn dbscan<T: Scalar>(features: &[Vec<T>], eps: T, min_pts: usize) -> Result<DbscanLabels> {
    check_features(features)?;
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if min_pts == 0 {
        return Err(Error::Domain("min_pts must be at least 1".into()));
    }
    let n = features.len();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| euclidean(&features[i], &features[j]) <= eps)
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels = vec![Label::Noise; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for seed in 0..n {
        if !core[seed] || labels[seed] != Label::Noise {
            continue;
        }
        labels[seed] = Label::Cluster(next);
        stack.push(seed);
        while let Some(p) = stack.pop() {
            for &q in &neighbours[p] {
                if core[q] && labels[q] == Label::Noise {
                    labels[q] = Label::Cluster(next);
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        if let Some(&c) = neighbours[i].iter().find(|&&j| core[j]) {
            labels[i] = labels[c];
        }
    }
    Ok(DbscanLabels { labels, core })
}

/// Distance to the `k`-th nearest other point, for every point.
pub fn k_distances<T: Scalar>(features: &[Vec<T>], k: usize) -> Vec<T> {
    let n = features.len();
    (0..n)
        .map(|i| {
            let mut d: Vec<T> = (0..n)
                .filter(|&j| j != i)
                .map(|j| euclidean(&features[i], &features[j]))
                .collect();
            if d.is_empty() {
                return T::zero();
            }
            d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            d[(k.max(1) - 1).min(d.len() - 1)]
        })
        .collect()
}

/// Mean silhouette below which a fleet is treated as a single cluster.
pub const SILHOUETTE_FLOOR: f64 = 0.7;

/// Edge lengths of a Euclidean minimum spanning tree (Prim, O(n^2)).
fn spanning_edges<T: Scalar>(features: &[Vec<T>]) -> Vec<T> {
    let n = features.len();
    let mut done = vec![false; n];
    let mut reach = vec![T::infinity(); n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    for step in 0..n {
        done[current] = true;
        if step > 0 {
            edges.push(reach[current]);
        }
        let mut next = None;
        for j in 0..n {
            if done[j] {
                continue;
            }
            let d = euclidean(&features[current], &features[j]);
            if d < reach[j] {
                reach[j] = d;
            }
            if next.is_none_or(|b: usize| reach[j] < reach[b]) {
                next = Some(j);
            }
        }
        match next {
            Some(j) => current = j,
            None => break,
        }
    }
    edges
}

/// Mean silhouette of a total assignment; `None` with fewer than two clusters.
pub fn silhouette<T: Scalar>(features: &[Vec<T>], assignments: &[usize], k: usize) -> Option<f64> {
    if k < 2 || features.len() != assignments.len() {
        return None;
    }
    let n = features.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in (0..n).filter(|&j| j != i) {
            sums[assignments[j]] += euclidean(&features[i], &features[j]).as_f64();
            counts[assignments[j]] += 1;
        }
        let own = assignments[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let spread = a.max(b);
        if spread > 0.0 {
            total += (b - a) / spread;
        }
    }
    Some(total / n as f64)
}

/// Picks the DBSCAN radius automatically.
///
/// Every spanning-tree edge length and every k-distance is tried as a
/// radius, and the one whose partition has the highest mean silhouette
/// wins (the smallest radius on ties). When no candidate reaches
/// [`SILHOUETTE_FLOOR`] the radius is chosen large enough to merge
/// everything into one cluster.
pub fn auto_eps<T: Scalar>(features: &[Vec<T>], min_pts: usize) -> Result<T> {
    check_features(features)?;
    let mst = spanning_edges(features);
    let kd = k_distances(features, min_pts.saturating_sub(1));
    let mut candidates: Vec<T> = mst
        .iter()
        .chain(&kd)
        .copied()
        .filter(|&e| e > T::zero())
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    candidates.dedup();

    let mut best: Option<(f64, T)> = None;
    for &eps in &candidates {
        let raw = dbscan(features, eps, min_pts)?;
        let partition = build_partition(&raw, features);
        if let Some(s) = silhouette(features, &partition.assignments, partition.k) {
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, eps));
            }
        }
    }
    if let Some((s, eps)) = best {
        if s >= SILHOUETTE_FLOOR {
            return Ok(eps);
        }
    }
    let merge_all = candidates.last().copied().unwrap_or_else(T::zero);
    if merge_all > T::zero() {
        return Ok(merge_all);
    }
    let magnitude = features
        .iter()
        .flatten()
        .fold(T::zero(), |m, v| m.max(v.abs()));
    Ok((T::one() + magnitude) * T::epsilon() * T::lit(16.0))
}

/// Total partition of the devices. Clusters are numbered `0..k` internally
/// and `1..=k` in exported files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPartition {
    /// Cluster index of every point, in fleet order.
    pub assignments: Vec<usize>,
    pub k: usize,
    /// Medoid point index of every cluster.
    pub representatives: Vec<usize>,
}

impl ClusterPartition {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignments {
            sizes[c] += 1;
        }
        sizes
    }

    /// Checks cover, disjointness, non-emptiness and representative membership.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.representatives.len() != self.k {
            return Err(Error::Input(format!(
                "partition has k = {} and {} representatives",
                self.k,
                self.representatives.len()
            )));
        }
        if let Some(&c) = self.assignments.iter().find(|&&c| c >= self.k) {
            return Err(Error::Input(format!("cluster index {c} out of range")));
        }
        if let Some(empty) = self.sizes().iter().position(|&s| s == 0) {
            return Err(Error::Input(format!("cluster {} is empty", empty + 1)));
        }
        for (c, &r) in self.representatives.iter().enumerate() {
            if self.assignments.get(r) != Some(&c) {
                return Err(Error::Input(format!(
                    "representative of cluster {} is not a member",
                    c + 1
                )));
            }
        }
        Ok(())
    }

    pub fn to_export(&self, fleet: &Fleet) -> Result<PartitionExport> {
        if fleet.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                actual: fleet.len(),
            });
        }
        Ok(PartitionExport {
            assignments: fleet
                .devices
                .iter()
                .zip(&self.assignments)
                .map(|(d, &c)| (d.device_id.clone(), c + 1))
                .collect(),
            representatives: self
                .representatives
                .iter()
                .enumerate()
                .map(|(c, &r)| (c + 1, fleet.devices[r].device_id.clone()))
                .collect(),
        })
    }

    pub fn from_export(export: &PartitionExport, fleet: &Fleet) -> Result<Self> {
        let position = |id: &str| {
            fleet
                .devices
                .iter()
                .position(|d| d.device_id == id)
                .ok_or_else(|| Error::Input(format!("unknown device `{id}` in partition")))
        };
        let assignments = fleet
            .devices
            .iter()
            .map(|d| {
                export
                    .assignments
                    .get(&d.device_id)
                    .filter(|&&c| c >= 1)
                    .map(|&c| c - 1)
                    .ok_or_else(|| {
                        Error::Input(format!("device `{}` has no valid cluster", d.device_id))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let k = export.representatives.len();
        let representatives = (1..=k)
            .map(|c| {
                export
                    .representatives
                    .get(&c)
                    .ok_or_else(|| Error::Input(format!("cluster {c} has no representative")))
                    .and_then(|id| position(id))
            })
            .collect::<Result<Vec<_>>>()?;
        let partition = ClusterPartition {
            assignments,
            k,
            representatives,
        };
        partition.validate()?;
        Ok(partition)
    }

    pub fn load(path: impl AsRef<Path>, fleet: &Fleet) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let export: PartitionExport = serde_json::from_str(&text)
            .map_err(|e| Error::json(path.display().to_string(), e))?;
        Self::from_export(&export, fleet)
    }
}

/// File form: `{device_id: cluster}` plus `{cluster: representative}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionExport {
    pub assignments: BTreeMap<String, usize>,
    pub representatives: BTreeMap<usize, String>,
}

/// Turns raw DBSCAN labels into a total partition.
///
/// Noise points join the cluster of their nearest core point (lowest index
/// on ties). Without any cluster, every point becomes its own cluster.
pub fn build_partition<T: Scalar>(raw: &DbscanLabels, features: &[Vec<T>]) -> ClusterPartition {
    let n = raw.labels.len();
    let k = raw.cluster_count();
    let assignments: Vec<usize> = if k == 0 {
        (0..n).collect()
    } else {
        (0..n)
            .map(|i| match raw.labels[i] {
                Label::Cluster(c) => c,
                Label::Noise => {
                    let mut best: Option<(T, usize)> = None;
                    for j in (0..n).filter(|&j| raw.core[j]) {
                        let d = euclidean(&features[i], &features[j]);
                        if best.is_none_or(|(bd, _)| d < bd) {
                            best = Some((d, j));
                        }
                    }
                    let (_, j) = best.expect("a cluster implies a core point");
                    match raw.labels[j] {
                        Label::Cluster(c) => c,
                        Label::Noise => unreachable!("core points are clustered"),
                    }
                }
            })
            .collect()
    };
    let k = if k == 0 { n } else { k };
    let representatives = (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..n).filter(|&i| assignments[i] == c).collect();
            medoid(&members, features)
        })
        .collect();
    ClusterPartition {
        assignments,
        k,
        representatives,
    }
}

fn medoid<T: Scalar>(members: &[usize], features: &[Vec<T>]) -> usize {
    let mut best: Option<(T, usize)> = None;
    for &m in members {
        let total = members
            .iter()
            .fold(T::zero(), |acc, &o| acc + euclidean(&features[m], &features[o]));
        if best.is_none_or(|(b, _)| total < b) {
            best = Some((total, m));
        }
    }
    best.expect("clusters are non-empty").1
}

/// DBSCAN with the automatic radius when `eps` is `None`.
pub fn cluster_devices<T: Scalar>(
    features: &[Vec<T>],
    eps: Option<T>,
    min_pts: usize,
) -> Result<ClusterPartition> {
    let eps = match eps {
        Some(e) => e,
        None => auto_eps(features, min_pts)?,
    };
    let raw = dbscan(features, eps, min_pts)?;
    Ok(build_partition(&raw, features))
}

pub fn estimate_k_from_partition(partition: &ClusterPartition) -> usize {
    partition.k
}

/// Which devices stand in for a cluster when measuring it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatencyScope {
    #[default]
    FullCluster,
    Representative,
}

/// Mean measured latency over the members of cluster `k` (0-based).
pub fn cluster_latency(
    fleet: &Fleet,
    partition: &ClusterPartition,
    k: usize,
    model: &ModelSpec,
    reps: usize,
    seed: u64,
    scope: LatencyScope,
) -> Result<f64> {
    if k >= partition.k {
        return Err(Error::Domain(format!(
            "unknown cluster {} (partition has {})",
            k + 1,
            partition.k
        )));
    }
    if fleet.len() != partition.len() {
        return Err(Error::Dimension {
            expected: partition.len(),
            actual: fleet.len(),
        });
    }
    let members = match scope {
        LatencyScope::FullCluster => partition.members(k),
        LatencyScope::Representative => vec![partition.representatives[k]],
    };
    let means: Vec<f64> = members
        .iter()
        .map(|&i| measure_latency(&fleet.devices[i], model, reps, seed).mean_ms)
        .collect();
    Ok(order_free_mean(&means))
}

/// Renumbers clusters by their smallest member index.
pub fn canonical_labels(assignments: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    assignments
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same points");
    let n = a.len();
    let pairs = |c: usize| (c * c.saturating_sub(1)) as f64 / 2.0;
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let expected = sum_a * sum_b / pairs(n).max(f64::MIN_POSITIVE);
    let max_index = 0.5 * (sum_a + sum_b);
    if (max_index - expected).abs() < 1e-12 {
        return 1.0;
    }
    (index - expected) / (max_index - expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::{average_latency, base_latency_ms, DeviceProfile};

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn two_pairs() {
        let raw = dbscan(&pts(&[0.0, 0.1, 5.0, 5.1]), 0.5, 2).unwrap();
        assert_eq!(
            raw.labels,
            vec![Label::Cluster(0), Label::Cluster(0), Label::Cluster(1), Label::Cluster(1)]
        );
    }

    #[test]
    fn huge_eps_single_cluster() {
        let f = pts(&[0.0, 3.0, -2.0, 10.0]);
        let raw = dbscan(&f, 100.0, 1).unwrap();
        assert!(raw.labels.iter().all(|&l| l == Label::Cluster(0)));
    }

    #[test]
    fn isolated_point_is_noise() {
        let raw = dbscan(&pts(&[0.0, 0.1, 0.2, 9.0]), 0.5, 2).unwrap();
        assert_eq!(raw.labels[3], Label::Noise);
        let raw = dbscan(&pts(&[4.0]), 0.5, 2).unwrap();
        assert_eq!(raw.labels, vec![Label::Noise]);
    }

    #[test]
    fn works_in_single_precision() {
        let f: Vec<Vec<f32>> = vec![vec![0.0], vec![0.1], vec![5.0], vec![5.1]];
        let p = cluster_devices(&f, Some(0.5f32), 2).unwrap();
        assert_eq!(p.assignments, vec![0, 0, 1, 1]);
    }

    #[test]
    fn input_errors() {
        let bad = vec![vec![0.0], vec![1.0, 2.0]];
        assert!(matches!(dbscan(&bad, 1.0, 2), Err(Error::Dimension { .. })));
        assert!(matches!(dbscan(&pts(&[1.0]), 0.0, 2), Err(Error::Domain(_))));
        assert!(matches!(dbscan(&pts(&[1.0]), 1.0, 0), Err(Error::Domain(_))));
        assert!(matches!(dbscan::<f64>(&[], 1.0, 1), Err(Error::Input(_))));
    }

    #[test]
    fn partition_passes_through_clean_labels() {
        let f = pts(&[0.0, 0.1, 5.0, 5.1]);
        let raw = dbscan(&f, 0.5, 2).unwrap();
        let p = build_partition(&raw, &f);
        assert_eq!(p.assignments, vec![0, 0, 1, 1]);
        assert_eq!(p.k, 2);
        p.validate().unwrap();
    }

    #[test]
    fn noise_goes_to_nearest_core() {
        // cluster 1: {0, 0.1, 0.2}; cluster 2: {5, 5.1, 5.2}; 3.9 is noise,
        // nearest core is 5.0
        let f = pts(&[0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 3.9]);
        let raw = dbscan(&f, 0.15, 2).unwrap();
        assert_eq!(raw.labels[6], Label::Noise);
        let p = build_partition(&raw, &f);
        assert_eq!(p.assignments[6], 1);
        p.validate().unwrap();
    }

    #[test]
    fn all_noise_gives_singletons() {
        let f = pts(&[0.0, 10.0, 20.0]);
        let raw = dbscan(&f, 1.0, 2).unwrap();
        let p = build_partition(&raw, &f);
        assert_eq!(p.k, 3);
        assert_eq!(estimate_k_from_partition(&p), 3);
        assert_eq!(p.representatives, vec![0, 1, 2]);
        p.validate().unwrap();
    }

    #[test]
    fn medoid_is_central_member() {
        let f = pts(&[0.0, 0.1, 0.2, 0.3, 0.35]);
        let p = cluster_devices(&f, Some(1.0), 1).unwrap();
        assert_eq!(p.k, 1);
        assert_eq!(p.representatives, vec![2]);
    }

    #[test]
    fn auto_eps_handles_identical_points() {
        let f = pts(&[1.5, 1.5, 1.5, 1.5]);
        let eps = auto_eps(&f, 3).unwrap();
        assert!(eps > 0.0);
        assert_eq!(cluster_devices(&f, None, 3).unwrap().k, 1);
    }

    #[test]
    fn auto_eps_separates_gapped_groups() {
        let f = pts(&[0.0, 0.1, 0.15, 0.3, 5.0, 5.05, 5.2, 5.3, 9.0, 9.1, 9.2]);
        let p = cluster_devices(&f, None, 3).unwrap();
        assert_eq!(p.k, 3);
        assert_eq!(p.assignments, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn auto_eps_keeps_evenly_spread_points_together() {
        let f = pts(&(0..20).map(|i| i as f64 * 0.1).collect::<Vec<_>>());
        assert_eq!(cluster_devices(&f, None, 3).unwrap().k, 1);
    }

    #[test]
    fn silhouette_of_separated_pairs() {
        let f = pts(&[0.0, 1.0, 10.0, 11.0]);
        let s = silhouette(&f, &[0, 0, 1, 1], 2).unwrap();
        // Outer points: a = 1, b = 10.5. Inner points: a = 1, b = 9.5.
        let expected = (9.5 / 10.5 + 8.5 / 9.5) / 2.0;
        assert!((s - expected).abs() < 1e-12);
        assert_eq!(silhouette(&f, &[0, 0, 0, 0], 1), None);
    }

    fn dev(id: &str, scale: f64) -> DeviceProfile {
        DeviceProfile {
            device_id: id.into(),
            scale,
            noise_std: 0.0,
            latent_group: None,
        }
    }

    #[test]
    fn cluster_latency_examples() {
        let m = ModelSpec::vgg_small();
        let base = base_latency_ms(&m);
        let fleet = Fleet::new(vec![
            dev("a", 10.0 / base),
            dev("b", 14.0 / base),
            dev("c", 3.0),
        ])
        .unwrap();
        let p = ClusterPartition {
            assignments: vec![0, 0, 1],
            k: 2,
            representatives: vec![0, 2],
        };
        let full = LatencyScope::FullCluster;
        approx::assert_relative_eq!(
            cluster_latency(&fleet, &p, 0, &m, 1, 0, full).unwrap(),
            12.0,
            max_relative = 1e-12
        );
        assert_eq!(
            cluster_latency(&fleet, &p, 1, &m, 1, 0, full).unwrap(),
            3.0 * base
        );
        approx::assert_relative_eq!(
            cluster_latency(&fleet, &p, 0, &m, 1, 0, LatencyScope::Representative).unwrap(),
            10.0,
            max_relative = 1e-12
        );
        assert!(matches!(
            cluster_latency(&fleet, &p, 2, &m, 1, 0, full),
            Err(Error::Domain(_))
        ));
        let weighted = (2.0 * cluster_latency(&fleet, &p, 0, &m, 1, 0, full).unwrap()
            + cluster_latency(&fleet, &p, 1, &m, 1, 0, full).unwrap())
            / 3.0;
        approx::assert_relative_eq!(
            weighted,
            average_latency(&fleet, &m, 1, 0).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn export_round_trip() {
        let fleet = Fleet::new(vec![dev("a", 1.0), dev("b", 1.0), dev("c", 2.0)]).unwrap();
        let p = ClusterPartition {
            assignments: vec![0, 0, 1],
            k: 2,
            representatives: vec![1, 2],
        };
        let export = p.to_export(&fleet).unwrap();
        assert_eq!(export.assignments["c"], 2);
        assert_eq!(export.representatives[&1], "b");
        assert_eq!(ClusterPartition::from_export(&export, &fleet).unwrap(), p);
    }

    #[test]
    fn ari_basics() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[5, 5, 2, 2]), 1.0);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
        assert_eq!(canonical_labels(&[4, 4, 1, 7, 1]), vec![0, 0, 1, 2, 1]);
    }
}
