//! Device fleet: simulated or ingested latency behaviour, the analytic cost
//! model behind simulated measurements, and the fleet-average latency.

use std::collections::HashMap;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_space::ModelSpec;
use crate::rng;
use crate::scalar::order_free_mean;

/// Simulated device throughput in FLOPs per millisecond.
pub const THROUGHPUT: f64 = 1e8;
/// Fixed per-layer launch cost in milliseconds.
pub const LAYER_OVERHEAD_MS: f64 = 0.05;
/// A noisy sample never drops below this fraction of its noiseless value.
pub const NOISE_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub device_id: String,
    /// Multiplicative slowdown relative to the reference device.
    pub scale: f64,
    /// Relative standard deviation of a single run.
    pub noise_std: f64,
    /// Planted group, known only to the simulator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent_group: Option<usize>,
}

impl DeviceProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Input(format!(
                "device {}: scale must be positive, got {}",
                self.device_id, self.scale
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Input(format!(
                "device {}: noise_std must be non-negative, got {}",
                self.device_id, self.noise_std
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fleet {
    pub devices: Vec<DeviceProfile>,
}

impl Fleet {
    pub fn new(devices: Vec<DeviceProfile>) -> Result<Self> {
        for d in &devices {
            d.validate()?;
        }
        Ok(Fleet { devices })
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.devices.iter().map(|d| d.device_id.clone()).collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let fleet: Fleet = serde_json::from_str(&text)
            .map_err(|e| Error::json(path.display().to_string(), e))?;
        Fleet::new(fleet.devices)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json("fleet", e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FleetConfig {
    pub n_devices: usize,
    pub n_groups: usize,
    pub group_scales: Vec<f64>,
    pub within_group_spread: f64,
    pub noise_std: f64,
    /// Runs averaged per latency evaluation.
    pub reps: usize,
    pub seed: u64,
}

impl Default for FleetConfig {
    fn default() -> Self {
        FleetConfig {
            n_devices: 60,
            n_groups: 3,
            group_scales: vec![1.0, 1.15, 1.35],
            within_group_spread: 0.02,
            noise_std: 0.03,
            reps: 30,
            seed: 0,
        }
    }
}

impl FleetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_devices == 0 {
            return Err(Error::Config("n_devices must be at least 1".into()));
        }
        if self.n_groups == 0 || self.n_groups > self.n_devices {
            return Err(Error::Config(format!(
                "n_groups must be in 1..={}, got {}",
                self.n_devices, self.n_groups
            )));
        }
        if self.group_scales.len() != self.n_groups {
            return Err(Error::Config(format!(
                "group_scales has {} entries for {} groups",
                self.group_scales.len(),
                self.n_groups
            )));
        }
        if self.group_scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config("group_scales must be strictly positive".into()));
        }
        if !(self.within_group_spread >= 0.0) || !(self.noise_std >= 0.0) {
            return Err(Error::Config(
                "within_group_spread and noise_std must be non-negative".into(),
            ));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyMeasurement {
    pub device_id: String,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub reps: usize,
}

/// Generates a fleet with round-robin planted groups.
pub fn simulate_fleet(cfg: &FleetConfig) -> Result<Fleet> {
    cfg.validate()?;
    let spread = Normal::new(0.0, cfg.within_group_spread)
        .map_err(|e| Error::Config(format!("within_group_spread: {e}")))?;
    let devices = (0..cfg.n_devices)
        .map(|i| {
            let group = i % cfg.n_groups;
            let nominal = cfg.group_scales[group];
            let mut rng = rng::stream(&[rng::domain::FLEET, cfg.seed, i as u64]);
            let scale = (nominal * (1.0 + spread.sample(&mut rng))).max(0.01 * nominal);
            DeviceProfile {
                device_id: format!("dev-{i:03}"),
                scale,
                noise_std: cfg.noise_std,
                latent_group: Some(group),
            }
        })
        .collect();
    Ok(Fleet { devices })
}

/// Noiseless latency of `model` on a device with unit scale.
pub fn base_latency_ms(model: &ModelSpec) -> f64 {
    model
        .layers
        .iter()
        .map(|l| l.flops() as f64 / THROUGHPUT + LAYER_OVERHEAD_MS)
        .sum()
}

/// Runs `model` `reps` times on a simulated device.
///
/// The random stream is keyed by `(seed, device_id, model structure)`, so
/// the result is independent of call order.
pub fn measure_latency(
    device: &DeviceProfile,
    model: &ModelSpec,
    reps: usize,
    seed: u64,
) -> LatencyMeasurement {
    let reps = reps.max(1);
    let expected = base_latency_ms(model) * device.scale;
    if device.noise_std == 0.0 {
        return LatencyMeasurement {
            device_id: device.device_id.clone(),
            mean_ms: expected,
            std_ms: 0.0,
            reps,
        };
    }
    let samples: Vec<f64> = {
        let noise = Normal::new(0.0, device.noise_std).expect("validated noise_std");
        let mut rng = rng::stream(&[
            rng::domain::MEASURE,
            seed,
            rng::fnv1a(device.device_id.as_bytes()),
            model.structure_hash(),
        ]);
        (0..reps)
            .map(|_| expected * (1.0 + noise.sample(&mut rng)).max(NOISE_FLOOR))
            .collect()
    };
    let (mean_ms, std_ms) = mean_std(&samples);
    LatencyMeasurement {
        device_id: device.device_id.clone(),
        mean_ms,
        std_ms,
        reps,
    }
}

/// Measures every device of the fleet (in parallel, order-preserving).
pub fn measure_fleet(
    fleet: &Fleet,
    model: &ModelSpec,
    reps: usize,
    seed: u64,
) -> Vec<LatencyMeasurement> {
    fleet
        .devices
        .par_iter()
        .map(|d| measure_latency(d, model, reps, seed))
        .collect()
}

/// Mean measured latency over the whole fleet.
pub fn average_latency(fleet: &Fleet, model: &ModelSpec, reps: usize, seed: u64) -> Result<f64> {
    if fleet.is_empty() {
        return Err(Error::Domain("average latency of an empty fleet".into()));
    }
    let means: Vec<f64> = measure_fleet(fleet, model, reps, seed)
        .into_iter()
        .map(|m| m.mean_ms)
        .collect();
    Ok(order_free_mean(&means))
}

/// One-dimensional clustering feature per device: the benchmark latency.
pub fn benchmark_features(
    fleet: &Fleet,
    benchmark: &ModelSpec,
    reps: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    measure_fleet(fleet, benchmark, reps, seed)
        .into_iter()
        .map(|m| vec![m.mean_ms])
        .collect()
}

/// Sample mean and (n - 1) standard deviation; std is 0 for one sample.
fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Deserialize)]
struct ProfileRow {
    device_id: String,
    benchmark_model: String,
    latency_ms: f64,
}

/// Fits device profiles from per-run benchmark latencies.
///
/// The CSV has header `device_id,benchmark_model,latency_ms` and one row
/// per run. Each device's scale is its mean latency over the cost-model
/// latency of `benchmark`; its noise is the sample coefficient of variation.
pub fn load_profiles(path: impl AsRef<Path>, benchmark: &ModelSpec) -> Result<Fleet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    profiles_from_reader(file, path, benchmark)
}

pub fn profiles_from_reader<R: std::io::Read>(
    reader: R,
    path: &Path,
    benchmark: &ModelSpec,
) -> Result<Fleet> {
    let ingest = |row: usize, message: String| Error::Ingestion {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| ingest(1, e.to_string()))?
        .clone();
    for column in ["device_id", "benchmark_model", "latency_ms"] {
        if !headers.iter().any(|h| h == column) {
            return Err(ingest(1, format!("missing column `{column}`")));
        }
    }

    let mut order: Vec<String> = Vec::new();
    let mut samples: HashMap<String, Vec<f64>> = HashMap::new();
    for (i, record) in csv.deserialize::<ProfileRow>().enumerate() {
        // header is row 1
        let row = i + 2;
        let record = record.map_err(|e| ingest(row, e.to_string()))?;
        if record.benchmark_model != benchmark.name {
            return Err(ingest(
                row,
                format!(
                    "benchmark model `{}` does not match `{}`",
                    record.benchmark_model, benchmark.name
                ),
            ));
        }
        if !(record.latency_ms > 0.0 && record.latency_ms.is_finite()) {
            return Err(ingest(
                row,
                format!("latency_ms must be positive, got {}", record.latency_ms),
            ));
        }
        if !samples.contains_key(&record.device_id) {
            order.push(record.device_id.clone());
        }
        samples
            .entry(record.device_id)
            .or_default()
            .push(record.latency_ms);
    }
    if order.is_empty() {
        return Err(ingest(1, "no measurement rows".into()));
    }

    let base = base_latency_ms(benchmark);
    let devices = order
        .into_iter()
        .map(|id| {
            let (mean, std) = mean_std(&samples[&id]);
            DeviceProfile {
                device_id: id,
                scale: mean / base,
                noise_std: std / mean,
                latent_group: None,
            }
        })
        .collect();
    Fleet::new(devices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_space::{prune, PruningVector};
    use proptest::prelude::*;

    fn device(id: &str, scale: f64, noise: f64) -> DeviceProfile {
        DeviceProfile {
            device_id: id.into(),
            scale,
            noise_std: noise,
            latent_group: None,
        }
    }

    #[test]
    fn one_group_no_spread_is_uniform() {
        let cfg = FleetConfig {
            n_groups: 1,
            group_scales: vec![1.3],
            within_group_spread: 0.0,
            ..FleetConfig::default()
        };
        let fleet = simulate_fleet(&cfg).unwrap();
        assert!(fleet.devices.iter().all(|d| d.scale == 1.3));
    }

    #[test]
    fn round_robin_group_sizes() {
        let cfg = FleetConfig {
            n_devices: 10,
            ..FleetConfig::default()
        };
        let fleet = simulate_fleet(&cfg).unwrap();
        let mut sizes = [0; 3];
        for d in &fleet.devices {
            sizes[d.latent_group.unwrap()] += 1;
        }
        assert_eq!(sizes, [4, 3, 3]);
    }

    #[test]
    fn fleet_is_seed_deterministic() {
        let cfg = FleetConfig::default();
        assert_eq!(simulate_fleet(&cfg).unwrap(), simulate_fleet(&cfg).unwrap());
        let other = FleetConfig { seed: 1, ..cfg.clone() };
        assert_ne!(simulate_fleet(&cfg).unwrap(), simulate_fleet(&other).unwrap());
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = FleetConfig {
            n_devices: 2,
            ..FleetConfig::default()
        };
        assert!(matches!(simulate_fleet(&bad), Err(Error::Config(_))));
        let bad = FleetConfig {
            group_scales: vec![1.0, 0.0, 1.0],
            ..FleetConfig::default()
        };
        assert!(matches!(simulate_fleet(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn noiseless_measurement_is_exact() {
        let m = ModelSpec::vgg_small();
        let base = base_latency_ms(&m);
        let r = measure_latency(&device("a", 1.0, 0.0), &m, 30, 7);
        assert_eq!(r.mean_ms, base);
        assert_eq!(r.std_ms, 0.0);
        let r2 = measure_latency(&device("a", 2.0, 0.0), &m, 30, 7);
        assert_eq!(r2.mean_ms, 2.0 * r.mean_ms);
    }

    #[test]
    fn noisy_measurement_is_reproducible() {
        let m = ModelSpec::vgg_small();
        let d = device("a", 1.1, 0.05);
        let a = measure_latency(&d, &m, 30, 3);
        assert_eq!(a, measure_latency(&d, &m, 30, 3));
        assert!(a.std_ms > 0.0);
        assert_ne!(a, measure_latency(&d, &m, 30, 4));
    }

    #[test]
    fn pruned_model_is_faster() {
        let m = ModelSpec::vgg_small();
        let p = prune(&m, &PruningVector::new(vec![0.3; 8]).unwrap()).unwrap();
        let d = device("a", 1.0, 0.0);
        assert!(measure_latency(&d, &p, 5, 0).mean_ms < measure_latency(&d, &m, 5, 0).mean_ms);
    }

    #[test]
    fn average_examples() {
        let m = ModelSpec::vgg_small();
        let base = base_latency_ms(&m);
        let single = Fleet::new(vec![device("a", 1.7, 0.05)]).unwrap();
        assert_eq!(
            average_latency(&single, &m, 10, 1).unwrap(),
            measure_latency(&single.devices[0], &m, 10, 1).mean_ms
        );
        // scales chosen so the noiseless means are 10, 20 and 30 ms
        let three = Fleet::new(vec![
            device("a", 10.0 / base, 0.0),
            device("b", 20.0 / base, 0.0),
            device("c", 30.0 / base, 0.0),
        ])
        .unwrap();
        approx::assert_relative_eq!(average_latency(&three, &m, 1, 0).unwrap(), 20.0, max_relative = 1e-12);
        let mut rev = three.clone();
        rev.devices.reverse();
        assert_eq!(
            average_latency(&three, &m, 1, 0).unwrap().to_bits(),
            average_latency(&rev, &m, 1, 0).unwrap().to_bits()
        );
        assert!(matches!(
            average_latency(&Fleet::default(), &m, 1, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn benchmark_features_reflect_groups() {
        let m = ModelSpec::vgg_small();
        let fleet = Fleet::new(vec![
            device("a", 1.0, 0.0),
            device("b", 2.0, 0.0),
            device("c", 1.0, 0.0),
        ])
        .unwrap();
        let f = benchmark_features(&fleet, &m, 5, 0);
        let base = base_latency_ms(&m);
        assert_eq!(f, vec![vec![base], vec![2.0 * base], vec![base]]);
    }

    #[test]
    fn planted_groups_give_distinct_features() {
        let cfg = FleetConfig {
            within_group_spread: 0.0,
            noise_std: 0.0,
            ..FleetConfig::default()
        };
        let fleet = simulate_fleet(&cfg).unwrap();
        let mut values: Vec<u64> = benchmark_features(&fleet, &ModelSpec::vgg_small(), 3, 0)
            .into_iter()
            .map(|f| f[0].to_bits())
            .collect();
        values.sort_unstable();
        values.dedup();
        assert_eq!(values.len(), 3);
    }

    fn csv_fleet(body: &str) -> Result<Fleet> {
        profiles_from_reader(body.as_bytes(), Path::new("mem.csv"), &ModelSpec::vgg_small())
    }

    #[test]
    fn calibration_from_samples() {
        let base = base_latency_ms(&ModelSpec::vgg_small());
        let body = format!(
            "device_id,benchmark_model,latency_ms\na,vgg-small,{base}\na,vgg-small,{base}\nb,vgg-small,{}\n",
            2.0 * base
        );
        let fleet = csv_fleet(&body).unwrap();
        assert_eq!(fleet.len(), 2);
        assert_eq!(fleet.devices[0].scale, 1.0);
        assert_eq!(fleet.devices[0].noise_std, 0.0);
        assert_eq!(fleet.devices[1].scale, 2.0);
    }

    #[test]
    fn ingestion_errors_name_the_row() {
        let err = csv_fleet("device_id,benchmark_model,latency_ms\na,vgg-small,1.0\nb,vgg-small,oops\n")
            .unwrap_err();
        assert!(matches!(err, Error::Ingestion { row: 3, .. }), "{err}");
        let err = csv_fleet("device_id,benchmark_model,latency_ms\na,vgg-small,-1\n").unwrap_err();
        assert!(matches!(err, Error::Ingestion { row: 2, .. }), "{err}");
        let err = csv_fleet("device_id,latency_ms\na,1\n").unwrap_err();
        assert!(err.to_string().contains("benchmark_model"), "{err}");
        let err = csv_fleet("device_id,benchmark_model,latency_ms\na,resnet,1.0\n").unwrap_err();
        assert!(matches!(err, Error::Ingestion { row: 2, .. }), "{err}");
    }

    proptest! {
        #[test]
        fn fleet_average_is_size_weighted(
            a in prop::collection::vec(0.5f64..3.0, 1..12),
            b in prop::collection::vec(0.5f64..3.0, 1..12),
        ) {
            let m = ModelSpec::vgg_small();
            let mk = |s: &[f64], p: &str| Fleet::new(
                s.iter().enumerate().map(|(i, &x)| device(&format!("{p}{i}"), x, 0.0)).collect()
            ).unwrap();
            let fa = mk(&a, "a");
            let fb = mk(&b, "b");
            let mut all = fa.clone();
            all.devices.extend(fb.devices.clone());
            let avg_a = average_latency(&fa, &m, 1, 0).unwrap();
            let avg_b = average_latency(&fb, &m, 1, 0).unwrap();
            let weighted = (avg_a * a.len() as f64 + avg_b * b.len() as f64) / (a.len() + b.len()) as f64;
            prop_assert!((average_latency(&all, &m, 1, 0).unwrap() - weighted).abs() <= 1e-9 * weighted);
        }

        #[test]
        fn latency_increases_with_flops(x in prop::collection::vec(0.0f64..0.95, 8), l in 0usize..8) {
            let m = ModelSpec::vgg_small();
            let mut bigger = x.clone();
            let mut smaller = x;
            bigger[l] = 0.0;
            smaller[l] = 0.9;
            let pb = prune(&m, &PruningVector::new(bigger).unwrap()).unwrap();
            let ps = prune(&m, &PruningVector::new(smaller).unwrap()).unwrap();
            let d = device("d", 1.2, 0.0);
            prop_assume!(ps.flops() < pb.flops());
            prop_assert!(measure_latency(&d, &ps, 1, 0).mean_ms < measure_latency(&d, &pb, 1, 0).mean_ms);
        }
    }
}
