use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cluster::{auto_eps, cluster_latency, dbscan, build_partition, ClusterPartition, PartitionExport};
use crate::error::{Error, Result};
use crate::fleet::{
    average_latency, base_latency_ms, benchmark_features, load_profiles, measure_fleet, simulate_fleet, Fleet,
};
use crate::model_space::{flops, prune, ModelSpec, PruningVector, X_MAX};
use crate::rng::{derive_key, domain};
use crate::search::{ncs_minimize, FitnessContext};
use crate::surrogate::{
    build_suite_from_dataset, collect_dataset, device_level_mape, sample_pruning_vectors, SuiteMode,
    SurrogateSuite,
};

use super::config::HdapConfig;
use super::state::{fine_tune_sim, TuningState};

/// Timing measured on the host clock. These are the only values that
/// differ between two runs with the same configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationWallClock {
    pub cumulative_surrogate_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Incremental ratios applied to the previous reference.
    pub best_x: Vec<f64>,
    /// Ratios relative to the original model after this iteration.
    pub cumulative_ratios: Vec<f64>,
    pub fitness: f64,
    pub surrogate_latency_estimate_ms: f64,
    pub measured_cluster_latency_ms: Vec<f64>,
    pub measured_average_ms: f64,
    pub accuracy_before: f64,
    pub accuracy_after: f64,
    pub flops: u64,
    pub infeasible: bool,
    pub evaluations: usize,
    pub cumulative_hardware_s: f64,
    pub wall_clock: IterationWallClock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub flops: u64,
    pub accuracy: f64,
    pub surrogate_estimate_ms: f64,
    pub measured_average_ms: f64,
    pub measured_cluster_latency_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLatencyRow {
    /// `baseline` or `final`.
    pub model: String,
    /// 1-based cluster number.
    pub cluster: usize,
    pub device_id: String,
    pub mean_ms: f64,
    pub std_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapeRow {
    pub mode: SuiteMode,
    pub ensembles: usize,
    pub mape_percent: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccelerationWallClock {
    /// Mean wall time of one fleet-average estimate.
    pub prediction_s: f64,
    pub acceleration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelerationTable {
    /// Device measurements spent collecting surrogate training data.
    pub training_measurements: usize,
    pub surrogate_evaluations: usize,
    /// Would-be time to measure the original model on every device,
    /// `reps` runs each, one device after another.
    pub hardware_evaluation_s: f64,
    pub wall_clock: AccelerationWallClock,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalTimeWallClock {
    /// Training time plus the cumulative time spent in surrogate calls.
    pub surrogate_s: Vec<f64>,
}

/// Cumulative evaluation cost per evaluation index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalTimeSeries {
    pub hardware_s: Vec<f64>,
    pub wall_clock: EvalTimeWallClock,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunWallClock {
    pub surrogate_training_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: HdapConfig,
    pub model_name: String,
    pub fleet: Fleet,
    pub eps: f64,
    pub clusters: usize,
    pub partition: PartitionExport,
    pub baseline: ModelSummary,
    pub iterations: Vec<IterationRecord>,
    pub final_summary: ModelSummary,
    pub final_model: ModelSpec,
    /// `|estimate - measured| / measured` on the final model.
    pub surrogate_relative_error: f64,
    pub cluster_latency: Vec<ClusterLatencyRow>,
    pub mape: Vec<MapeRow>,
    pub acceleration: AccelerationTable,
    pub eval_time: EvalTimeSeries,
    pub wall_clock: RunWallClock,
}

impl RunReport {
    pub fn infeasible_iterations(&self) -> Vec<usize> {
        self.iterations
            .iter()
            .filter(|r| r.infeasible)
            .map(|r| r.iteration)
            .collect()
    }

    pub fn speedup(&self) -> f64 {
        self.baseline.measured_average_ms / self.final_summary.measured_average_ms
    }
}

fn seed_for(cfg: &HdapConfig, purpose: u64, index: u64) -> u64 {
    derive_key(&[domain::PIPELINE, cfg.seed, purpose, index])
}

const SEED_BENCHMARK: u64 = 1;
const SEED_TRAIN: u64 = 2;
const SEED_MAPE: u64 = 3;
const SEED_MEASURE: u64 = 4;
const SEED_TIMING: u64 = 5;

pub fn load_model(cfg: &HdapConfig) -> Result<(ModelSpec, ModelSpec)> {
    let model = match &cfg.model {
        Some(p) => ModelSpec::load(p)?,
        None => ModelSpec::vgg_small(),
    };
    let benchmark = match &cfg.benchmark {
        Some(p) => ModelSpec::load(p)?,
        None => model.clone(),
    };
    if model.prunable_count() == 0 {
        return Err(Error::Input(format!("model {} has no prunable layers", model.name)));
    }
    Ok((model, benchmark))
}

pub fn load_fleet(cfg: &HdapConfig, benchmark: &ModelSpec) -> Result<Fleet> {
    match &cfg.profiles {
        Some(p) => load_profiles(p, benchmark),
        None => simulate_fleet(&cfg.fleet),
    }
}

/// Clusters the fleet by benchmark latency; returns the radius used.
pub fn cluster_fleet(cfg: &HdapConfig, fleet: &Fleet, benchmark: &ModelSpec) -> Result<(ClusterPartition, f64)> {
    let features = benchmark_features(fleet, benchmark, cfg.fleet.reps, seed_for(cfg, SEED_BENCHMARK, 0));
    let eps = match cfg.cluster.eps {
        Some(e) => e,
        None => auto_eps(&features, cfg.cluster.min_pts)?,
    };
    let raw = dbscan(&features, eps, cfg.cluster.min_pts)?;
    Ok((build_partition(&raw, &features), eps))
}

/// Three-mode MAPE comparison on fresh train / test vectors.
pub fn mape_table(
    cfg: &HdapConfig,
    fleet: &Fleet,
    partition: &ClusterPartition,
    model: &ModelSpec,
) -> Result<Vec<MapeRow>> {
    let dim = model.prunable_count();
    let train_seed = seed_for(cfg, SEED_MAPE, 0);
    let test_seed = seed_for(cfg, SEED_MAPE, 1);
    let reps = cfg.fleet.reps;
    let train = collect_dataset(
        fleet,
        model,
        &sample_pruning_vectors(dim, cfg.mape_train, X_MAX, train_seed),
        reps,
        train_seed,
    )?;
    let test = collect_dataset(
        fleet,
        model,
        &sample_pruning_vectors(dim, cfg.mape_test, X_MAX, test_seed),
        reps,
        test_seed,
    )?;
    SuiteMode::ALL
        .iter()
        .map(|&mode| {
            let suite = build_suite_from_dataset(mode, &train, partition, &cfg.surrogate)?;
            Ok(MapeRow {
                mode,
                ensembles: suite.models.len(),
                mape_percent: device_level_mape(&suite, &test)?,
            })
        })
        .collect()
}

/// Would-be time to measure `model` `reps` times on every device in turn.
pub fn hardware_evaluation_s(fleet: &Fleet, model: &ModelSpec, reps: usize) -> f64 {
    let total_scale: f64 = fleet.devices.iter().map(|d| d.scale).sum();
    reps as f64 * base_latency_ms(model) * total_scale / 1000.0
}

fn summarize(
    cfg: &HdapConfig,
    fleet: &Fleet,
    partition: &ClusterPartition,
    state: &TuningState,
    suite: &SurrogateSuite<f64>,
    seed: u64,
) -> Result<ModelSummary> {
    let model = &state.reference;
    let reps = cfg.fleet.reps;
    let features = model.cumulative_ratios(&state.original)?;
    Ok(ModelSummary {
        flops: flops(model),
        accuracy: state.accuracy(&cfg.accuracy),
        surrogate_estimate_ms: suite.estimate_average_latency(&features)?,
        measured_average_ms: average_latency(fleet, model, reps, seed)?,
        measured_cluster_latency_ms: (0..partition.k)
            .map(|k| cluster_latency(fleet, partition, k, model, reps, seed, cfg.cluster.latency_scope))
            .collect::<Result<_>>()?,
    })
}

fn distribution_rows(
    label: &str,
    fleet: &Fleet,
    partition: &ClusterPartition,
    model: &ModelSpec,
    reps: usize,
    seed: u64,
) -> Vec<ClusterLatencyRow> {
    let measured = measure_fleet(fleet, model, reps, seed);
    let mut rows: Vec<ClusterLatencyRow> = measured
        .into_iter()
        .zip(&partition.assignments)
        .map(|(m, &k)| ClusterLatencyRow {
            model: label.to_string(),
            cluster: k + 1,
            device_id: m.device_id,
            mean_ms: m.mean_ms,
            std_ms: m.std_ms,
        })
        .collect();
    rows.sort_by_key(|r| r.cluster);
    rows
}

struct Evaluation {
    accuracy: f64,
    latency_estimate: f64,
    feasible: bool,
    hardware_s: f64,
    surrogate_s: f64,
    x: Vec<f64>,
}

/// Runs the full prune / fine-tune loop.
pub fn run_hdap(cfg: &HdapConfig) -> Result<RunReport> {
    let started = Instant::now();
    cfg.validate()?;
    let (model, benchmark) = load_model(cfg)?;
    let fleet = load_fleet(cfg, &benchmark)?;
    let (partition, eps) = cluster_fleet(cfg, &fleet, &benchmark)?;
    let reps = cfg.fleet.reps;
    let dim = model.prunable_count();

    let train_seed = seed_for(cfg, SEED_TRAIN, 0);
    let vectors = sample_pruning_vectors(dim, cfg.samples, X_MAX, train_seed);
    let train_started = Instant::now();
    let dataset = collect_dataset(&fleet, &model, &vectors, reps, train_seed)?;
    let suite = build_suite_from_dataset(cfg.mode, &dataset, &partition, &cfg.surrogate)?;
    let training_s = train_started.elapsed().as_secs_f64();
    drop(dataset);

    let mape = mape_table(cfg, &fleet, &partition, &model)?;

    let mut state = TuningState::new(model.clone());
    let baseline = summarize(cfg, &fleet, &partition, &state, &suite, seed_for(cfg, SEED_MEASURE, 0))?;

    let mut iterations = Vec::with_capacity(cfg.iterations);
    let mut hardware_series = Vec::new();
    let mut surrogate_series = Vec::new();
    let mut hardware_total = 0.0;
    let mut surrogate_total = training_s;

    for t in 1..=cfg.iterations {
        let reference_features = state.reference.cumulative_ratios(&model)?;
        let oracle_state = state.clone();
        let accuracy_params = cfg.accuracy;
        let eval_mode = cfg.accuracy_eval;
        let ctx = FitnessContext::with_reference(
            &suite,
            move |x: &PruningVector| match prune(&oracle_state.reference, x) {
                Ok(c) => oracle_state.candidate_accuracy(&c, &accuracy_params, eval_mode),
                Err(_) => 0.0,
            },
            cfg.accuracy.base_accuracy,
            cfg.alpha,
            &reference_features,
        )?;

        let mut log: Vec<Evaluation> = Vec::new();
        let mut failure: Option<Error> = None;
        let search = cfg.search_config(t);
        let outcome = ncs_minimize(
            |x: &[f64]| {
                let evaluated = (|| {
                    let xv = PruningVector::with_bound(x.to_vec(), search.upper)?;
                    let candidate = prune(&state.reference, &xv)?;
                    let features = candidate.cumulative_ratios(&model)?;
                    let accuracy = state.candidate_accuracy(&candidate, &cfg.accuracy, cfg.accuracy_eval);
                    let clock = Instant::now();
                    let b = ctx.score(&features, accuracy)?;
                    let surrogate_s = clock.elapsed().as_secs_f64();
                    Ok::<_, Error>((b, hardware_evaluation_s(&fleet, &candidate, reps), surrogate_s))
                })();
                match evaluated {
                    Ok((b, hardware_s, surrogate_s)) => {
                        log.push(Evaluation {
                            accuracy: b.accuracy,
                            latency_estimate: b.latency_estimate,
                            feasible: b.feasible,
                            hardware_s,
                            surrogate_s,
                            x: x.to_vec(),
                        });
                        b.fitness
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::INFINITY
                    }
                }
            },
            dim,
            &search,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }

        for e in &log {
            hardware_total += e.hardware_s;
            surrogate_total += e.surrogate_s;
            hardware_series.push(hardware_total);
            surrogate_series.push(surrogate_total);
        }

        // Best feasible evaluation; ties keep the earliest.
        let pick = |feasible_only: bool| {
            outcome
                .trace
                .iter()
                .filter(|entry| !feasible_only || log[entry.evaluation].feasible)
                .fold(None::<(usize, f64)>, |best, entry| match best {
                    Some((_, f)) if f <= entry.fitness => best,
                    _ => Some((entry.evaluation, entry.fitness)),
                })
        };
        let (chosen, infeasible) = match pick(true) {
            Some((i, _)) => (i, false),
            None => (pick(false).expect("at least one evaluation").0, true),
        };
        let entry = &outcome.trace[chosen];
        let chosen_eval = &log[chosen];
        let best_x = chosen_eval.x.clone();

        let x_star = PruningVector::with_bound(best_x.clone(), search.upper)?;
        let accuracy_before = chosen_eval.accuracy;
        state = fine_tune_sim(&state, &x_star)?;
        let measure_seed = seed_for(cfg, SEED_MEASURE, t as u64);
        let summary = summarize(cfg, &fleet, &partition, &state, &suite, measure_seed)?;

        iterations.push(IterationRecord {
            iteration: t,
            best_x,
            cumulative_ratios: state.reference.cumulative_ratios(&model)?,
            fitness: entry.fitness,
            surrogate_latency_estimate_ms: chosen_eval.latency_estimate,
            measured_cluster_latency_ms: summary.measured_cluster_latency_ms,
            measured_average_ms: summary.measured_average_ms,
            accuracy_before,
            accuracy_after: summary.accuracy,
            flops: summary.flops,
            infeasible,
            evaluations: log.len(),
            cumulative_hardware_s: hardware_total,
            wall_clock: IterationWallClock {
                cumulative_surrogate_s: surrogate_total,
            },
        });
    }

    let final_seed = seed_for(cfg, SEED_MEASURE, cfg.iterations as u64);
    let final_summary = summarize(cfg, &fleet, &partition, &state, &suite, final_seed)?;
    let surrogate_relative_error = (final_summary.surrogate_estimate_ms - final_summary.measured_average_ms).abs()
        / final_summary.measured_average_ms;

    let mut cluster_rows = distribution_rows("baseline", &fleet, &partition, &model, reps, seed_for(cfg, SEED_MEASURE, 0));
    cluster_rows.extend(distribution_rows("final", &fleet, &partition, &state.reference, reps, final_seed));

    let hardware_evaluation = hardware_evaluation_s(&fleet, &model, reps);
    let prediction_s = time_prediction(&suite, dim, seed_for(cfg, SEED_TIMING, 0))?;

    Ok(RunReport {
        config: cfg.clone(),
        model_name: model.name.clone(),
        eps,
        clusters: partition.k,
        partition: partition.to_export(&fleet)?,
        baseline,
        iterations,
        final_summary,
        final_model: state.reference.clone(),
        surrogate_relative_error,
        cluster_latency: cluster_rows,
        mape,
        acceleration: AccelerationTable {
            training_measurements: cfg.samples * fleet.len(),
            surrogate_evaluations: hardware_series.len(),
            hardware_evaluation_s: hardware_evaluation,
            wall_clock: AccelerationWallClock {
                prediction_s,
                acceleration: hardware_evaluation / prediction_s.max(f64::MIN_POSITIVE),
            },
        },
        eval_time: EvalTimeSeries {
            hardware_s: hardware_series,
            wall_clock: EvalTimeWallClock {
                surrogate_s: surrogate_series,
            },
        },
        fleet,
        wall_clock: RunWallClock {
            surrogate_training_s: training_s,
            total_s: started.elapsed().as_secs_f64(),
        },
    })
}

/// Mean wall time of one fleet-average estimate over a batch of vectors.
pub fn time_prediction(suite: &SurrogateSuite<f64>, dim: usize, seed: u64) -> Result<f64> {
    let vectors = sample_pruning_vectors(dim, 2000, X_MAX, seed);
    let mut sink = 0.0;
    let clock = Instant::now();
    for v in &vectors {
        sink += suite.estimate_average_latency(v.values())?;
    }
    let elapsed = clock.elapsed().as_secs_f64();
    std::hint::black_box(sink);
    Ok(elapsed / vectors.len() as f64)
}
