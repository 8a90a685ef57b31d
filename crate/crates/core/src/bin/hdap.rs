use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use hdap::cluster::ClusterPartition;
use hdap::error::{Error, Result};
use hdap::fleet::{simulate_fleet, Fleet};
use hdap::model_space::{prune, ModelSpec, PruningVector};
use hdap::pipeline::{
    cluster_fleet, emit_report, load_fleet, load_model, load_report, run_hdap, HdapConfig, TuningState,
};
use hdap::search::{ncs_minimize, write_trace_csv, FitnessContext, SearchTraceRow};
use hdap::surrogate::{build_suite_from_dataset, collect_dataset, sample_pruning_vectors, LatencyDataset, SuiteMode};
use hdap::Suite;

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "hdap", version, about = "Fleet-aware structured pruning")]
struct Cli {
    /// JSON configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (also seeds the simulated fleet).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "hdap-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a fleet and write fleet.json.
    SimulateFleet {
        #[arg(long)]
        devices: Option<usize>,
        #[arg(long)]
        groups: Option<usize>,
    },
    /// Cluster a fleet by benchmark latency and write partition.json.
    Cluster {
        #[arg(long)]
        fleet: PathBuf,
        #[arg(long)]
        benchmark: Option<PathBuf>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        min_pts: Option<usize>,
    },
    /// Measure sampled pruned models on every device and write dataset.json.
    Collect {
        #[arg(long)]
        fleet: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Fit a surrogate suite and write suite.json.
    TrainSurrogate {
        #[arg(long)]
        mode: Option<SuiteMode>,
        #[arg(long)]
        samples: Option<usize>,
        /// Reuse a collected dataset instead of measuring.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        fleet: Option<PathBuf>,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// One NCS search on a trained suite; writes trace.csv and search.json.
    Search {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// The full iterative pipeline with all report artifacts.
    Run,
    /// Re-emit the CSV and SVG artifacts of a saved run.json.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Serialize)]
struct SearchSummary {
    best_x: Vec<f64>,
    fitness: f64,
    accuracy: f64,
    latency_estimate_ms: f64,
    feasible: bool,
    evaluations: usize,
}

enum Outcome {
    Done,
    Infeasible,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(EXIT_INFEASIBLE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io { .. } => EXIT_IO,
                _ => EXIT_CONFIG,
            })
        }
    }
}

fn configure(cli: &Cli) -> Result<HdapConfig> {
    let mut cfg = match &cli.config {
        Some(p) => HdapConfig::load(p)?,
        None => HdapConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.fleet.seed = seed;
    }
    Ok(cfg)
}

fn out_path(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(dir.join(name))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        context: path.display().to_string(),
        source: e,
    })?;
    fs::write(path, text + "\n").map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn fleet_from(cfg: &HdapConfig, path: Option<&PathBuf>, benchmark: &ModelSpec) -> Result<Fleet> {
    match path {
        Some(p) => Fleet::load(p),
        None => load_fleet(cfg, benchmark),
    }
}

fn with_model(cfg: &HdapConfig, model: Option<&PathBuf>) -> HdapConfig {
    let mut cfg = cfg.clone();
    if let Some(m) = model {
        cfg.model = Some(m.clone());
    }
    cfg
}

fn execute(cli: Cli) -> Result<Outcome> {
    let cfg = configure(&cli)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::SimulateFleet { devices, groups } => {
            let mut fc = cfg.fleet.clone();
            fc.n_devices = devices.unwrap_or(fc.n_devices);
            fc.n_groups = groups.unwrap_or(fc.n_groups);
            let fleet = simulate_fleet(&fc)?;
            let path = out_path(out, "fleet.json")?;
            fleet.save(&path)?;
            println!("{} devices -> {}", fleet.len(), path.display());
        }
        Command::Cluster {
            fleet,
            benchmark,
            eps,
            min_pts,
        } => {
            let mut cfg = cfg.clone();
            if benchmark.is_some() {
                cfg.benchmark = benchmark.clone();
            }
            cfg.cluster.eps = eps.or(cfg.cluster.eps);
            cfg.cluster.min_pts = min_pts.unwrap_or(cfg.cluster.min_pts);
            cfg.validate()?;
            let (_, bench) = load_model(&cfg)?;
            let fleet = Fleet::load(fleet)?;
            let (partition, eps) = cluster_fleet(&cfg, &fleet, &bench)?;
            let path = out_path(out, "partition.json")?;
            write_json(&path, &partition.to_export(&fleet)?)?;
            println!(
                "K = {} (eps = {eps:.6} ms, sizes {:?}) -> {}",
                partition.k,
                partition.sizes(),
                path.display()
            );
        }
        Command::Collect { fleet, model, samples } => {
            let cfg = with_model(&cfg, model.as_ref());
            cfg.validate()?;
            let (model, bench) = load_model(&cfg)?;
            let fleet = fleet_from(&cfg, fleet.as_ref(), &bench)?;
            let count = samples.unwrap_or(cfg.samples);
            let seed = cfg.seed;
            let vectors = sample_pruning_vectors(model.prunable_count(), count, hdap::model_space::X_MAX, seed);
            let data = collect_dataset(&fleet, &model, &vectors, cfg.fleet.reps, seed)?;
            let path = out_path(out, "dataset.json")?;
            data.save(&path)?;
            println!("{} rows x {} devices -> {}", data.len(), data.n_devices(), path.display());
        }
        Command::TrainSurrogate {
            mode,
            samples,
            dataset,
            fleet,
            partition,
            model,
        } => {
            let mut cfg = with_model(&cfg, model.as_ref());
            cfg.samples = samples.unwrap_or(cfg.samples);
            cfg.mode = mode.unwrap_or(cfg.mode);
            cfg.validate()?;
            let (model, bench) = load_model(&cfg)?;
            let fleet = fleet_from(&cfg, fleet.as_ref(), &bench)?;
            let partition = match partition {
                Some(p) => ClusterPartition::load(p, &fleet)?,
                None => cluster_fleet(&cfg, &fleet, &bench)?.0,
            };
            let data = match dataset {
                Some(p) => LatencyDataset::load(p)?,
                None => {
                    let vectors = sample_pruning_vectors(
                        model.prunable_count(),
                        cfg.samples,
                        hdap::model_space::X_MAX,
                        cfg.seed,
                    );
                    collect_dataset(&fleet, &model, &vectors, cfg.fleet.reps, cfg.seed)?
                }
            };
            if data.device_ids != fleet.ids() {
                return Err(Error::Input("dataset devices do not match the fleet".into()));
            }
            let suite = build_suite_from_dataset(cfg.mode, &data, &partition, &cfg.surrogate)?;
            let path = out_path(out, "suite.json")?;
            suite.save(&path)?;
            println!(
                "{} suite with {} ensembles on {} rows -> {}",
                cfg.mode,
                suite.models.len(),
                data.len(),
                path.display()
            );
        }
        Command::Search { suite, model, alpha } => {
            let mut cfg = with_model(&cfg, model.as_ref());
            cfg.alpha = alpha.unwrap_or(cfg.alpha);
            cfg.validate()?;
            let (model, _) = load_model(&cfg)?;
            let suite = Suite::load(suite)?;
            if suite.n_features() != model.prunable_count() {
                return Err(Error::Dimension {
                    expected: model.prunable_count(),
                    actual: suite.n_features(),
                });
            }
            return search(&cfg, &model, &suite, out);
        }
        Command::Run => {
            let report = run_hdap(&cfg)?;
            emit_report(&report, out)?;
            println!(
                "baseline {:.4} ms -> final {:.4} ms ({:.2}x), accuracy {:.4}, {} clusters -> {}",
                report.baseline.measured_average_ms,
                report.final_summary.measured_average_ms,
                report.speedup(),
                report.final_summary.accuracy,
                report.clusters,
                out.display()
            );
            let flagged = report.infeasible_iterations();
            if !flagged.is_empty() {
                eprintln!("infeasible iterations: {flagged:?}");
                return Ok(Outcome::Infeasible);
            }
        }
        Command::Report { run } => {
            let report = load_report(run)?;
            let files = emit_report(&report, out)?;
            println!("{} files -> {}", files.len(), out.display());
        }
    }
    Ok(Outcome::Done)
}

fn search(cfg: &HdapConfig, model: &ModelSpec, suite: &Suite, out: &Path) -> Result<Outcome> {
    let state = TuningState::new(model.clone());
    let accuracy = |x: &PruningVector| {
        prune(&state.reference, x)
            .map(|c| state.candidate_accuracy(&c, &cfg.accuracy, cfg.accuracy_eval))
            .unwrap_or(0.0)
    };
    let ctx = FitnessContext::new(suite, accuracy, cfg.accuracy.base_accuracy, cfg.alpha)?;
    let mut rows = Vec::new();
    let mut failure = None;
    let outcome = ncs_minimize(
        |x: &[f64]| match PruningVector::with_bound(x.to_vec(), cfg.ncs.upper).and_then(|v| ctx.breakdown(&v)) {
            Ok(b) => {
                rows.push(b);
                b.fitness
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        model.prunable_count(),
        &cfg.ncs,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let trace: Vec<SearchTraceRow> = outcome
        .trace
        .iter()
        .map(|t| SearchTraceRow {
            generation: t.generation,
            individual: t.individual,
            fitness: t.fitness,
            accuracy: rows[t.evaluation].accuracy,
            latency_estimate: rows[t.evaluation].latency_estimate,
            accepted: t.accepted,
        })
        .collect();
    let trace_path = out_path(out, "trace.csv")?;
    let file = fs::File::create(&trace_path).map_err(|e| Error::Io {
        path: trace_path.clone(),
        source: e,
    })?;
    write_trace_csv(&trace, file)?;

    let best = ctx.breakdown(&PruningVector::with_bound(outcome.best.clone(), cfg.ncs.upper)?)?;
    let summary = SearchSummary {
        best_x: outcome.best.clone(),
        fitness: outcome.best_fitness,
        accuracy: best.accuracy,
        latency_estimate_ms: best.latency_estimate,
        feasible: best.feasible,
        evaluations: outcome.evaluations,
    };
    let path = out_path(out, "search.json")?;
    write_json(&path, &summary)?;
    println!(
        "best fitness {:.6}, estimate {:.4} ms, accuracy {:.4} -> {}",
        summary.fitness,
        summary.latency_estimate_ms,
        summary.accuracy,
        out.display()
    );
    Ok(if summary.feasible { Outcome::Done } else { Outcome::Infeasible })
}
