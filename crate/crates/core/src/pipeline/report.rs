use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};

use super::run::RunReport;
use super::svg::{bar_chart, box_chart, line_chart, BoxGroup, Series};

/// Key under which host-clock timings are stored throughout the report.
pub const WALL_CLOCK_KEY: &str = "wall_clock";

fn write_file(dir: &Path, name: &str, contents: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Input(format!("csv export: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| Error::Input(format!("csv export: {}", e.error())))
}

fn strings<const N: usize>(items: [&str; N]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Writes `run.json`, four CSV tables and one SVG chart per table into
/// `out_dir` (created if missing). Returns the written paths.
pub fn emit_report(report: &RunReport, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let json = serde_json::to_string_pretty(report).map_err(|e| Error::json("run report", e))?;
    write_file(dir, "run.json", format!("{json}\n").as_bytes(), &mut written)?;

    // iterations
    let k = report.clusters;
    let mut header = strings([
        "iteration",
        "flops",
        "fitness",
        "surrogate_latency_estimate_ms",
        "measured_average_ms",
        "accuracy_before",
        "accuracy_after",
        "infeasible",
        "evaluations",
        "cumulative_hardware_s",
        "wall_clock_cumulative_surrogate_s",
    ]);
    header.extend((1..=k).map(|c| format!("cluster_{c}_ms")));
    let rows: Vec<Vec<String>> = report
        .iterations
        .iter()
        .map(|r| {
            let mut row = vec![
                r.iteration.to_string(),
                r.flops.to_string(),
                r.fitness.to_string(),
                r.surrogate_latency_estimate_ms.to_string(),
                r.measured_average_ms.to_string(),
                r.accuracy_before.to_string(),
                r.accuracy_after.to_string(),
                r.infeasible.to_string(),
                r.evaluations.to_string(),
                r.cumulative_hardware_s.to_string(),
                r.wall_clock.cumulative_surrogate_s.to_string(),
            ];
            row.extend(r.measured_cluster_latency_ms.iter().map(f64::to_string));
            row
        })
        .collect();
    write_file(dir, "iterations.csv", &csv_bytes(&header, &rows)?, &mut written)?;
    let mut series = vec![
        Series {
            name: "measured average",
            points: report.iterations.iter().map(|r| (r.iteration as f64, r.measured_average_ms)).collect(),
        },
        Series {
            name: "surrogate estimate",
            points: report
                .iterations
                .iter()
                .map(|r| (r.iteration as f64, r.surrogate_latency_estimate_ms))
                .collect(),
        },
    ];
    let cluster_names: Vec<String> = (1..=k).map(|c| format!("cluster {c}")).collect();
    for (c, name) in cluster_names.iter().enumerate() {
        series.push(Series {
            name,
            points: report
                .iterations
                .iter()
                .filter_map(|r| r.measured_cluster_latency_ms.get(c).map(|&v| (r.iteration as f64, v)))
                .collect(),
        });
    }
    let svg = line_chart("Latency per iteration", "iteration", "latency (ms)", &series, false);
    write_file(dir, "iterations.svg", svg.as_bytes(), &mut written)?;

    // cluster latency distributions
    let header = strings(["model", "cluster", "device_id", "mean_ms", "std_ms"]);
    let rows: Vec<Vec<String>> = report
        .cluster_latency
        .iter()
        .map(|r| {
            vec![
                r.model.clone(),
                r.cluster.to_string(),
                r.device_id.clone(),
                r.mean_ms.to_string(),
                r.std_ms.to_string(),
            ]
        })
        .collect();
    write_file(dir, "cluster_latency.csv", &csv_bytes(&header, &rows)?, &mut written)?;
    let stages = ["baseline", "final"];
    let mut values: Vec<(String, usize, Vec<f64>)> = Vec::new();
    for c in 1..=k {
        for (s, stage) in stages.iter().enumerate() {
            let v = report
                .cluster_latency
                .iter()
                .filter(|r| r.cluster == c && r.model == *stage)
                .map(|r| r.mean_ms)
                .collect();
            values.push((format!("C{c}"), s, v));
        }
    }
    let groups: Vec<BoxGroup> = values
        .iter()
        .map(|(label, color, v)| BoxGroup {
            label: label.clone(),
            color: *color,
            values: v,
        })
        .collect();
    let svg = box_chart("Per-cluster latency", "latency (ms)", &groups, &stages);
    write_file(dir, "cluster_latency.svg", svg.as_bytes(), &mut written)?;

    // evaluation time
    let header = strings(["evaluation", "wall_clock_surrogate_s", "hardware_s"]);
    let surrogate = &report.eval_time.wall_clock.surrogate_s;
    let rows: Vec<Vec<String>> = report
        .eval_time
        .hardware_s
        .iter()
        .enumerate()
        .map(|(i, h)| {
            vec![
                (i + 1).to_string(),
                surrogate.get(i).map_or_else(String::new, f64::to_string),
                h.to_string(),
            ]
        })
        .collect();
    write_file(dir, "eval_time.csv", &csv_bytes(&header, &rows)?, &mut written)?;
    let series = [
        Series {
            name: "surrogate",
            points: surrogate.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect(),
        },
        Series {
            name: "hardware",
            points: report
                .eval_time
                .hardware_s
                .iter()
                .enumerate()
                .map(|(i, &v)| ((i + 1) as f64, v))
                .collect(),
        },
    ];
    let svg = line_chart("Cumulative evaluation time", "evaluation", "seconds (log scale)", &series, true);
    write_file(dir, "eval_time.svg", svg.as_bytes(), &mut written)?;

    // MAPE comparison
    let header = strings(["mode", "ensembles", "mape_percent"]);
    let rows: Vec<Vec<String>> = report
        .mape
        .iter()
        .map(|r| vec![r.mode.to_string(), r.ensembles.to_string(), r.mape_percent.to_string()])
        .collect();
    write_file(dir, "mape.csv", &csv_bytes(&header, &rows)?, &mut written)?;
    let bars: Vec<(String, f64)> = report.mape.iter().map(|r| (r.mode.to_string(), r.mape_percent)).collect();
    let svg = bar_chart("Surrogate error by mode", "MAPE (%)", &bars);
    write_file(dir, "mape.svg", svg.as_bytes(), &mut written)?;

    Ok(written)
}

pub fn load_report(path: impl AsRef<Path>) -> Result<RunReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

/// Removes every `wall_clock` entry, recursively.
pub fn strip_wall_clock(mut value: Value) -> Value {
    fn walk(v: &mut Value) {
        match v {
            Value::Object(map) => {
                map.remove(WALL_CLOCK_KEY);
                map.values_mut().for_each(walk);
            }
            Value::Array(items) => items.iter_mut().for_each(walk),
            _ => {}
        }
    }
    walk(&mut value);
    value
}
