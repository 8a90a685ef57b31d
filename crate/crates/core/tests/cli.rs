use std::path::Path;
use std::process::{Command, Output};

fn hdap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdap")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{"iterations": 2, "samples": 200, "mape_train": 30, "mape_test": 10,
            "ncs": {"generations": 5},
            "fleet": {"n_devices": 18, "reps": 5}}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn model_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/vgg_small.json").to_string()
}

#[test]
fn stage_by_stage_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = small_config(dir.path());
    let model = model_path();

    let o = hdap(&["--config", &cfg, "--seed", "3", "--out", out, "simulate-fleet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fleet = dir.path().join("fleet.json");
    let fleet = fleet.to_str().unwrap();

    let o = hdap(&["--config", &cfg, "--out", out, "cluster", "--fleet", fleet, "--benchmark", &model]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let partition: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("partition.json")).unwrap()).unwrap();
    assert_eq!(partition["assignments"].as_object().unwrap().len(), 18);

    let o = hdap(&["--config", &cfg, "--out", out, "collect", "--fleet", fleet, "--model", &model, "--samples", "60"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let data = dir.path().join("dataset.json");
    let part = dir.path().join("partition.json");
    let o = hdap(&[
        "--config", &cfg, "--out", out, "train-surrogate", "--mode", "clustering",
        "--dataset", data.to_str().unwrap(), "--fleet", fleet, "--partition", part.to_str().unwrap(),
        "--model", &model,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let suite = dir.path().join("suite.json");
    let o = hdap(&["--config", &cfg, "--out", out, "search", "--suite", suite.to_str().unwrap(), "--model", &model]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 10 * 6);
    assert!(trace.starts_with("generation,individual,fitness,accuracy,latency_estimate,accepted"));
}

#[test]
fn run_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run_dir = dir.path().join("run");
    let o = hdap(&["--config", &cfg, "--seed", "1", "--out", run_dir.to_str().unwrap(), "run"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let again = dir.path().join("again");
    let run_json = run_dir.join("run.json");
    let o = hdap(&["--out", again.to_str().unwrap(), "report", "--run", run_json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["iterations.csv", "cluster_latency.csv", "eval_time.csv", "mape.csv"] {
        assert_eq!(
            std::fs::read(run_dir.join(name)).unwrap(),
            std::fs::read(again.join(name)).unwrap()
        );
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"alpha": 2.0}"#).unwrap();
    assert_eq!(code(&hdap(&["--config", bad.to_str().unwrap(), "--out", out, "run"])), 2);

    let malformed = dir.path().join("malformed.json");
    std::fs::write(&malformed, "{not json").unwrap();
    assert_eq!(code(&hdap(&["--config", malformed.to_str().unwrap(), "run"])), 2);

    let o = hdap(&["--out", out, "train-surrogate", "--mode", "bogus"]);
    assert_eq!(code(&o), 2);

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&hdap(&["--config", missing.to_str().unwrap(), "run"])), 4);

    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "x").unwrap();
    let o = hdap(&["--out", blocker.join("sub").to_str().unwrap(), "simulate-fleet"]);
    assert_eq!(code(&o), 4);
}
