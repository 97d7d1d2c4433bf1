use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shared-mobility"));
    c.env_remove("SHARED_MOBILITY_OUTPUT_DIR");
    c
}

fn fixture(parts: &[&str]) -> PathBuf {
    parts.iter().fold(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
        |p, s| p.join(s),
    )
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out-dir").arg(out).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn pipeline_writes_every_report_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixture(&["synthetic", "run.json"]);
    let config = config.to_str().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run(&["pipeline", "--config", config], dir);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let first = contents(&a);
    for name in [
        "clean_docked.csv",
        "clean_dockless.csv",
        "cleaning_report.json",
        "cells.geojson",
        "model_logistic.json",
        "model_forest.json",
        "search_log.json",
        "sampling.json",
        "introspection.json",
        "evaluation.json",
        "evaluation.txt",
        "cohorts.json",
        "cohorts.txt",
        "analytics.json",
        "analytics.csv",
    ] {
        assert!(first.contains_key(name), "missing {name}");
    }
    assert_eq!(first, contents(&b));

    let report = json(&a.join("evaluation.json"));
    let hash = report["provenance"]["config_hash"]
        .as_str()
        .unwrap()
        .to_string();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["provenance"]["seeds"]["forest"], 15);
    for (name, bytes) in &first {
        let text = String::from_utf8_lossy(bytes);
        assert!(text.contains(&hash), "{name} lacks the config hash");
    }
}

#[test]
fn subcommands_compose_to_the_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixture(&["synthetic", "run.json"]);
    let config = config.to_str().unwrap();
    let (whole, steps) = (tmp.path().join("whole"), tmp.path().join("steps"));
    assert_eq!(code(&run(&["pipeline", "--config", config], &whole)), 0);
    for sub in [
        "clean",
        "partition",
        "train",
        "evaluate",
        "classify",
        "analyze",
    ] {
        let o = run(&[sub, "--config", config], &steps);
        assert_eq!(code(&o), 0, "{sub}: {}", stderr(&o));
    }
    assert_eq!(contents(&whole), contents(&steps));
}

#[test]
fn clean_reports_one_removal_per_rule() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixture(&["rules", "run.json"]);
    let o = run(&["clean", "--config", config.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&tmp.path().join("cleaning_report.json"));
    let combined = &report["data"]["combined"];
    assert_eq!(combined["input_count"], 7);
    assert_eq!(combined["kept_count"], 2);
    for (_, n) in combined["removed_by_rule"].as_object().unwrap() {
        assert_eq!(n, 1);
    }
}

#[test]
fn evaluate_scores_reference_matrices() {
    let tmp = tempfile::tempdir().unwrap();
    let matrices = fixture(&["matrices", "published.json"]);
    let o = run(
        &["evaluate", "--matrix", matrices.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let forest = stdout.split("Metrics (forest)").nth(1).unwrap();
    let casual = forest.lines().find(|l| l.starts_with("Casual")).unwrap();
    let avg = forest
        .lines()
        .find(|l| l.starts_with("Average/total"))
        .unwrap();
    assert!(casual.contains("0.84      0.84      0.84"), "{casual}");
    assert!(avg.contains("0.84      0.84      0.84"), "{avg}");
    assert!(tmp.path().join("evaluation.json").exists());
}

#[test]
fn output_dir_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixture(&["rules", "run.json"]);
    let o = bin()
        .args(["clean", "--config", config.to_str().unwrap()])
        .env("SHARED_MOBILITY_OUTPUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(tmp.path().join("cleaning_report.json").exists());
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixture(&["rules", "run.json"]);
    let o = run(
        &[
            "clean",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "7",
            "--radius",
            "25",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&tmp.path().join("cleaning_report.json"));
    assert_eq!(report["provenance"]["seeds"]["split"], 7);
    assert_eq!(report["provenance"]["seeds"]["synth"], 7);
}

#[test]
fn synth_output_feeds_the_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let o = run(
        &["synth", "--docked-trips", "300", "--dockless-trips", "100"],
        &data,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let docked = fs::read_to_string(data.join("docked.csv")).unwrap();
    assert_eq!(docked.lines().count(), 2 + 600);
    let config = data.join("run.json");
    let o = run(
        &["clean", "--config", config.to_str().unwrap()],
        &tmp.path().join("out"),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn configuration_errors_exit_2_and_name_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["clean", "--config", "/nonexistent/run.json"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("/nonexistent/run.json"));

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"sedes": {}}"#).unwrap();
    let o = run(&["clean", "--config", bad.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.json"));

    let stations = fixture(&["rules", "stations.csv"]);
    let o = run(
        &["clean", "--stations", stations.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    let headerless = tmp.path().join("docked.csv");
    fs::write(&headerless, "start_time,end_time\n").unwrap();
    let config = fixture(&["rules", "run.json"]);
    let o = run(
        &[
            "clean",
            "--config",
            config.to_str().unwrap(),
            "--docked",
            headerless.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("docked.csv"), "{}", stderr(&o));
}

#[test]
fn data_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    // Only one labeled trip survives cleaning, so there is nothing to balance.
    let config = fixture(&["rules", "run.json"]);
    let o = run(&["train", "--config", config.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let stations = tmp.path().join("stations.csv");
    fs::write(
        &stations,
        "id,name,lat,lon\nA,a,38.9,-77.0\nB,b,not-a-number,-77.0\n",
    )
    .unwrap();
    let o = run(
        &["partition", "--stations", stations.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("stations.csv"));
}

#[test]
fn bad_rows_are_reported_but_skipped() {
    let tmp = tempfile::tempdir().unwrap();
    let src = fixture(&["rules"]);
    let docked = tmp.path().join("docked.csv");
    let mut text = fs::read_to_string(src.join("docked.csv")).unwrap();
    text.push_str("garbage,2018-03-06 08:10:00,A,B,member,W9\n");
    fs::write(&docked, text).unwrap();
    let config = src.join("run.json");
    let out = tmp.path().join("out");
    let o = run(
        &[
            "clean",
            "--config",
            config.to_str().unwrap(),
            "--docked",
            docked.to_str().unwrap(),
        ],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("docked.csv"));
    let report = json(&out.join("cleaning_report.json"));
    let errors = &report["data"]["row_errors"][0];
    assert_eq!(errors["errors"][0]["line"], 7);
    assert_eq!(report["data"]["combined"]["input_count"], 7);
}
