use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn infonet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infonet"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn stats_writes_one_row_per_asset() {
    let tmp = tempfile::tempdir().unwrap();
    let input = fixture("two_assets");
    let o = infonet(tmp.path(), &["stats", input.to_str().unwrap(), "--out", "o"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("o/stats.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("AAA,78,"));
    let doc = json(&tmp.path().join("o/stats.json"));
    assert_eq!(doc["assets"].as_array().unwrap().len(), 2);
    assert_eq!(doc["kurtosis_convention"], "excess");
}

#[test]
fn empty_input_dir_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("empty")).unwrap();
    let o = infonet(tmp.path(), &["stats", "empty"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no input series"), "{}", stderr(&o));
    assert!(stderr(&o).contains("inputs"));
}

#[test]
fn bad_flag_value_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = infonet(tmp.path(), &["analyze", "--strategy", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = infonet(tmp.path(), &["analyze", "--bins", "1", fixture("two_assets").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bins"));
}

#[test]
fn analyze_correlation_writes_matrix_graph_and_heatmap() {
    let tmp = tempfile::tempdir().unwrap();
    let input = fixture("two_assets");
    let o = infonet(
        tmp.path(),
        &["analyze", input.to_str().unwrap(), "--measures", "corr", "--out", "o"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        names(&tmp.path().join("o")),
        ["correlation.csv", "correlation.dot", "correlation.json", "correlation.svg"]
    );
    let doc = json(&tmp.path().join("o/correlation.json"));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["asset_ids"], serde_json::json!(["AAA", "BBB"]));
    assert_eq!(doc["params"]["samples"], 78);
    assert_eq!(doc["config"]["measures"], serde_json::json!(["correlation"]));
    let dot = fs::read_to_string(tmp.path().join("o/correlation.dot")).unwrap();
    assert!(dot.contains("graph {"));
    assert!(!dot.contains("digraph"));
}

#[test]
fn rerun_from_embedded_config_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let input = fixture("two_assets");
    let o = infonet(
        tmp.path(),
        &["analyze", input.to_str().unwrap(), "--measures", "te,mi", "--bins", "4", "--surrogates", "3", "--out", "o"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let before: Vec<Vec<u8>> = names(&tmp.path().join("o"))
        .iter()
        .map(|n| fs::read(tmp.path().join("o").join(n)).unwrap())
        .collect();
    fs::copy(tmp.path().join("o/transfer_entropy.csv"), tmp.path().join("saved.csv")).unwrap();
    fs::remove_dir_all(tmp.path().join("o")).unwrap();

    let o = infonet(tmp.path(), &["analyze", "--config", "saved.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let after: Vec<Vec<u8>> = names(&tmp.path().join("o"))
        .iter()
        .map(|n| fs::read(tmp.path().join("o").join(n)).unwrap())
        .collect();
    assert_eq!(before, after);
}

#[test]
fn toml_config_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let input = fixture("two_assets");
    fs::write(
        tmp.path().join("run.toml"),
        format!(
            "version = 1\ninputs = [{:?}]\nmeasures = [\"mutual_information\"]\nout = \"from_config\"\nformats = [\"json\"]\n\n[estimator]\nbins = 3\n",
            input.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = infonet(tmp.path(), &["analyze", "--config", "run.toml", "--bins", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(names(&tmp.path().join("from_config")), ["mutual_information.json"]);
    let doc = json(&tmp.path().join("from_config/mutual_information.json"));
    assert_eq!(doc["params"]["bins"], 5);
    assert_eq!(doc["config"]["estimator"]["bins"], 5);
}

#[test]
fn evolve_with_one_segment_matches_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let input = fixture("two_assets");
    let input = input.to_str().unwrap();
    let o = infonet(tmp.path(), &["analyze", input, "--bins", "4", "--out", "a"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = infonet(tmp.path(), &["evolve", input, "--bins", "4", "--windows", "1", "--out", "e"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for m in ["correlation", "mutual_information", "transfer_entropy", "km_drift"] {
        let a = json(&tmp.path().join(format!("a/{m}.json")));
        let e = json(&tmp.path().join(format!("e/{m}_evolution.json")));
        assert_eq!(e["windows"].as_array().unwrap().len(), 1);
        assert_eq!(a["values"], e["windows"][0]["values"], "{m}");
    }
    let long = fs::read_to_string(tmp.path().join("e/transfer_entropy_evolution.csv")).unwrap();
    assert!(long
        .lines()
        .any(|l| l == "window_start,window_end,from_asset,to_asset,value"));
}

#[test]
fn sliding_window_longer_than_sample_fails_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let input = fixture("two_assets");
    let o = infonet(tmp.path(), &["evolve", input.to_str().unwrap(), "--windows", "sliding:500:10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does not fit"), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn simulate_then_analyze_te_and_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let o = infonet(
        tmp.path(),
        &["simulate", "--kind", "regime_shift", "--epsilon", "0.1", "--steps", "4000", "--seed", "5", "--out", "panel"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(names(&tmp.path().join("panel")), ["x1.csv", "x2.csv"]);

    let o = infonet(
        tmp.path(),
        &["analyze", "panel", "--measures", "te,km", "--format", "json", "--strategy", "equal_width", "--bins", "2", "--out", "res"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(names(&tmp.path().join("res")), ["km_drift.json", "transfer_entropy.json"]);
    let te = json(&tmp.path().join("res/transfer_entropy.json"));
    assert_eq!(te["directed"], true);
    assert_eq!(te["units"], "bits");
    assert!(te["params"]["bin_edges"]["x1"].is_array());
    // two equal-width bins split the ±1% moves at zero; x drives y in the second half
    let v = &te["values"];
    assert!(v[1][0].as_f64().unwrap() > 0.1);
    assert!(v[0][1].as_f64().unwrap() < 0.01);
    let km = json(&tmp.path().join("res/km_drift.json"));
    assert_eq!(km["params"]["lag"], 1);
}

#[test]
fn unstable_process_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = infonet(
        tmp.path(),
        &["simulate", "--kind", "ou_euler", "--matrix", "0.1,0;0,-1", "--sigma", "0.1", "--dt-sim", "0.01", "--steps", "100"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unstable"), "{}", stderr(&o));
}

#[test]
fn failing_measure_leaves_no_files_and_others_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("dup");
    fs::create_dir(&dir).unwrap();
    let aaa = fixture("two_assets/AAA.csv");
    fs::copy(&aaa, dir.join("A1.csv")).unwrap();
    fs::copy(&aaa, dir.join("A2.csv")).unwrap();
    // identical columns make the drift moment matrix singular
    let o = infonet(tmp.path(), &["analyze", "dup", "--measures", "corr,km", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("singular"), "{}", stderr(&o));
    let files = names(&tmp.path().join("o"));
    assert!(files.iter().all(|f| f.starts_with("correlation.")), "{files:?}");
    assert_eq!(files.len(), 4);
}
