use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TOP_LEVEL_KEYS: [&str; 8] =
    ["audits", "calibration", "command", "config_echo", "metrics", "schema_version", "seed", "wall_time_ms"];

fn flatrsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatrsp")).args(args).output().expect("binary runs")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Runs `args` writing the document to `dir/name` and returns its path.
fn run_to(dir: &TempDir, name: &str, args: &[&str]) -> (PathBuf, Output) {
    let path = dir.path().join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--out", &p]);
    let out = flatrsp(&full);
    (path, out)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn without_wall_time(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"wall_time_ms\"")).collect::<Vec<_>>().join("\n")
}

const KRAUS: [&str; 9] = ["kraus", "--d", "4", "--k", "1", "--eps", "0.25", "--trials", "40"];

#[test]
fn kraus_document_has_schema_shape() {
    let dir = TempDir::new().unwrap();
    let (path, out) = run_to(&dir, "k.json", &[&KRAUS[..], &["--seed", "42"]].concat());
    assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&path);
    let mut keys: Vec<&str> = doc.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, TOP_LEVEL_KEYS);
    assert_eq!(doc["command"], "kraus");
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["config_echo"]["command"], "kraus");
    assert_eq!(doc["config_echo"]["d"], 4);
    let report = &doc["metrics"]["resource_report"];
    assert_eq!(report["config_echo"], doc["config_echo"]);
    let est = &report["error_estimate"];
    let bound = 0.25 + 3.0 * est["eps_a_stderr"].as_f64().unwrap();
    assert!(est["eps_a"].as_f64().unwrap() <= bound);
    assert_eq!(doc["audits"][0]["name"], "average_error");
    // every float carries 17 significant digits
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"eps\": 2.5000000000000000e-1"));
}

#[test]
fn same_seed_gives_identical_documents() {
    let dir = TempDir::new().unwrap();
    let (a, _) = run_to(&dir, "a.json", &KRAUS);
    let (b, _) = run_to(&dir, "b.json", &KRAUS);
    let (c, _) = run_to(&dir, "c.json", &[&KRAUS[..], &["--seed", "1"]].concat());
    let read = |p: &Path| without_wall_time(&fs::read_to_string(p).unwrap());
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let args = ["reject", "--d", "4", "--k", "2", "--eps", "0.3", "--trials", "30", "--adversarial-sweep", "10"];
    let (one, _) = run_to(&dir, "one.json", &[&args[..], &["--threads", "1"]].concat());
    let (eight, _) = run_to(&dir, "eight.json", &[&args[..], &["--threads", "8"]].concat());
    let read = |p: &Path| without_wall_time(&fs::read_to_string(p).unwrap());
    assert_eq!(read(&one), read(&eight));
    let replayed = flatrsp(&["--threads", "8", "replay", one.to_str().unwrap()]);
    assert_eq!(status(&replayed), 0, "{}", String::from_utf8_lossy(&replayed.stderr));
}

#[test]
fn replay_detects_tampering_and_schema_mismatch() {
    let dir = TempDir::new().unwrap();
    let (path, _) = run_to(&dir, "k.json", &KRAUS);
    assert_eq!(status(&flatrsp(&["replay", path.to_str().unwrap()])), 0);

    let text = fs::read_to_string(&path).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    let eps_a = doc["metrics"]["resource_report"]["error_estimate"]["eps_a"].as_f64().unwrap();
    doc["metrics"]["resource_report"]["error_estimate"]["eps_a"] = Value::from(eps_a * (1.0 + 1e-15));
    let tampered = dir.path().join("tampered.json");
    fs::write(&tampered, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = flatrsp(&["replay", tampered.to_str().unwrap()]);
    assert_eq!(status(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps_a"));

    // a different run time alone is not a mismatch
    let mut timed = doc.clone();
    timed["metrics"]["resource_report"]["error_estimate"]["eps_a"] = Value::from(eps_a);
    timed["wall_time_ms"] = Value::from(123_456u64);
    let retimed = dir.path().join("retimed.json");
    fs::write(&retimed, serde_json::to_string(&timed).unwrap()).unwrap();
    assert_eq!(status(&flatrsp(&["replay", retimed.to_str().unwrap()])), 0);

    doc["schema_version"] = Value::from(99);
    let future = dir.path().join("future.json");
    fs::write(&future, serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(status(&flatrsp(&["replay", future.to_str().unwrap()])), 65);

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "not json").unwrap();
    assert_eq!(status(&flatrsp(&["replay", garbage.to_str().unwrap()])), 65);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(status(&flatrsp(&["kraus", "--k", "1"])), 64);
    assert_eq!(status(&flatrsp(&["kraus", "--d", "4", "--k", "5"])), 64);
    assert_eq!(status(&flatrsp(&["kraus", "--d", "4", "--eps", "1.5"])), 64);
    assert_eq!(status(&flatrsp(&["kraus", "--d", "4", "--calib", "no_such_constant=1"])), 64);
    assert_eq!(status(&flatrsp(&["no-such-command"])), 64);
    assert_eq!(status(&flatrsp(&["--help"])), 0);
}

#[test]
fn construction_failure_exits_1() {
    // a single unitary cannot bring the failure probability of a rank-1 input below 0.25
    let out = flatrsp(&["kraus", "--d", "4", "--N", "1", "--trials", "5"]);
    assert_eq!(status(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("construction failed"));
}

#[test]
fn failed_audit_exits_2() {
    let dir = TempDir::new().unwrap();
    let args = ["verify-decouple", "--d1", "4", "--d2", "4", "--k", "2", "--env", "2", "--trials", "20"];
    let (_, ok) = run_to(&dir, "ok.json", &args);
    assert_eq!(status(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let (path, strict) = run_to(&dir, "strict.json", &[&args[..], &["--calib", "c_total=0.001"]].concat());
    assert_eq!(status(&strict), 2);
    let doc = read_json(&path);
    assert_eq!(doc["calibration"]["c_total"].as_f64(), Some(0.001));
    assert!(doc["audits"].as_array().unwrap().iter().any(|a| a["pass"] == false));
    // the calibration override is echoed, so replay reproduces the failing audit exactly
    assert_eq!(status(&flatrsp(&["replay", path.to_str().unwrap()])), 0);
}

#[test]
fn csv_has_one_row_per_trial() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("trials.csv");
    let (_, out) =
        run_to(&dir, "k.json", &[&KRAUS[..], &["--adversarial-sweep", "5", "--csv", csv.to_str().unwrap()]].concat());
    assert_eq!(status(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "trial_index,input_hash,per_input_error,message_index_distribution_entropy");
    assert_eq!(lines.len(), 1 + 40 + 5);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[0], "0");
    assert!(fields[2].parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn dump_states_writes_complex_pairs() {
    let dir = TempDir::new().unwrap();
    let (path, out) = run_to(&dir, "k.json", &[&KRAUS[..], &["--dump-states"]].concat());
    assert_eq!(status(&out), 0);
    let doc = read_json(&path);
    assert_eq!(doc["config_echo"]["dump_states"], true);
    let states = &doc["metrics"]["states"];
    let outcomes = states["outcomes"].as_array().unwrap();
    assert!(!outcomes.is_empty());
    let total: f64 = outcomes.iter().map(|o| o["prob"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let rows = outcomes[0]["bob_state"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].as_array().unwrap().len(), 4);
    assert_eq!(rows[0][0].as_array().unwrap().len(), 2);
}

#[test]
fn verification_commands_pass_on_small_instances() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 6] = [
        &["verify-sdp", "--d", "3", "--cases", "12", "--restarts", "10"],
        &["verify-majorize", "--d", "4", "--prior", "4"],
        &["verify-concentration", "--d", "6", "--k", "2", "--trials", "200"],
        &["verify-concentration", "--d", "4", "--kind", "spectral", "--trials", "100"],
        &["verify-eigval", "--d", "4", "--points", "3"],
        &["audit", "--d", "8", "--k", "1", "--trials", "20"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let (path, out) = run_to(&dir, &format!("{i}.json"), args);
        assert_eq!(status(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let doc = read_json(&path);
        assert_eq!(doc["command"], args[0]);
        assert!(!doc["audits"].as_array().unwrap().is_empty());
    }
}

#[test]
fn sdp_margins_are_recorded_per_case() {
    let dir = TempDir::new().unwrap();
    let (path, out) =
        run_to(&dir, "sdp.json", &["verify-sdp", "--d", "2", "--cases", "8", "--restarts", "10", "--seed", "7"]);
    assert_eq!(status(&out), 0);
    let doc = read_json(&path);
    let cases = doc["metrics"]["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 8);
    for c in cases {
        assert!(c["margin"].as_f64().unwrap() >= -1e-6);
    }
}

#[test]
fn vacuous_audit_margin_serializes_as_null() {
    let dir = TempDir::new().unwrap();
    let (path, out) = run_to(
        &dir,
        "a.json",
        &["audit", "--protocol", "trivial", "--d", "8", "--k", "2", "--eps", "0.75", "--trials", "3"],
    );
    assert_eq!(status(&out), 0);
    let doc = read_json(&path);
    let ent = doc["audits"].as_array().unwrap().iter().find(|a| a["name"] == "entanglement").unwrap().clone();
    assert_eq!(ent["vacuous"], true);
    assert!(ent["margin"].is_null());
    assert_eq!(status(&flatrsp(&["replay", path.to_str().unwrap()])), 0);
}

#[test]
fn equality_on_a_small_codebook() {
    let dir = TempDir::new().unwrap();
    let args = [
        "eq",
        "--n",
        "4",
        "--eps",
        "0.5",
        "--d",
        "8",
        "--k",
        "2",
        "--sample-m",
        "4",
        "--overlap-bound",
        "0.5",
        "--N",
        "64",
        "--inputs",
        "3",
        "--pairs",
        "3",
    ];
    let (path, out) = run_to(&dir, "eq.json", &args);
    assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&path);
    assert_eq!(doc["metrics"]["pairs"], 9);
    assert!(doc["metrics"]["max_accept_unequal"].as_f64().unwrap() <= 0.5);
    assert_eq!(doc["metrics"]["codebook"]["d"], 8);
}

#[test]
fn unattainable_overlap_bound_is_reported() {
    // random rank-2 codewords in dimension 8 have mean overlap 1/4, far above 0.05
    let out = flatrsp(&[
        "eq",
        "--n",
        "4",
        "--eps",
        "0.1",
        "--d",
        "8",
        "--k",
        "2",
        "--sample-m",
        "4",
        "--overlap-bound",
        "0.05",
    ]);
    assert_eq!(status(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible codebook"));
}
