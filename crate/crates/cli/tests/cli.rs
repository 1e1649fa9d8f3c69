use std::path::Path;
use std::process::{Command, Output};

fn rigidity(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidity"))
        .args(args)
        .current_dir(dir)
        .env_remove("SBVRIG_CONFIG")
        .env_remove("SBVRIG_EPS")
        .env_remove("SBVRIG_RHO")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_then_decompose_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = rigidity(&["gen", "pwrigid", "--seed", "4", "--pieces", "3", "--n", "64", "--labels", "truth.csv", "-o", "y.json"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = rigidity(&["decompose", "-i", "y.json", "-o", "run"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let report = json(&d.join("run/report.json"));
    assert_eq!(report["pieces"].as_array().unwrap().len(), 3);
    assert!(report["u_L2_sq"].as_f64().unwrap() < 1e-9);
    let motions = json(&d.join("run/motions.json"));
    assert_eq!(motions.as_array().unwrap().len(), 3);
    assert!(motions[0]["R"].is_array() && motions[0]["c"].is_array());

    let labels = std::fs::read_to_string(d.join("run/labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 64);
    assert!(labels.lines().all(|l| l.split(',').count() == 64));
    let sep = std::fs::read_to_string(d.join("run/separator.csv")).unwrap();
    assert!(sep.starts_with("id,x0,y0,x1,y1"));
    assert!(sep.lines().count() > 1);
    let trace = std::fs::read_to_string(d.join("run/trace.jsonl")).unwrap();
    assert!(trace.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    assert_eq!(std::fs::read_to_string(d.join("truth.csv")).unwrap().lines().count(), 64);
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(rigidity(&["gen", "pwrigid", "--seed", "9", "--n", "64", "-o", "y.json"], d).status.success());
    assert!(rigidity(&["--threads", "1", "decompose", "-i", "y.json", "-o", "a"], d).status.success());
    assert!(rigidity(&["--threads", "4", "decompose", "-i", "y.json", "-o", "b"], d).status.success());
    for f in ["report.json", "labels.csv", "motions.json", "separator.csv", "trace.jsonl"] {
        assert_eq!(std::fs::read(d.join("a").join(f)).unwrap(), std::fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rigidity(&["decompose", "-i", "nope.json", "-o", "run"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn infeasible_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"t": 0.5, "rho": 0.1}"#).unwrap();
    assert_eq!(rigidity(&["schedule", "-c", "bad.json"], d).status.code(), Some(2));
    assert!(rigidity(&["gen", "beam", "--delta", "0.1", "-o", "y.json"], d).status.success());
    assert_eq!(rigidity(&["decompose", "-i", "y.json", "-c", "bad.json", "-o", "run"], d).status.code(), Some(2));
    std::fs::write(d.join("typo.json"), r#"{"rhoo": 0.1}"#).unwrap();
    assert_eq!(rigidity(&["schedule", "-c", "typo.json"], d).status.code(), Some(2));
}

#[test]
fn schedule_and_energy_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = rigidity(&["schedule", "--norm0", "2"], d);
    assert!(out.status.success());
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(s["q_identity_defect"].as_f64().unwrap() <= 1e-12);

    assert!(rigidity(&["gen", "twopiece", "--eps", "1e-3", "-o", "y.json"], d).status.success());
    let out = rigidity(&["energy", "-i", "y.json", "--eps", "1e-3", "--rho", "0.1"], d);
    assert!(out.status.success());
    let e: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let surface = e["surface"].as_f64().unwrap();
    assert!((surface - (2.0 + 0.1)).abs() < 0.05, "{surface}");
    assert!(e["relaxed_surface"].as_f64().unwrap() <= surface);
}

#[test]
fn probes_write_csv_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(rigidity(&["probe", "constant", "--cells-per-delta", "32", "-o", "p.csv"], d).status.success());
    let fit = json(&d.join("p.fit.json"));
    assert!((fit["fit"]["slope"].as_f64().unwrap() + 2.0).abs() < 0.15);
    assert_eq!(std::fs::read_to_string(d.join("p.csv")).unwrap().lines().count(), 4);
    assert!(rigidity(&["probe", "strip", "--eps", "1e-3,1e-4,1e-5", "-o", "s.csv"], d).status.success());
    assert_eq!(std::fs::read_to_string(d.join("s.csv")).unwrap().lines().count(), 4);
}
