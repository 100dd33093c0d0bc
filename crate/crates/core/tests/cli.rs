use std::process::Command;

fn digisub(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_digisub")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn config(name: &str) -> String {
    format!("{}/../../configs/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn help_lists_defaults_and_exits_zero() {
    let (code, out, _) = digisub(&["--help"]);
    assert_eq!(code, 0);
    for key in ["collection_delay_s = 2.0", "normal_samples = 320", "test_fraction = 0.1", "Exit codes"] {
        assert!(out.contains(key), "{key} missing from help");
    }
    for sub in ["gen-dataset", "train", "eval", "run-scenario", "inspect-frame"] {
        assert!(out.contains(sub));
        assert_eq!(digisub(&[sub, "--help"]).0, 0);
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(digisub(&[]).0, 1);
    assert_eq!(digisub(&["bogus"]).0, 1);
    assert_eq!(digisub(&["gen-dataset", "--seed", "x"]).0, 1);
    let (code, _, err) = digisub(&["gen-dataset"]);
    assert_eq!(code, 1);
    assert!(err.contains("seed"));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.csv");
    let (code, _, err) = digisub(&["train", "--dataset", missing.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("none.csv"), "{err}");
    assert_eq!(digisub(&["inspect-frame", "zz"]).0, 2);
    let (code, _, err) = digisub(&["inspect-frame", "ffffffffffff02000000000108004500001c"]);
    assert_eq!(code, 2);
    assert!(err.contains("unsupported Ethertype 0x0800"));
    // attack scenario without a model
    assert_eq!(digisub(&["run-scenario", "--config", &config("fdi_sv_bus8"), "--out", dir.path().to_str().unwrap()]).0, 2);
}

#[test]
fn scenario_writes_log_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, out, _) = digisub(&["run-scenario", "--config", &config("fault_line_7_8"), "--out", d]);
    assert_eq!(code, 0, "{out}");
    let verdict = std::fs::read_to_string(dir.path().join("verdict.txt")).unwrap();
    assert_eq!(verdict, out);
    assert!(verdict.ends_with("VERDICT: PASS\n"));
    let log = std::fs::read_to_string(dir.path().join("events.log")).unwrap();
    assert!(log.contains("FAULT_APPLIED") && log.contains("CB_OPENED"), "{log}");
}

#[test]
fn failed_verdict_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "seed = 1\nduration_s = 1.0\n[event]\nkind = \"fault\"\nstart_s = 0.5\n[event.fault]\nbranch = 14\nlocation = 0.5\nimpedance_ohm = 1e6\nfault_type = \"B-gnd\"\n",
    )
    .unwrap();
    let (code, out, _) = digisub(&["run-scenario", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 3, "{out}");
    assert!(out.contains("VERDICT: FAIL"));
}

#[test]
fn small_pipeline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, out, err) = digisub(&["gen-dataset", "--seed", "4", "--normal", "8", "--conditions", "0,1,2,3,40,41", "--out", d]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("class_0 = 8") && out.contains("class_11 = 6"), "{out}");
    let csv = dir.path().join("dataset.csv");
    let (code, out, err) = digisub(&["train", "--seed", "4", "--dataset", csv.to_str().unwrap(), "--out", d]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("selected"), "{out}");
    for f in ["model.txt", "model_dt.txt", "model_svm.txt", "model_knn.txt", "model_nn.txt", "report.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let model = dir.path().join("model.txt");
    let (code, out, err) = digisub(&["eval", "--all", "--model", model.to_str().unwrap(), "--dataset", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("samples\t20") && out.contains("accuracy"), "{out}");
    let (code, _, err) = digisub(&["eval", "--model", csv.to_str().unwrap(), "--dataset", csv.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}
