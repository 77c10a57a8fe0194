use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pulsemu"))
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    let v = run(&["--version"]);
    assert_eq!(code(&v), 0);
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["transpile"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["transpile", "no/such/file.qasm", "--out-dir", out])), 1);
    let o = run(&["transpile", corpus("bell.qasm").to_str().unwrap(), "--platform", "nope", "--out-dir", out]);
    assert_eq!(code(&o), 1);
}

#[test]
fn parse_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("invalid/unknown_gate.qasm");
    let o = run(&["transpile", f.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with(&format!("{}:3:1:", f.display())), "{err}");

    let bad = dir.path().join("native.json");
    std::fs::write(&bad, "{ \"circuit\": ").unwrap();
    let o = run(&["compile", bad.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn too_wide_circuit_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["transpile", corpus("qft4.qasm").to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn staged_commands_match_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let staged = d.join("staged");
    let whole = d.join("whole");
    let bell = corpus("bell.qasm");
    let sim = ["--no-noise", "--output-dt", "2"];

    let o = run(&["transpile", bell.to_str().unwrap(), "--out-dir", staged.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["native.json", "native_unfolded.json", "transpile_report.json"] {
        assert!(staged.join(f).exists(), "{f}");
    }
    let native = staged.join("native.json");
    let o = run(&["compile", native.to_str().unwrap(), "--out-dir", staged.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let sched = staged.join("schedule.json");
    let mut args = vec!["simulate", sched.to_str().unwrap(), "--out-dir", staged.to_str().unwrap()];
    args.extend(sim);
    assert_eq!(code(&run(&args)), 0);

    let mut args = vec!["run", bell.to_str().unwrap(), "--out-dir", whole.to_str().unwrap()];
    args.extend(sim);
    assert_eq!(code(&run(&args)), 0);

    for f in ["native.json", "schedule.json", "counts.json", "populations.csv", "state.json"] {
        let a = std::fs::read(staged.join(f)).unwrap();
        let b = std::fs::read(whole.join(f)).unwrap();
        assert!(a == b, "{f} differs between staged and full runs");
    }

    let s = json(&sched);
    assert_eq!(s["total_duration_ns"], 1272.0);
    assert_eq!(s["pulses"].as_array().unwrap().len(), 6);

    let counts = json(&whole.join("counts.json"));
    let total: u64 = counts["counts"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 1000);

    let manifest = json(&whole.join("manifest.json"));
    assert_eq!(manifest["tool"], "pulsemu");
    let arts = manifest["artifacts"].as_object().unwrap();
    for k in ["native", "schedule", "counts", "populations", "state", "metrics"] {
        let entry = &arts[k];
        let bytes = std::fs::read(whole.join(entry["path"].as_str().unwrap())).unwrap();
        use sha2::Digest;
        assert_eq!(entry["sha256"].as_str().unwrap(), hex::encode(sha2::Sha256::digest(&bytes)), "{k}");
    }
    let header = std::fs::read_to_string(whole.join("populations.csv")).unwrap();
    assert!(header.starts_with("time_ns,00,01,10,11,leakage\n"));
}

#[test]
fn run_with_validation_passes_on_bell() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "run",
        corpus("bell.qasm").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--output-dt",
        "1",
        "--validate",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&dir.path().join("validation.json"));
    let verdicts = v["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 4);
    assert!(verdicts.iter().all(|v| v["passed"] == true));

    let m = json(&dir.path().join("metrics.json"));
    let f = m["instants"]["readout_onset"]["fidelity"].as_f64().unwrap();
    assert!(f > 0.98 && f < 1.0, "{f}");
}

#[test]
fn validate_flags_a_tampered_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bell = corpus("bell.qasm");
    let o = run(&["run", bell.to_str().unwrap(), "--out-dir", d.to_str().unwrap(), "--no-noise", "--output-dt", "4"]);
    assert_eq!(code(&o), 0);

    let sched = d.join("schedule.json");
    let mut s = json(&sched);
    s["pulses"][1]["phase_rad"] = serde_json::json!(0.3);
    let tampered = d.join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&s).unwrap()).unwrap();

    let check = |schedule: &Path| {
        run(&[
            "validate",
            bell.to_str().unwrap(),
            "--native",
            d.join("native.json").to_str().unwrap(),
            "--schedule",
            schedule.to_str().unwrap(),
            "--state",
            d.join("state.json").to_str().unwrap(),
            "--out-dir",
            d.join("v").to_str().unwrap(),
        ])
    };
    assert_eq!(code(&check(&sched)), 0);
    assert_eq!(code(&check(&tampered)), 3);
}

#[test]
fn bundled_and_file_platforms_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../platforms/anyon_2q.json");
    let bell = corpus("bell.qasm");
    for (name, platform) in [("a", "anyon_2q"), ("b", file.to_str().unwrap())] {
        let o = run(&["transpile", bell.to_str().unwrap(), "--platform", platform, "--out-dir", d.join(name).to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(std::fs::read(d.join("a/native.json")).unwrap(), std::fs::read(d.join("b/native.json")).unwrap());
}
