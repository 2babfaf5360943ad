use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_eigencert");

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).arg("--out").arg(out).output().unwrap()
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["solve", "--cost", "energy"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["solve", "--model", "heisenberg"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["solve", "--gamma", "1.5"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["sweep-time", "--times", "0"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["solve", "--field", "1e200"], dir.path()).status.code(), Some(3));
    assert_eq!(Command::new(BIN).arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small problem\nqubits = 3\nlayers = 2\nseed = 5\ncost = unitary\ntime = 0.5\n").unwrap();
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--seed", "9"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&dir.path().join("solve/manifest.json"));
    assert_eq!(m["config"]["seed"], 9);
    assert_eq!(m["config"]["ansatz"]["qubits"], 3);
    assert_eq!(m["config"]["cost"], "unitary");
    assert_eq!(m["config"]["time"], 0.5);

    std::fs::write(&cfg, "qubits = three\n").unwrap();
    let bad = run(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn diag_writes_spectrum_and_pauli_text() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["diag", "--model", "schwinger"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("diag/hamiltonian.txt")).unwrap();
    assert!(text.lines().all(|l| l.split('\t').count() == 2));
    let spectrum = std::fs::read_to_string(dir.path().join("diag/spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 17);

    // Feeding the dump back in reproduces the spectrum.
    let again = tempfile::tempdir().unwrap();
    let file = dir.path().join("diag/hamiltonian.txt");
    let out = run(&["diag", "--hamiltonian", file.to_str().unwrap()], again.path());
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(again.path().join("diag/spectrum.csv")).unwrap(), spectrum);
}

#[test]
fn small_studies_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--qubits", "3", "--layers", "1", "--restarts", "2"];
    let cases: [(&[&str], &[&str]); 4] = [
        (&["sweep-field", "--fields", "0.5,1.0"], &["sweep.csv", "runs.csv", "sweep.svg", "manifest.json"]),
        (&["sweep-time", "--times", "0.3,0.9"], &["sweep.csv", "runs.csv", "sweep.svg", "manifest.json"]),
        (&["study-multiplier", "--count", "2"], &["summary.csv", "runs.csv", "multiplier.svg", "manifest.json"]),
        (&["study-models", "--model", "tfim"], &["runs.csv", "summary.csv", "histogram.csv", "gains.svg", "manifest.json"]),
    ];
    for (args, files) in cases {
        let mut all = args.to_vec();
        all.extend(common);
        let out = run(&all, dir.path());
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        for f in files {
            assert!(dir.path().join(args[0]).join(f).exists(), "{args:?} missing {f}");
        }
    }
    let sweep = std::fs::read_to_string(dir.path().join("sweep-field/sweep.csv")).unwrap();
    assert!(sweep.starts_with("h,cost_kind,"));
    assert_eq!(sweep.lines().count(), 1 + 2 * 2);
}

#[test]
fn trotter_study_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["study-trotter", "--instances", "2", "--steps", "1,4"], dir.path());
    assert!(out.status.success());
    let table = std::fs::read_to_string(dir.path().join("study-trotter/trotter.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    let m = manifest(&dir.path().join("study-trotter/manifest.json"));
    assert_eq!(m["summary"]["normalization"], 46);
}

#[test]
fn gate_count_crossover_table() {
    let out = Command::new(BIN).args(["gate-count", "--alpha", "1.5", "--min-qubits", "5", "--max-qubits", "7"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,r,N_Q,N_H,"));
    assert_eq!(text.lines().count(), 4);
}
