use eigencert::ansatz::{self, AnsatzSpec};
use eigencert::cost::{f_q, f_q_sampled_circuit};
use eigencert::harness::config::ExperimentConfig;
use eigencert::harness::emit::{read_csv, Manifest, OutputDir};
use eigencert::harness::{report, studies};
use eigencert::optimizer::{minimize, Termination};
use eigencert::rng::{rng_from_seed, unit_f64};
use eigencert::spectral::{closest_eigenstate, diagonalize};
use eigencert::{BfgsConfig, CostFunction, CostKind, CostMode, CostSpec, Evolution, ModelSpec, ShotPlan, TfimSpec};

fn tfim3() -> ExperimentConfig {
    ExperimentConfig {
        model: ModelSpec::Tfim(TfimSpec::new(3, 1.0, 1.0)),
        ansatz: AnsatzSpec::new(3, 2),
        restarts: 4,
        seed: 11,
        ..ExperimentConfig::default()
    }
}

#[test]
fn both_costs_reach_an_eigenvector() {
    let h = tfim3().model.hamiltonian().unwrap();
    let spectrum = diagonalize(&h).unwrap();
    let spec = AnsatzSpec::new(3, 2);
    let mut rng = rng_from_seed(1);
    let x0: Vec<f64> = (0..spec.num_params()).map(|_| std::f64::consts::TAU * unit_f64(&mut rng)).collect();
    for kind in [CostKind::Variance, CostKind::Unitary] {
        let cf = CostFunction::new(CostSpec::new(kind, h.clone(), 1.0), spec).unwrap();
        let rec = minimize(&cf, &x0, &BfgsConfig::default()).unwrap();
        assert_eq!(rec.termination, Termination::Converged, "{kind:?}");
        assert!(rec.final_cost < 1e-6);
        let psi = ansatz::prepare(&spec, &rec.final_params).unwrap();
        assert!(closest_eigenstate(&psi, &spectrum).unwrap().overlap > 0.999);
    }
}

#[test]
fn sampled_unitary_cost_paths_agree() {
    let h = tfim3().model.hamiltonian().unwrap();
    let spec = AnsatzSpec::new(3, 2);
    let circuit = ansatz::build(&spec).unwrap();
    let mut rng = rng_from_seed(2);
    let params: Vec<f64> = (0..spec.num_params()).map(|_| std::f64::consts::TAU * unit_f64(&mut rng)).collect();
    let psi = circuit.run(&params).unwrap();
    let plan = ShotPlan::new(500, 99).unwrap();
    let by_state = f_q(&psi, &h, 0.8, &CostMode::Sampled { plan, evolution: Evolution::Exact }).unwrap();
    let by_circuit = f_q_sampled_circuit(&circuit, &params, &h, 0.8, &plan, &Evolution::Exact).unwrap();
    assert_eq!(by_state, by_circuit);
    let exact = f_q(&psi, &h, 0.8, &CostMode::Exact).unwrap();
    assert!((by_state - exact).abs() < 0.1);
}

#[test]
fn model_study_outputs_round_trip() {
    let cfg = tfim3();
    let study = studies::run_model_study(&cfg, &[CostKind::Variance, CostKind::Unitary]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut out = OutputDir::create(dir.path()).unwrap();
    report::write_model_study(&mut out, &cfg, std::slice::from_ref(&study)).unwrap();

    let (headers, rows) = read_csv(&dir.path().join("runs.csv")).unwrap();
    assert_eq!(rows.len(), 2 * cfg.restarts);
    let col = headers.iter().position(|h| h == "overlap_final").unwrap();
    for (row, run) in rows.iter().zip(study.arms.iter().flat_map(|a| &a.runs)) {
        assert_eq!(row[col].parse::<f64>().unwrap().to_bits(), run.overlap_final.to_bits());
    }
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let echoed: ExperimentConfig = serde_json::from_value(manifest.config).unwrap();
    assert_eq!(echoed, cfg);
    assert_eq!(manifest.seeds.len(), 2 * cfg.restarts);
    assert!(manifest.outputs.contains(&"gains.svg".to_string()));
    assert!(std::fs::read_to_string(dir.path().join("gains.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn studies_are_deterministic() {
    let cfg = tfim3();
    let a = studies::run_field_sweep(&cfg, &[0.5, 1.2], &[CostKind::Unitary]).unwrap();
    let b = studies::run_field_sweep(&cfg, &[0.5, 1.2], &[CostKind::Unitary]).unwrap();
    assert_eq!(a, b);
    let other = studies::run_field_sweep(&ExperimentConfig { seed: 12, ..cfg }, &[0.5, 1.2], &[CostKind::Unitary]).unwrap();
    assert_ne!(a.arms[0].1.records[0].initial_params, other.arms[0].1.records[0].initial_params);
}

#[test]
fn trotterized_cost_can_be_optimized() {
    let cfg = ExperimentConfig { trotter: Some(8), restarts: 1, ..tfim3() };
    let h = cfg.model.hamiltonian().unwrap();
    let spec = studies::cost_spec(&cfg, &h, CostKind::Unitary, 1.0).unwrap();
    assert!(matches!(spec.mode, CostMode::Trotter { steps: 8, .. }));
    let cf = CostFunction::new(spec, cfg.ansatz).unwrap();
    let rec = minimize(&cf, &vec![0.3; cfg.ansatz.num_params()], &cfg.bfgs).unwrap();
    assert!(rec.final_cost < rec.initial_cost());
}
