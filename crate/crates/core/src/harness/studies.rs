//! Restart studies over models, fields, evolution times, Hamiltonian scales
//! and Trotter step counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::stats::{gain, mean, standard_error, GainReport};
use crate::ansatz;
use crate::cost::{f_h, f_q, f_q_sampled_circuit, CostFunction, CostKind, CostMode, CostSpec, Evolution};
use crate::costmodel;
use crate::error::{Error, Result};
use crate::models::{random_hermitian, ModelSpec, RandomHermitianSpec, TfimSpec};
use crate::optimizer::{initial_params, minimize, random_restarts, RunRecord, Termination};
use crate::pauli::PauliSum;
use crate::rng::{derive_seed, label};
use crate::simulator::ShotPlan;
use crate::spectral::{closest_eigenstate, diagonalize, subspace_overlap, Spectrum};

/// Per-run quantities derived from a [`RunRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub restart: usize,
    pub seed: u64,
    pub iterations: usize,
    pub termination: Termination,
    pub cost_init: f64,
    pub cost_final: f64,
    pub overlap_init: f64,
    pub overlap_final: f64,
    pub eigen_index: usize,
    pub eigenvalue: f64,
    pub degeneracy: usize,
    pub overlap_gain: Option<f64>,
    pub cost_gain: Option<f64>,
    pub converged: bool,
}

/// All restarts of one cost function on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub cost: CostKind,
    pub records: Vec<RunRecord>,
    pub runs: Vec<RunSummary>,
    pub overlap_report: GainReport,
    pub cost_report: GainReport,
}

impl Arm {
    fn new(cost: CostKind, records: Vec<RunRecord>, runs: Vec<RunSummary>) -> Self {
        let converged: Vec<bool> = runs.iter().map(|r| r.converged).collect();
        let overlap_report = GainReport::new(runs.iter().map(|r| r.overlap_gain).collect(), &converged);
        let cost_report = GainReport::new(runs.iter().map(|r| r.cost_gain).collect(), &converged);
        Arm { cost, records, runs, overlap_report, cost_report }
    }

    pub fn numerical_failures(&self) -> usize {
        self.runs.iter().filter(|r| r.termination == Termination::Numerical).count()
    }

    pub fn overlap_stats(&self) -> (f64, f64) {
        let o: Vec<f64> = self.runs.iter().map(|r| r.overlap_final).collect();
        (mean(&o).unwrap_or(f64::NAN), standard_error(&o))
    }

    pub fn iteration_stats(&self) -> (f64, f64) {
        let it: Vec<f64> = self.runs.iter().map(|r| r.iterations as f64).collect();
        (mean(&it).unwrap_or(f64::NAN), standard_error(&it))
    }
}

/// Seed of the shared initial-parameter stream; independent of cost,
/// model and scale so that every arm starts from the same draws.
pub fn restart_seed(master: u64) -> u64 {
    derive_seed(master, &[label("restarts")])
}

/// Cost specification for `kind` on `h` under `cfg`.
pub fn cost_spec(cfg: &ExperimentConfig, h: &PauliSum, kind: CostKind, time: f64) -> Result<CostSpec> {
    let spec = CostSpec::new(kind, h.clone(), time);
    match (kind, cfg.trotter) {
        (CostKind::Unitary, Some(steps)) => {
            let ModelSpec::Tfim(model) = cfg.model else {
                return Err(Error::Argument("Trotterized evolution is only available for the tfim model".into()));
            };
            Ok(spec.with_mode(CostMode::Trotter { model, steps }))
        }
        _ => Ok(spec),
    }
}

/// Fill in overlaps and gains for a finished run.
pub fn summarize(cf: &CostFunction, spectrum: &Spectrum, rec: &mut RunRecord, gamma: f64) -> Result<RunSummary> {
    let initial = cf.prepare(&rec.initial_params)?;
    let fin = cf.prepare(&rec.final_params)?;
    let closest = closest_eigenstate(&fin, spectrum)?;
    let overlap_init = subspace_overlap(&initial, spectrum, closest.index)?;
    rec.final_overlap = Some(closest.overlap);
    Ok(RunSummary {
        restart: rec.restart,
        seed: rec.seed,
        iterations: rec.iterations,
        termination: rec.termination,
        cost_init: rec.initial_cost(),
        cost_final: rec.final_cost,
        overlap_init,
        overlap_final: closest.overlap,
        eigen_index: closest.index,
        eigenvalue: closest.eigenvalue,
        degeneracy: closest.degeneracy,
        overlap_gain: gain(overlap_init, closest.overlap, 1.0),
        cost_gain: gain(rec.initial_cost(), rec.final_cost, 0.0),
        converged: closest.overlap >= gamma,
    })
}

/// Optimize `kind` on `h` from `cfg.restarts` seeded starting points.
pub fn run_arm(cfg: &ExperimentConfig, h: &PauliSum, spectrum: &Spectrum, kind: CostKind, time: f64) -> Result<Arm> {
    let cf = CostFunction::new(cost_spec(cfg, h, kind, time)?, cfg.ansatz)?;
    let mut records = random_restarts(&cf, cfg.restarts, restart_seed(cfg.seed), &cfg.bfgs)?;
    let runs = records
        .iter_mut()
        .map(|rec| summarize(&cf, spectrum, rec, cfg.gamma))
        .collect::<Result<Vec<_>>>()?;
    Ok(Arm::new(kind, records, runs))
}

/// Single optimization from restart 0.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<Arm> {
    cfg.validate()?;
    let h = cfg.model.hamiltonian()?;
    let spectrum = diagonalize(&h)?;
    let single = ExperimentConfig { restarts: 1, ..cfg.clone() };
    run_arm(&single, &h, &spectrum, cfg.cost, cfg.time)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelStudy {
    pub model: ModelSpec,
    pub eigenvalues: Vec<f64>,
    pub arms: Vec<Arm>,
}

/// Restarts of each cost in `costs` on `cfg.model`, with paired starts.
pub fn run_model_study(cfg: &ExperimentConfig, costs: &[CostKind]) -> Result<ModelStudy> {
    cfg.validate()?;
    let h = cfg.model.hamiltonian()?;
    let spectrum = diagonalize(&h)?;
    let arms = costs
        .iter()
        .map(|&kind| run_arm(cfg, &h, &spectrum, kind, cfg.time))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelStudy { model: cfg.model.clone(), eigenvalues: spectrum.eigenvalues().to_vec(), arms })
}

/// One aggregated row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub cost: CostKind,
    pub runs: usize,
    pub converged: usize,
    pub overlap_mean: f64,
    pub overlap_se: f64,
    pub iters_mean: f64,
    pub iters_se: f64,
}

impl SweepPoint {
    fn from_arm(x: f64, arm: &Arm) -> Self {
        let (overlap_mean, overlap_se) = arm.overlap_stats();
        let (iters_mean, iters_se) = arm.iteration_stats();
        SweepPoint {
            x,
            cost: arm.cost,
            runs: arm.runs.len(),
            converged: arm.overlap_report.converged,
            overlap_mean,
            overlap_se,
            iters_mean,
            iters_se,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub variable: String,
    pub points: Vec<SweepPoint>,
    pub arms: Vec<(f64, Arm)>,
}

impl Sweep {
    pub fn numerical_failures(&self) -> usize {
        self.arms.iter().map(|(_, a)| a.numerical_failures()).sum()
    }
}

fn tfim_of(cfg: &ExperimentConfig) -> TfimSpec {
    match cfg.model {
        ModelSpec::Tfim(s) => s,
        _ => TfimSpec::new(cfg.ansatz.qubits, 1.0, 1.0),
    }
}

/// Restarts of every cost at each transverse field in `fields`.
pub fn run_field_sweep(cfg: &ExperimentConfig, fields: &[f64], costs: &[CostKind]) -> Result<Sweep> {
    let mut sweep = Sweep { variable: "h".into(), points: Vec::new(), arms: Vec::new() };
    for &field in fields {
        if !field.is_finite() {
            return Err(Error::Argument(format!("field {field} is not finite")));
        }
        let model = TfimSpec { field, ..tfim_of(cfg) };
        let point_cfg = ExperimentConfig { model: ModelSpec::Tfim(model), ..cfg.clone() };
        point_cfg.validate()?;
        let h = point_cfg.model.hamiltonian()?;
        let spectrum = diagonalize(&h)?;
        for &kind in costs {
            let arm = run_arm(&point_cfg, &h, &spectrum, kind, cfg.time)?;
            sweep.points.push(SweepPoint::from_arm(field, &arm));
            sweep.arms.push((field, arm));
        }
    }
    Ok(sweep)
}

/// Restarts of the unitary cost at each evolution time in `times`.
pub fn run_time_sweep(cfg: &ExperimentConfig, times: &[f64]) -> Result<Sweep> {
    if let Some(t) = times.iter().find(|t| **t == 0.0 || !t.is_finite()) {
        return Err(Error::Argument(format!("evolution time {t} is not usable (the unitary cost vanishes at t = 0)")));
    }
    let point_cfg = ExperimentConfig { cost: CostKind::Unitary, ..cfg.clone() };
    point_cfg.validate()?;
    let h = point_cfg.model.hamiltonian()?;
    let spectrum = diagonalize(&h)?;
    let mut sweep = Sweep { variable: "t".into(), points: Vec::new(), arms: Vec::new() };
    for &t in times {
        let arm = run_arm(&point_cfg, &h, &spectrum, CostKind::Unitary, t)?;
        sweep.points.push(SweepPoint::from_arm(t, &arm));
        sweep.arms.push((t, arm));
    }
    Ok(sweep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierStudy {
    pub scales: Vec<f64>,
    pub hamiltonian_seeds: Vec<u64>,
    /// One arm per (scale, cost), runs indexed by instance.
    pub arms: Vec<(f64, Arm)>,
}

impl MultiplierStudy {
    pub fn numerical_failures(&self) -> usize {
        self.arms.iter().map(|(_, a)| a.numerical_failures()).sum()
    }
}

/// `count` random Hamiltonians, each optimized from its own random start at
/// every scale and with every cost; instance `i` uses the same Hamiltonian
/// draw and the same start in every arm.
pub fn run_multiplier_study(cfg: &ExperimentConfig, scales: &[f64], costs: &[CostKind], count: usize) -> Result<MultiplierStudy> {
    if count == 0 {
        return Err(Error::Argument("instance count must be at least 1".into()));
    }
    if let Some(s) = scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::Argument(format!("scale {s} must be positive")));
    }
    let n = cfg.ansatz.qubits;
    let p = cfg.ansatz.num_params();
    let hamiltonian_seeds: Vec<u64> = (0..count).map(|i| derive_seed(cfg.seed, &[label("hamiltonian"), i as u64])).collect();

    // results[i][(scale, cost)] = (record, summary)
    let per_instance = (0..count)
        .into_par_iter()
        .map(|i| {
            let (run_seed, x0) = initial_params(p, restart_seed(cfg.seed), i);
            let mut out = Vec::with_capacity(scales.len() * costs.len());
            for &scale in scales {
                let model = ModelSpec::Random(RandomHermitianSpec { qubits: n, scale, seed: hamiltonian_seeds[i] });
                let arm_cfg = ExperimentConfig { model: model.clone(), ..cfg.clone() };
                arm_cfg.validate()?;
                let h = random_hermitian(&RandomHermitianSpec { qubits: n, scale, seed: hamiltonian_seeds[i] })?;
                let spectrum = diagonalize(&h)?;
                for &kind in costs {
                    let cf = CostFunction::new(cost_spec(&arm_cfg, &h, kind, cfg.time)?, cfg.ansatz)?;
                    let mut rec = minimize(&cf, &x0, &cfg.bfgs)?;
                    rec.restart = i;
                    rec.seed = run_seed;
                    let summary = summarize(&cf, &spectrum, &mut rec, cfg.gamma)?;
                    out.push((rec, summary));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut arms = Vec::new();
    let mut k = 0;
    for &scale in scales {
        for &kind in costs {
            let (records, runs): (Vec<_>, Vec<_>) = per_instance.iter().map(|inst| inst[k].clone()).unzip();
            arms.push((scale, Arm::new(kind, records, runs)));
            k += 1;
        }
    }
    Ok(MultiplierStudy { scales: scales.to_vec(), hamiltonian_seeds, arms })
}

/// Shot-noise and Trotter error of both costs at random ansatz points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterStudy {
    pub steps: Vec<usize>,
    pub time: f64,
    pub shots: usize,
    /// Variance-cost errors are divided by this circuit count.
    pub normalization: usize,
    pub seeds: Vec<u64>,
    pub f_h_exact: Vec<f64>,
    pub f_h_sampled: Vec<f64>,
    pub f_q_exact: Vec<f64>,
    /// `f_q_sampled[k][i]`: steps `steps[k]`, instance `i`.
    pub f_q_sampled: Vec<Vec<f64>>,
}

impl TrotterStudy {
    pub fn instances(&self) -> usize {
        self.seeds.len()
    }

    /// Normalized `|F_H exact - F_H sampled|` per instance.
    pub fn delta_h(&self) -> Vec<f64> {
        self.f_h_exact
            .iter()
            .zip(&self.f_h_sampled)
            .map(|(e, s)| (e - s).abs() / self.normalization as f64)
            .collect()
    }

    /// `|F_Q exact - F_Q sampled|` per instance at `steps[k]`.
    pub fn delta_q(&self, k: usize) -> Vec<f64> {
        self.f_q_exact.iter().zip(&self.f_q_sampled[k]).map(|(e, s)| (e - s).abs()).collect()
    }

    pub fn delta_h_stats(&self) -> (f64, f64) {
        let d = self.delta_h();
        (mean(&d).unwrap_or(f64::NAN), standard_error(&d))
    }

    pub fn delta_q_stats(&self) -> Vec<(usize, f64, f64)> {
        (0..self.steps.len())
            .map(|k| {
                let d = self.delta_q(k);
                (self.steps[k], mean(&d).unwrap_or(f64::NAN), standard_error(&d))
            })
            .collect()
    }
}

/// For `instances` random parameter vectors of `cfg.ansatz`: exact and
/// sampled variance cost, and exact against sampled, Trotterized unitary
/// cost for each step count. Every step count reuses the instance's shot
/// stream.
pub fn run_trotter_error_study(cfg: &ExperimentConfig, steps: &[usize], instances: usize) -> Result<TrotterStudy> {
    if instances == 0 {
        return Err(Error::Argument("instance count must be at least 1".into()));
    }
    if let Some(r) = steps.iter().find(|r| **r == 0) {
        return Err(Error::Argument(format!("Trotter step count {r} must be at least 1")));
    }
    let ModelSpec::Tfim(model) = cfg.model else {
        return Err(Error::Argument("the Trotter study needs the tfim model".into()));
    };
    let probe = ExperimentConfig { cost: CostKind::Unitary, ..cfg.clone() };
    probe.validate()?;
    let h = crate::models::tfim(&model)?;
    let circuit = ansatz::build(&cfg.ansatz)?;
    let normalization = costmodel::count(model.qubits, cfg.ansatz.layers, 1)?.circuits_h;
    let p = cfg.ansatz.num_params();
    let stream = derive_seed(cfg.seed, &[label("trotter-instances")]);

    let rows = (0..instances)
        .into_par_iter()
        .map(|i| {
            let (seed, params) = initial_params(p, stream, i);
            let psi = circuit.run(&params)?;
            let h_plan = ShotPlan::new(cfg.shots, derive_seed(seed, &[label("variance-shots")]))?;
            let q_plan = ShotPlan::new(cfg.shots, derive_seed(seed, &[label("unitary-shots")]))?;
            let fh_ex = f_h(&psi, &h, &CostMode::Exact)?;
            let fh_app = f_h(&psi, &h, &CostMode::Sampled { plan: h_plan, evolution: Evolution::Exact })?;
            let fq_ex = f_q(&psi, &h, cfg.time, &CostMode::Exact)?;
            let fq_app = steps
                .iter()
                .map(|&r| f_q_sampled_circuit(&circuit, &params, &h, cfg.time, &q_plan, &Evolution::Trotter { model, steps: r }))
                .collect::<Result<Vec<_>>>()?;
            Ok((seed, fh_ex, fh_app, fq_ex, fq_app))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut study = TrotterStudy {
        steps: steps.to_vec(),
        time: cfg.time,
        shots: cfg.shots,
        normalization,
        seeds: Vec::new(),
        f_h_exact: Vec::new(),
        f_h_sampled: Vec::new(),
        f_q_exact: Vec::new(),
        f_q_sampled: vec![Vec::new(); steps.len()],
    };
    for (seed, fh_ex, fh_app, fq_ex, fq_app) in rows {
        study.seeds.push(seed);
        study.f_h_exact.push(fh_ex);
        study.f_h_sampled.push(fh_app);
        study.f_q_exact.push(fq_ex);
        for (k, v) in fq_app.into_iter().enumerate() {
            study.f_q_sampled[k].push(v);
        }
    }
    Ok(study)
}
