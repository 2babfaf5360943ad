use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eigencert::ansatz::AnsatzSpec;
use eigencert::costmodel;
use eigencert::harness::config::{MODEL_RESTARTS, SWEEP_RESTARTS, TROTTER_INSTANCES};
use eigencert::harness::emit::{Cell, OutputDir, Table};
use eigencert::harness::{report, studies, ExperimentConfig, Overrides};
use eigencert::spectral::diagonalize;
use eigencert::{CostKind, Error, ModelSpec, PauliSum, TfimSpec};

#[derive(Parser, Debug)]
#[command(name = "eigencert", version, about = "Variational eigenvector search with variance and unitary certificates")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Global {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; each study writes into a subdirectory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Use the full restart and instance counts.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Cost function: variance or unitary.
    #[arg(long, global = true, value_parser = parse_cost)]
    cost: Option<CostKind>,
    /// Evolution time of the unitary cost.
    #[arg(long, global = true, value_name = "T")]
    time: Option<f64>,
    /// Shots per measured circuit.
    #[arg(long, global = true, value_name = "M")]
    shots: Option<usize>,
    /// Trotter steps for the unitary cost.
    #[arg(long, global = true, value_name = "R")]
    trotter: Option<usize>,
    #[arg(long, global = true, value_name = "L")]
    layers: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    qubits: Option<usize>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Overlap threshold for convergence.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    #[arg(long, global = true)]
    grad_tol: Option<f64>,
    /// Model: tfim, schwinger, fermions or random.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Transverse field of the tfim model.
    #[arg(long, global = true)]
    field: Option<f64>,
    /// Ising coupling of the tfim model.
    #[arg(long, global = true)]
    coupling: Option<f64>,
    /// Bare mass of the schwinger model.
    #[arg(long, global = true, allow_hyphen_values = true)]
    mass: Option<f64>,
    #[arg(long, global = true)]
    hopping: Option<f64>,
    #[arg(long, global = true)]
    u1: Option<f64>,
    #[arg(long, global = true)]
    u2: Option<f64>,
    /// Multiplier of the random Hamiltonian.
    #[arg(long, global = true)]
    scale: Option<f64>,
    /// Key-value settings file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One optimization from the first seeded start.
    Solve,
    /// Restarts of each cost on each model.
    StudyModels {
        /// Models to study (default: tfim, schwinger and fermions).
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
    },
    /// Convergence against the transverse field.
    SweepField {
        /// Field values (default 0.1 to 1.5 in steps of 0.1).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        fields: Option<Vec<f64>>,
    },
    /// Convergence of the unitary cost against evolution time.
    SweepTime {
        /// Times (default 0.1 pi to 0.9 pi in steps of 0.1 pi).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        times: Option<Vec<f64>>,
    },
    /// Random Hamiltonians at several scales with paired starts.
    StudyMultiplier {
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
        scales: Vec<f64>,
        /// Number of Hamiltonian instances.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Sampling and Trotter error of both costs.
    StudyTrotter {
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8])]
        steps: Vec<usize>,
        #[arg(long)]
        instances: Option<usize>,
    },
    /// Gate counts as CSV on stdout.
    GateCount {
        /// Tabulate N_Q at r = ceil(n^alpha) against N_H over a qubit range instead.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 5)]
        min_qubits: usize,
        #[arg(long, default_value_t = 20)]
        max_qubits: usize,
    },
    /// Spectrum and Pauli decomposition of a model.
    Diag {
        /// Read the Hamiltonian from a Pauli text file instead of a model.
        #[arg(long, value_name = "FILE")]
        hamiltonian: Option<PathBuf>,
    },
}

fn parse_cost(s: &str) -> Result<CostKind, String> {
    s.parse::<CostKind>().map_err(|e| e.to_string())
}

impl Global {
    fn overrides(&self) -> Result<Overrides, Error> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                Overrides::parse(&text).map_err(|e| match e {
                    Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
                    other => other,
                })?
            }
            None => Overrides::default(),
        };
        let flags = Overrides {
            seed: self.seed,
            out: self.out.clone(),
            paper_scale: self.paper_scale.then_some(true),
            cost: self.cost,
            time: self.time,
            shots: self.shots,
            trotter: self.trotter,
            layers: self.layers,
            qubits: self.qubits,
            restarts: self.restarts,
            gamma: self.gamma,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            model: self.model.clone(),
            field: self.field,
            coupling: self.coupling,
            mass: self.mass,
            hopping: self.hopping,
            u1: self.u1,
            u2: self.u2,
            scale: self.scale,
        };
        Ok(file.merge(flags))
    }
}

/// Base configuration with `restarts` scaled, before overrides.
fn base(model: ModelSpec, ansatz: AnsatzSpec, restarts: usize) -> ExperimentConfig {
    ExperimentConfig { model, ansatz, restarts, ..ExperimentConfig::default() }
}

fn out_dir(cfg: &ExperimentConfig, study: &str) -> Result<OutputDir, Error> {
    OutputDir::create(cfg.out.join(study))
}

fn report_numerical(failures: usize) -> Result<(), Error> {
    if failures > 0 {
        return Err(Error::Numerical(format!("{failures} run(s) stopped on a non-finite cost; outputs were still written")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let over = cli.global.overrides()?;
    let paper = over.paper_scale();
    let tfim4 = || ModelSpec::Tfim(TfimSpec::new(4, 1.0, 1.0));
    match cli.command {
        Command::Solve => {
            let cfg = over.apply(base(tfim4(), AnsatzSpec::default(), 1))?;
            let arm = studies::run_solve(&cfg)?;
            let mut out = out_dir(&cfg, "solve")?;
            report::write_solve(&mut out, &cfg, &arm)?;
            let r = &arm.runs[0];
            println!(
                "{} {}: cost {:e} -> {:e}, overlap {:.6} with eigenvalue {:.6}, {} iterations ({})",
                cfg.model.name(),
                cfg.cost.as_str(),
                r.cost_init,
                r.cost_final,
                r.overlap_final,
                r.eigenvalue,
                r.iterations,
                r.termination.as_str()
            );
            report_numerical(arm.numerical_failures())
        }
        Command::StudyModels { models } => {
            let names: Vec<String> = match (&over.model, models.is_empty()) {
                (_, false) => models,
                (Some(m), true) => vec![m.clone()],
                (None, true) => ["tfim", "schwinger", "fermions"].map(String::from).to_vec(),
            };
            let costs = match over.cost {
                Some(c) => vec![c],
                None => vec![CostKind::Variance, CostKind::Unitary],
            };
            let restarts = MODEL_RESTARTS.pick(paper);
            let mut results = Vec::new();
            let mut first_cfg = None;
            for name in &names {
                let model_over = over.clone().merge(Overrides { model: Some(name.clone()), ..Overrides::default() });
                let cfg = model_over.apply(base(tfim4(), AnsatzSpec::default(), restarts))?;
                let study = studies::run_model_study(&cfg, &costs)?;
                for arm in &study.arms {
                    println!(
                        "{:<10} {:<9} converged {:>4}/{:<4} overlap gain {}",
                        name,
                        arm.cost.as_str(),
                        arm.overlap_report.converged,
                        arm.overlap_report.runs,
                        arm.overlap_report.mean_gain.map_or("undefined".into(), |g| format!("{g:.4}"))
                    );
                }
                first_cfg.get_or_insert(cfg);
                results.push(study);
            }
            let cfg = first_cfg.expect("at least one model");
            let mut out = out_dir(&cfg, "study-models")?;
            report::write_model_study(&mut out, &cfg, &results)?;
            report_numerical(results.iter().flat_map(|s| &s.arms).map(|a| a.numerical_failures()).sum())
        }
        Command::SweepField { fields } => {
            let fields = fields.unwrap_or_else(|| (1..=15).map(|k| k as f64 / 10.0).collect());
            let costs = over.cost.map_or(vec![CostKind::Variance, CostKind::Unitary], |c| vec![c]);
            let cfg = over.apply(base(tfim4(), AnsatzSpec::default(), SWEEP_RESTARTS.pick(paper)))?;
            let sweep = studies::run_field_sweep(&cfg, &fields, &costs)?;
            print_sweep(&sweep, None);
            let mut out = out_dir(&cfg, "sweep-field")?;
            report::write_sweep(&mut out, &cfg, "sweep-field", &sweep, None)?;
            report_numerical(sweep.numerical_failures())
        }
        Command::SweepTime { times } => {
            let times = times.unwrap_or_else(|| (1..=9).map(|k| k as f64 * 0.1 * PI).collect());
            let mut cfg = base(tfim4(), AnsatzSpec::default(), SWEEP_RESTARTS.pick(paper));
            cfg.cost = CostKind::Unitary;
            let cfg = over.apply(cfg)?;
            let sweep = studies::run_time_sweep(&cfg, &times)?;
            let highlight = Some(0.3 * PI);
            print_sweep(&sweep, highlight);
            let mut out = out_dir(&cfg, "sweep-time")?;
            report::write_sweep(&mut out, &cfg, "sweep-time", &sweep, highlight)?;
            report_numerical(sweep.numerical_failures())
        }
        Command::StudyMultiplier { scales, count } => {
            let count = count.unwrap_or(MODEL_RESTARTS.pick(paper));
            let costs = over.cost.map_or(vec![CostKind::Variance, CostKind::Unitary], |c| vec![c]);
            let random = ModelSpec::Random(eigencert::RandomHermitianSpec { qubits: 4, scale: 1.0, seed: 0 });
            let cfg = over.apply(base(random, AnsatzSpec::default(), 1))?;
            let study = studies::run_multiplier_study(&cfg, &scales, &costs, count)?;
            for (scale, arm) in &study.arms {
                println!(
                    "scale {:<6} {:<9} converged {:>4}/{:<4}",
                    scale,
                    arm.cost.as_str(),
                    arm.overlap_report.converged,
                    arm.overlap_report.runs
                );
            }
            let mut out = out_dir(&cfg, "study-multiplier")?;
            report::write_multiplier_study(&mut out, &cfg, &study)?;
            report_numerical(study.numerical_failures())
        }
        Command::StudyTrotter { steps, instances } => {
            let instances = instances.unwrap_or(TROTTER_INSTANCES.pick(paper));
            let cfg = over.apply(base(ModelSpec::Tfim(TfimSpec::new(5, 1.0, 1.0)), AnsatzSpec::new(5, 4), 1))?;
            let study = studies::run_trotter_error_study(&cfg, &steps, instances)?;
            let (hm, hse) = study.delta_h_stats();
            for (r, m, se) in study.delta_q_stats() {
                println!("r = {r:<3} delta_Q = {m:.5} +- {se:.5}");
            }
            println!("delta_H / {} = {hm:.5} +- {hse:.5}", study.normalization);
            let mut out = out_dir(&cfg, "study-trotter")?;
            report::write_trotter_study(&mut out, &cfg, &study)
        }
        Command::GateCount { alpha, min_qubits, max_qubits } => {
            let n = over.qubits.unwrap_or(5);
            let l = over.layers.unwrap_or(4);
            let r = over.trotter.unwrap_or(10);
            let text = match alpha {
                None => gate_count_table(&[costmodel::count(n, l, r)?]).to_csv()?,
                Some(alpha) => {
                    if min_qubits > max_qubits {
                        return Err(Error::Argument(format!("qubit range {min_qubits}..{max_qubits} is empty")));
                    }
                    let report = costmodel::crossover(min_qubits..=max_qubits, l, alpha)?;
                    let mut t = Table::new(&["n", "r", "N_Q", "N_H", "N_Q_below_N_H"]);
                    for row in &report.rows {
                        t.push(vec![row.n.into(), row.r.into(), row.n_q.into(), row.n_h.into(), (row.n_q < row.n_h).into()]);
                    }
                    t.to_csv()?
                }
            };
            print!("{text}");
            Ok(())
        }
        Command::Diag { hamiltonian } => {
            let (name, h, cfg) = match hamiltonian {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                    let h = PauliSum::from_text(&text)?;
                    let mut cfg = ExperimentConfig::default();
                    if let Some(dir) = &over.out {
                        cfg.out = dir.clone();
                    }
                    ("file".to_string(), h, cfg)
                }
                None => {
                    let cfg = over.apply(base(tfim4(), AnsatzSpec::default(), 1))?;
                    (cfg.model.name().to_string(), cfg.model.hamiltonian()?, cfg)
                }
            };
            let spectrum = diagonalize(&h)?;
            let mut t = Table::new(&["index", "eigenvalue", "degeneracy"]);
            let groups = spectrum.degenerate_groups();
            for g in &groups {
                for j in g.clone() {
                    t.push(vec![j.into(), spectrum.eigenvalues()[j].into(), g.len().into()]);
                }
            }
            let mut out = out_dir(&cfg, "diag")?;
            out.write_table("spectrum.csv", &t)?;
            out.write_text("hamiltonian.txt", &h.to_text())?;
            println!("{name}: {} qubits, {} Pauli terms, {} distinct eigenvalues", h.num_qubits(), h.num_terms(), groups.len());
            for g in &groups {
                println!("{:>18.12} x{}", spectrum.eigenvalues()[g.start], g.len());
            }
            Ok(())
        }
    }
}

fn gate_count_table(counts: &[costmodel::ResourceCount]) -> Table {
    let mut t = Table::new(&["n", "l", "r", "N_U", "N_V", "N_Q", "N_H1", "N_H2", "N_H", "circuits_H"]);
    for c in counts {
        t.push(
            [c.n, c.l, c.r, c.n_u, c.n_v, c.n_q, c.n_h1, c.n_h2, c.n_h, c.circuits_h]
                .into_iter()
                .map(Cell::from)
                .collect(),
        );
    }
    t
}

fn print_sweep(sweep: &studies::Sweep, highlight: Option<f64>) {
    for p in &sweep.points {
        let mark = if highlight.is_some_and(|h| (p.x - h).abs() < 1e-9) { " *" } else { "" };
        println!(
            "{} = {:<8.4} {:<9} converged {:>3}/{:<3} overlap {:.4} +- {:.4}{}",
            sweep.variable,
            p.x,
            p.cost.as_str(),
            p.converged,
            p.runs,
            p.overlap_mean,
            p.overlap_se,
            mark
        );
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Argument(_) | Error::Parse(_) | Error::Dimension(_) | Error::Resource(_) | Error::Unsupported(_) => 2,
        Error::Numerical(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
