//! Experiment configuration and the flat `key = value` config format.
//!
//! ```text
//! # comments and blank lines are ignored
//! seed = 7
//! model = schwinger
//! mass = -0.7
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSpec;
use crate::cost::CostKind;
use crate::error::{Error, Result};
use crate::models::{FermionSpec, ModelSpec, RandomHermitianSpec, SchwingerSpec, TfimSpec};
use crate::optimizer::BfgsConfig;

pub const DEFAULT_GAMMA: f64 = 0.999;
pub const DEFAULT_TIME: f64 = 1.0;
pub const DEFAULT_SHOTS: usize = 1000;
pub const DEFAULT_MASS: f64 = -0.7;

/// Restart counts at desk scale and at the full published scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RestartScale {
    pub desk: usize,
    pub paper: usize,
}

pub const MODEL_RESTARTS: RestartScale = RestartScale { desk: 60, paper: 300 };
pub const SWEEP_RESTARTS: RestartScale = RestartScale { desk: 20, paper: 50 };
pub const TROTTER_INSTANCES: RestartScale = RestartScale { desk: 30, paper: 300 };

impl RestartScale {
    pub fn pick(self, paper_scale: bool) -> usize {
        if paper_scale {
            self.paper
        } else {
            self.desk
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub ansatz: AnsatzSpec,
    pub cost: CostKind,
    pub time: f64,
    pub restarts: usize,
    pub gamma: f64,
    pub seed: u64,
    pub shots: usize,
    pub trotter: Option<usize>,
    pub bfgs: BfgsConfig,
    pub out: PathBuf,
    pub paper_scale: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSpec::Tfim(TfimSpec::new(4, 1.0, 1.0)),
            ansatz: AnsatzSpec::default(),
            cost: CostKind::Variance,
            time: DEFAULT_TIME,
            restarts: MODEL_RESTARTS.desk,
            gamma: DEFAULT_GAMMA,
            seed: 0,
            shots: DEFAULT_SHOTS,
            trotter: None,
            bfgs: BfgsConfig::default(),
            out: PathBuf::from("results"),
            paper_scale: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Argument(format!("overlap threshold {} outside [0, 1]", self.gamma)));
        }
        if self.restarts < 1 {
            return Err(Error::Argument("restart count must be at least 1".into()));
        }
        if self.shots < 1 {
            return Err(Error::Argument("shot count must be at least 1".into()));
        }
        if self.trotter == Some(0) {
            return Err(Error::Argument("Trotter step count must be at least 1".into()));
        }
        if !self.time.is_finite() {
            return Err(Error::Argument(format!("evolution time {} is not finite", self.time)));
        }
        if self.cost == CostKind::Unitary && self.time == 0.0 {
            return Err(Error::Argument("evolution time 0 makes the unitary cost identically zero".into()));
        }
        if self.model.qubits() != self.ansatz.qubits {
            return Err(Error::Argument(format!(
                "model has {} qubits but the ansatz has {}",
                self.model.qubits(),
                self.ansatz.qubits
            )));
        }
        self.ansatz.validate()?;
        self.bfgs.validate()
    }
}

/// Optional settings from flags or a config file; later sources win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub paper_scale: Option<bool>,
    pub cost: Option<CostKind>,
    pub time: Option<f64>,
    pub shots: Option<usize>,
    pub trotter: Option<usize>,
    pub layers: Option<usize>,
    pub qubits: Option<usize>,
    pub restarts: Option<usize>,
    pub gamma: Option<f64>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub model: Option<String>,
    pub field: Option<f64>,
    pub coupling: Option<f64>,
    pub mass: Option<f64>,
    pub hopping: Option<f64>,
    pub u1: Option<f64>,
    pub u2: Option<f64>,
    pub scale: Option<f64>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

impl Overrides {
    /// Parse `key = value` lines. Keys use the long flag names, with either
    /// `-` or `_` as separator.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim().trim_matches('"');
            let k = key.as_str();
            match k {
                "seed" => o.seed = Some(parse_value(k, value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                "paper_scale" => o.paper_scale = Some(parse_bool(k, value)?),
                "cost" => o.cost = Some(value.parse()?),
                "time" => o.time = Some(parse_value(k, value)?),
                "shots" => o.shots = Some(parse_value(k, value)?),
                "trotter" => o.trotter = Some(parse_value(k, value)?),
                "layers" => o.layers = Some(parse_value(k, value)?),
                "qubits" => o.qubits = Some(parse_value(k, value)?),
                "restarts" => o.restarts = Some(parse_value(k, value)?),
                "gamma" => o.gamma = Some(parse_value(k, value)?),
                "max_iters" => o.max_iters = Some(parse_value(k, value)?),
                "grad_tol" => o.grad_tol = Some(parse_value(k, value)?),
                "model" => o.model = Some(value.to_string()),
                "field" => o.field = Some(parse_value(k, value)?),
                "coupling" => o.coupling = Some(parse_value(k, value)?),
                "mass" => o.mass = Some(parse_value(k, value)?),
                "hopping" => o.hopping = Some(parse_value(k, value)?),
                "u1" => o.u1 = Some(parse_value(k, value)?),
                "u2" => o.u2 = Some(parse_value(k, value)?),
                "scale" => o.scale = Some(parse_value(k, value)?),
                _ => return Err(Error::Parse(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }
        Ok(o)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            seed, out, paper_scale, cost, time, shots, trotter, layers, qubits, restarts, gamma, max_iters, grad_tol, model,
            field, coupling, mass, hopping, u1, u2, scale
        )
    }

    pub fn paper_scale(&self) -> bool {
        self.paper_scale.unwrap_or(false)
    }

    fn touches_model(&self) -> bool {
        self.model.is_some()
            || self.qubits.is_some()
            || self.field.is_some()
            || self.coupling.is_some()
            || self.mass.is_some()
            || self.hopping.is_some()
            || self.u1.is_some()
            || self.u2.is_some()
            || self.scale.is_some()
            || self.seed.is_some()
    }

    /// Model named `name` with this override's parameters over defaults.
    pub fn model_spec(&self, name: &str, qubits: usize, seed: u64) -> Result<ModelSpec> {
        let n = self.qubits.unwrap_or(qubits);
        let spec = match name {
            "tfim" => ModelSpec::Tfim(TfimSpec::new(n, self.coupling.unwrap_or(1.0), self.field.unwrap_or(1.0))),
            "schwinger" => ModelSpec::Schwinger(SchwingerSpec { qubits: n, mass: self.mass.unwrap_or(DEFAULT_MASS) }),
            "fermions" => {
                let d = FermionSpec::default();
                ModelSpec::Fermions(FermionSpec {
                    qubits: n,
                    hopping: self.hopping.unwrap_or(d.hopping),
                    u1: self.u1.unwrap_or(d.u1),
                    u2: self.u2.unwrap_or(d.u2),
                })
            }
            "random" => ModelSpec::Random(RandomHermitianSpec { qubits: n, scale: self.scale.unwrap_or(1.0), seed }),
            _ => {
                return Err(Error::Argument(format!(
                    "unknown model `{name}` (expected tfim, schwinger, fermions or random)"
                )))
            }
        };
        Ok(spec)
    }

    /// Apply these overrides on top of `base`.
    pub fn apply(&self, mut base: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(v) = self.seed {
            base.seed = v;
        }
        if let Some(v) = &self.out {
            base.out = v.clone();
        }
        if let Some(v) = self.paper_scale {
            base.paper_scale = v;
        }
        if let Some(v) = self.cost {
            base.cost = v;
        }
        if let Some(v) = self.time {
            base.time = v;
        }
        if let Some(v) = self.shots {
            base.shots = v;
        }
        if let Some(v) = self.trotter {
            base.trotter = Some(v);
        }
        if let Some(v) = self.layers {
            base.ansatz.layers = v;
        }
        if let Some(v) = self.qubits {
            base.ansatz.qubits = v;
        }
        if let Some(v) = self.restarts {
            base.restarts = v;
        }
        if let Some(v) = self.gamma {
            base.gamma = v;
        }
        if let Some(v) = self.max_iters {
            base.bfgs.max_iters = v;
        }
        if let Some(v) = self.grad_tol {
            base.bfgs.grad_tol = v;
        }
        if self.touches_model() {
            let name = self.model.as_deref().unwrap_or(base.model.name());
            base.model = self.model_spec_from(name, &base.model, base.ansatz.qubits, base.seed)?;
        }
        base.validate()?;
        Ok(base)
    }

    fn model_spec_from(&self, name: &str, current: &ModelSpec, qubits: usize, seed: u64) -> Result<ModelSpec> {
        // Keep parameters of the current model unless overridden.
        let mut o = self.clone();
        match current {
            ModelSpec::Tfim(s) if name == "tfim" => {
                o.coupling = o.coupling.or(Some(s.coupling));
                o.field = o.field.or(Some(s.field));
            }
            ModelSpec::Schwinger(s) if name == "schwinger" => o.mass = o.mass.or(Some(s.mass)),
            ModelSpec::Fermions(s) if name == "fermions" => {
                o.hopping = o.hopping.or(Some(s.hopping));
                o.u1 = o.u1.or(Some(s.u1));
                o.u2 = o.u2.or(Some(s.u2));
            }
            ModelSpec::Random(s) if name == "random" => o.scale = o.scale.or(Some(s.scale)),
            _ => {}
        }
        o.model_spec(name, qubits, seed)
    }
}
