//! Eigenstate certification costs: the energy variance `F_H` and the
//! unitary-overlap cost `F_Q = 1 - |<psi| exp(-iHt) |psi>|^2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{self, AnsatzSpec};
use crate::error::{Error, Result};
use crate::models::TfimSpec;
use crate::optimizer::{central_difference, Problem};
use crate::pauli::PauliSum;
use crate::simulator::{
    estimate_expectation_sampled_state, evolve_exact, evolve_trotter, sample_bitstrings, Circuit, ShotPlan, StateVector,
};
use crate::spectral::diagonalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Variance,
    Unitary,
}

impl CostKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CostKind::Variance => "variance",
            CostKind::Unitary => "unitary",
        }
    }
}

impl std::str::FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(CostKind::Variance),
            "unitary" => Ok(CostKind::Unitary),
            _ => Err(Error::Parse(format!("unknown cost `{s}` (expected variance or unitary)"))),
        }
    }
}

/// How `exp(-iHt)` is realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "evolution", rename_all = "snake_case")]
pub enum Evolution {
    Exact,
    /// First-order product formula for a TFIM with `steps` repetitions.
    Trotter { model: TfimSpec, steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CostMode {
    Exact,
    Trotter { model: TfimSpec, steps: usize },
    Sampled { plan: ShotPlan, evolution: Evolution },
}

impl CostMode {
    fn evolution(&self) -> Evolution {
        match *self {
            CostMode::Exact => Evolution::Exact,
            CostMode::Trotter { model, steps } => Evolution::Trotter { model, steps },
            CostMode::Sampled { evolution, .. } => evolution,
        }
    }
}

fn evolve(psi: &StateVector, h: &PauliSum, t: f64, evolution: &Evolution) -> Result<StateVector> {
    match evolution {
        Evolution::Exact => evolve_exact(psi, h, t),
        // The product formula targets exp(+iHt).
        Evolution::Trotter { model, steps } => evolve_trotter(psi, model, -t, *steps),
    }
}

/// `<H^2> - <H>^2`. Sampled estimates may come out slightly negative.
pub fn f_h(psi: &StateVector, h: &PauliSum, mode: &CostMode) -> Result<f64> {
    if !h.is_hermitian() {
        return Err(Error::Contract("variance needs a Hermitian operator".into()));
    }
    if h.num_qubits() != psi.num_qubits() {
        return Err(Error::Dimension(format!("{}-qubit operator on {}-qubit state", h.num_qubits(), psi.num_qubits())));
    }
    match mode {
        CostMode::Exact => {
            let hpsi = h.apply(psi.amplitudes())?;
            let mean: f64 = psi.amplitudes().iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
            let second: f64 = hpsi.iter().map(|v| v.norm_sqr()).sum();
            Ok(second - mean * mean)
        }
        CostMode::Trotter { .. } => Err(Error::Argument("Trotter evolution applies only to the unitary cost".into())),
        CostMode::Sampled { plan, .. } => {
            let mean = estimate_expectation_sampled_state(psi, h, &plan.substream(&[0]))?;
            let second = estimate_expectation_sampled_state(psi, &h.square(), &plan.substream(&[1]))?;
            Ok(second - mean * mean)
        }
    }
}

/// `1 - |<psi| exp(-iHt) |psi>|^2`.
///
/// The sampled mode estimates the return probability of `|0...0>` under
/// `W Q W^dagger` where `W` prepares `psi`; here `W` is the Householder
/// reflection exchanging `|0...0>` and `psi`.
pub fn f_q(psi: &StateVector, h: &PauliSum, t: f64, mode: &CostMode) -> Result<f64> {
    if h.num_qubits() != psi.num_qubits() {
        return Err(Error::Dimension(format!("{}-qubit operator on {}-qubit state", h.num_qubits(), psi.num_qubits())));
    }
    let evolved = evolve(psi, h, t, &mode.evolution())?;
    match mode {
        CostMode::Exact | CostMode::Trotter { .. } => Ok(1.0 - psi.inner(&evolved)?.norm_sqr()),
        CostMode::Sampled { plan, .. } => {
            let returned = householder_to_zero(psi, &evolved)?;
            Ok(1.0 - zero_fraction(&returned, plan))
        }
    }
}

/// Apply the reflection `R = I - 2 w w^dagger` that maps `psi` to `|0...0>`
/// (up to phase) to `phi`.
fn householder_to_zero(psi: &StateVector, phi: &StateVector) -> Result<StateVector> {
    let n = psi.num_qubits();
    let a0 = psi.amplitudes()[0];
    let phase = if a0.norm() > 0.0 { a0 / a0.norm() } else { Complex64::new(1.0, 0.0) };
    // w ∝ psi - phase |0>, so R psi = phase |0>.
    let mut w: Vec<Complex64> = psi.amplitudes().to_vec();
    w[0] -= phase;
    let norm = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-15 {
        return Ok(phi.clone());
    }
    for v in &mut w {
        *v /= norm;
    }
    let proj: Complex64 = w.iter().zip(phi.amplitudes()).map(|(a, b)| a.conj() * b).sum();
    let out: Vec<Complex64> = phi.amplitudes().iter().zip(&w).map(|(b, a)| b - 2.0 * proj * a).collect();
    Ok(StateVector::from_normalized(n, out))
}

fn zero_fraction(state: &StateVector, plan: &ShotPlan) -> f64 {
    let zeros = sample_bitstrings(state, plan).iter().filter(|&&b| b == 0).count();
    zeros as f64 / plan.shots as f64
}

/// Sampled `F_Q` with an explicit preparation circuit: run `V`, the
/// evolution, then `V^dagger`, and count all-zero outcomes.
pub fn f_q_sampled_circuit(
    circuit: &Circuit,
    params: &[f64],
    h: &PauliSum,
    t: f64,
    plan: &ShotPlan,
    evolution: &Evolution,
) -> Result<f64> {
    let psi = circuit.run(params)?;
    let mut state = evolve(&psi, h, t, evolution)?;
    circuit.apply_inverse(&mut state, params)?;
    Ok(1.0 - zero_fraction(&state, plan))
}

/// A cost function: which cost, for which Hamiltonian, evaluated how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub kind: CostKind,
    pub hamiltonian: PauliSum,
    pub time: Option<f64>,
    pub mode: CostMode,
}

impl CostSpec {
    pub fn variance(hamiltonian: PauliSum) -> Self {
        CostSpec { kind: CostKind::Variance, hamiltonian, time: None, mode: CostMode::Exact }
    }

    pub fn unitary(hamiltonian: PauliSum, time: f64) -> Self {
        CostSpec { kind: CostKind::Unitary, hamiltonian, time: Some(time), mode: CostMode::Exact }
    }

    pub fn new(kind: CostKind, hamiltonian: PauliSum, time: f64) -> Self {
        match kind {
            CostKind::Variance => CostSpec::variance(hamiltonian),
            CostKind::Unitary => CostSpec::unitary(hamiltonian, time),
        }
    }

    pub fn with_mode(mut self, mode: CostMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.hamiltonian.is_hermitian() {
            return Err(Error::Contract("cost Hamiltonian must be Hermitian".into()));
        }
        match (self.kind, self.time, &self.mode) {
            (CostKind::Unitary, None, _) => Err(Error::Argument("unitary cost needs an evolution time".into())),
            (CostKind::Unitary, Some(t), _) if !t.is_finite() => Err(Error::Argument(format!("evolution time {t} is not finite"))),
            (CostKind::Variance, _, CostMode::Trotter { .. }) => {
                Err(Error::Argument("Trotter evolution applies only to the unitary cost".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, psi: &StateVector) -> Result<f64> {
        self.validate()?;
        match self.kind {
            CostKind::Variance => f_h(psi, &self.hamiltonian, &self.mode),
            CostKind::Unitary => f_q(psi, &self.hamiltonian, self.time.unwrap_or_default(), &self.mode),
        }
    }
}

enum Kernel {
    /// Dense `H`; cost is `|H psi|^2 - <psi|H psi>^2`.
    Variance(DMatrix<Complex64>),
    /// Dense evolution operator; cost is `1 - |<psi|Q psi>|^2`.
    Unitary(DMatrix<Complex64>),
    Sampled,
}

/// A cost bound to an ansatz, with operators precomputed for repeated
/// evaluation inside an optimizer.
pub struct CostFunction {
    spec: CostSpec,
    ansatz: AnsatzSpec,
    circuit: Circuit,
    kernel: Kernel,
}

impl CostFunction {
    pub fn new(spec: CostSpec, ansatz: AnsatzSpec) -> Result<Self> {
        spec.validate()?;
        let circuit = ansatz::build(&ansatz)?;
        let h = &spec.hamiltonian;
        if h.num_qubits() != ansatz.qubits {
            return Err(Error::Dimension(format!("{}-qubit Hamiltonian with {}-qubit ansatz", h.num_qubits(), ansatz.qubits)));
        }
        let kernel = match (&spec.mode, spec.kind) {
            (CostMode::Sampled { .. }, _) => Kernel::Sampled,
            (_, CostKind::Variance) => Kernel::Variance(h.to_dense()?),
            (CostMode::Exact, CostKind::Unitary) => Kernel::Unitary(diagonalize(h)?.propagator(spec.time.unwrap_or_default())),
            (CostMode::Trotter { model, steps }, CostKind::Unitary) => {
                let dim = 1usize << ansatz.qubits;
                let mut q = DMatrix::<Complex64>::zeros(dim, dim);
                for j in 0..dim {
                    let col = evolve_trotter(&StateVector::basis(ansatz.qubits, j)?, model, -spec.time.unwrap_or_default(), *steps)?;
                    q.set_column(j, &DVector::from_column_slice(col.amplitudes()));
                }
                Kernel::Unitary(q)
            }
        };
        Ok(CostFunction { spec, ansatz, circuit, kernel })
    }

    pub fn spec(&self) -> &CostSpec {
        &self.spec
    }

    pub fn ansatz(&self) -> &AnsatzSpec {
        &self.ansatz
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        if params.len() != self.ansatz.num_params() {
            return Err(Error::Argument(format!(
                "ansatz takes {} parameters, got {}",
                self.ansatz.num_params(),
                params.len()
            )));
        }
        self.circuit.run(params)
    }

    pub fn evaluate_state(&self, psi: &StateVector) -> Result<f64> {
        let v = DVector::from_column_slice(psi.amplitudes());
        match &self.kernel {
            Kernel::Variance(h) => {
                let hv = h * &v;
                let mean = v.dotc(&hv).re;
                Ok(hv.norm_squared() - mean * mean)
            }
            Kernel::Unitary(q) => Ok(1.0 - v.dotc(&(q * &v)).norm_sqr()),
            Kernel::Sampled => self.spec.evaluate(psi),
        }
    }

    pub fn value(&self, params: &[f64]) -> Result<f64> {
        self.evaluate_state(&self.prepare(params)?)
    }

    fn require_differentiable(&self) -> Result<()> {
        if let CostMode::Sampled { .. } = self.spec.mode {
            return Err(Error::Unsupported("gradients of sampled costs are not supported".into()));
        }
        Ok(())
    }

    /// Central-difference gradient with step 1e-6.
    pub fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.require_differentiable()?;
        self.prepare(params)?;
        let mut g = vec![0.0; params.len()];
        central_difference(|x| self.value(x).unwrap_or(f64::NAN), params, &mut g);
        Ok(g)
    }

    /// Five-point stencil gradient with step `step`.
    pub fn gradient_five_point(&self, params: &[f64], step: f64) -> Result<Vec<f64>> {
        self.require_differentiable()?;
        let mut probe = params.to_vec();
        let mut g = vec![0.0; params.len()];
        for k in 0..params.len() {
            let mut at = |d: f64| -> Result<f64> {
                probe[k] = params[k] + d;
                self.value(&probe)
            };
            let (p2, p1, m1, m2) = (at(2.0 * step)?, at(step)?, at(-step)?, at(-2.0 * step)?);
            probe[k] = params[k];
            g[k] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * step);
        }
        Ok(g)
    }
}

impl Problem for CostFunction {
    fn dim(&self) -> usize {
        self.ansatz.num_params()
    }

    fn value(&self, x: &[f64]) -> f64 {
        CostFunction::value(self, x).unwrap_or(f64::NAN)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        central_difference(|p| CostFunction::value(self, p).unwrap_or(f64::NAN), x, grad);
    }
}

/// Gradient of `cost` over the parameters of `ansatz` at `params`.
pub fn gradient(cost: &CostSpec, ansatz: &AnsatzSpec, params: &[f64]) -> Result<Vec<f64>> {
    CostFunction::new(cost.clone(), *ansatz)?.gradient(params)
}
