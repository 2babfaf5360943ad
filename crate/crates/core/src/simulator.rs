//! Dense statevector simulation.
//!
//! Rotations use the full-angle convention `R_sigma(theta) = exp(-i theta sigma)`,
//! so every rotation angle is 2*pi periodic up to a global sign. Qubit 0 is the
//! most significant bit of a basis index.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::TfimSpec;
use crate::pauli::{Pauli, PauliString, PauliSum, DENSE_QUBIT_CAP};
use crate::rng::{derive_seed, rng_from_seed, unit_f64, StreamRng};
use crate::spectral::diagonalize;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= 1 << n {
            return Err(Error::Dimension(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wrap amplitudes, rejecting vectors whose norm is not 1 within 1e-10.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::Dimension(format!("{} amplitudes for {n} qubits", amps.len())));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Argument(format!("state norm is {norm}, expected 1")));
        }
        Ok(StateVector { n, amps })
    }

    /// Wrap amplitudes and rescale to unit norm.
    pub fn from_normalized(n: usize, mut amps: Vec<Complex64>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        StateVector { n, amps }
    }

    /// Haar-random state from complex Gaussian amplitudes.
    pub fn random(n: usize, rng: &mut StreamRng) -> Self {
        let amps = (0..1usize << n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        StateVector::from_normalized(n, amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("{} vs {} qubits", self.n, other.n)));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<psi|P|psi>` for a single Pauli string (complex in general).
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex64> {
        if p.num_qubits() != self.n {
            return Err(Error::Dimension(format!("{}-qubit string on {}-qubit state", p.num_qubits(), self.n)));
        }
        let act = p.action();
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| self.amps[i ^ act.flip].conj() * act.phase(i) * a)
            .sum())
    }

    /// `<psi|H|psi>` for a Hermitian sum.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        if !h.is_hermitian() {
            return Err(Error::Contract("expectation needs a Hermitian operator".into()));
        }
        if h.num_qubits() != self.n {
            return Err(Error::Dimension(format!("{}-qubit operator on {}-qubit state", h.num_qubits(), self.n)));
        }
        let mut total = ZERO;
        for (s, c) in h.iter() {
            total += c * self.pauli_expectation(&s)?;
        }
        debug_assert!(total.im.abs() < 1e-9, "imaginary residue {}", total.im);
        Ok(total.re)
    }

    #[inline]
    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << (self.n - 1 - q);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    #[inline]
    fn apply_controlled_1q(&mut self, control: usize, target: usize, m: [[Complex64; 2]; 2]) {
        let cbit = 1usize << (self.n - 1 - control);
        let tbit = 1usize << (self.n - 1 - target);
        for i in 0..self.amps.len() {
            if i & cbit != 0 && i & tbit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | tbit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | tbit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_pauli_string(&mut self, p: &PauliString) {
        let act = p.action();
        let mut out = vec![ZERO; self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            out[i ^ act.flip] = act.phase(i) * a;
        }
        self.amps = out;
    }

    /// `exp(i phi Z_a Z_b)`
    fn apply_zz_phase(&mut self, a: usize, b: usize, phi: f64) {
        let mask = (1usize << (self.n - 1 - a)) | (1usize << (self.n - 1 - b));
        let even = Complex64::from_polar(1.0, phi);
        let odd = Complex64::from_polar(1.0, -phi);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp *= if (i & mask).count_ones().is_multiple_of(2) { even } else { odd };
        }
    }

    /// Apply a dense unitary matrix.
    pub fn apply_matrix(&self, m: &nalgebra::DMatrix<Complex64>) -> Result<StateVector> {
        if m.ncols() != self.amps.len() || m.nrows() != self.amps.len() {
            return Err(Error::Dimension(format!("{}x{} matrix on {} amplitudes", m.nrows(), m.ncols(), self.amps.len())));
        }
        let v = m * DVector::from_column_slice(&self.amps);
        Ok(StateVector {
            n: self.n,
            amps: v.iter().copied().collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    /// Index into the parameter vector.
    Slot(usize),
    /// Fixed angle in radians.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    /// Controlled `R_Y`; `targets = [control, target]`.
    Cry,
    H,
    Sdg,
    Pauli(PauliString),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub angle: Option<Angle>,
}

impl Gate {
    pub fn rx(q: usize, angle: Angle) -> Self {
        Gate { kind: GateKind::Rx, targets: vec![q], angle: Some(angle) }
    }

    pub fn ry(q: usize, angle: Angle) -> Self {
        Gate { kind: GateKind::Ry, targets: vec![q], angle: Some(angle) }
    }

    pub fn rz(q: usize, angle: Angle) -> Self {
        Gate { kind: GateKind::Rz, targets: vec![q], angle: Some(angle) }
    }

    pub fn cry(control: usize, target: usize, angle: Angle) -> Self {
        Gate { kind: GateKind::Cry, targets: vec![control, target], angle: Some(angle) }
    }

    pub fn h(q: usize) -> Self {
        Gate { kind: GateKind::H, targets: vec![q], angle: None }
    }

    pub fn sdg(q: usize) -> Self {
        Gate { kind: GateKind::Sdg, targets: vec![q], angle: None }
    }

    pub fn pauli(p: PauliString) -> Self {
        Gate { kind: GateKind::Pauli(p), targets: Vec::new(), angle: None }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self.kind, GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cry)
    }

    fn resolve_angle(&self, params: &[f64]) -> Result<f64> {
        match self.angle {
            Some(Angle::Fixed(a)) => Ok(a),
            Some(Angle::Slot(k)) => params
                .get(k)
                .copied()
                .ok_or_else(|| Error::Dimension(format!("parameter slot {k} but only {} parameters", params.len()))),
            None => Err(Error::Argument(format!("{:?} gate has no angle", self.kind))),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Some(&q) = self.targets.iter().find(|&&q| q >= n) {
            return Err(Error::Dimension(format!("gate targets qubit {q} on a {n}-qubit register")));
        }
        let arity = match self.kind {
            GateKind::Cry => 2,
            GateKind::Pauli(ref p) => {
                if p.num_qubits() != n {
                    return Err(Error::Dimension(format!("{}-qubit Pauli gate on {n} qubits", p.num_qubits())));
                }
                0
            }
            _ => 1,
        };
        if self.targets.len() != arity {
            return Err(Error::Argument(format!("{:?} expects {arity} targets", self.kind)));
        }
        if arity == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::Argument("control and target coincide".into()));
        }
        match (self.is_rotation(), self.angle.is_some()) {
            (true, false) => Err(Error::Argument(format!("{:?} needs an angle", self.kind))),
            (false, true) => Err(Error::Argument(format!("{:?} takes no angle", self.kind))),
            _ => Ok(()),
        }
    }

    fn matrix(&self, theta: f64) -> [[Complex64; 2]; 2] {
        let (c, s) = (theta.cos(), theta.sin());
        let re = |x: f64| Complex64::new(x, 0.0);
        let im = |x: f64| Complex64::new(0.0, x);
        match self.kind {
            GateKind::Rx => [[re(c), im(-s)], [im(-s), re(c)]],
            GateKind::Ry | GateKind::Cry => [[re(c), re(-s)], [re(s), re(c)]],
            GateKind::Rz => [[Complex64::from_polar(1.0, -theta), ZERO], [ZERO, Complex64::from_polar(1.0, theta)]],
            GateKind::H => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                [[re(r), re(r)], [re(r), re(-r)]]
            }
            GateKind::Sdg => [[re(1.0), ZERO], [ZERO, im(-1.0)]],
            GateKind::Pauli(_) => unreachable!("Pauli gates are not 2x2"),
        }
    }

    fn apply_in_place(&self, state: &mut StateVector, params: &[f64], adjoint: bool) -> Result<()> {
        if let GateKind::Pauli(ref p) = self.kind {
            // Canonical Pauli strings are Hermitian and unitary; phased ones are not self-adjoint.
            if adjoint {
                let conj = PauliString::with_phase(p.ops().to_vec(), p.phase().mul(p.phase()).mul(p.phase()));
                state.apply_pauli_string(&conj);
            } else {
                state.apply_pauli_string(p);
            }
            return Ok(());
        }
        let theta = if self.is_rotation() { self.resolve_angle(params)? } else { 0.0 };
        let mut m = self.matrix(theta);
        if adjoint {
            m = [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]];
        }
        match self.kind {
            GateKind::Cry => state.apply_controlled_1q(self.targets[0], self.targets[1], m),
            _ => state.apply_1q(self.targets[0], m),
        }
        Ok(())
    }
}

/// Apply one gate, returning a new state.
pub fn apply_gate(state: &StateVector, gate: &Gate, params: &[f64]) -> Result<StateVector> {
    gate.validate(state.n)?;
    let mut out = state.clone();
    gate.apply_in_place(&mut out, params, false)?;
    Ok(out)
}

/// Ordered gate list over `n` qubits with `num_params` parameter slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    num_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, num_params: 0, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        if let Some(Angle::Slot(k)) = gate.angle {
            self.num_params = self.num_params.max(k + 1);
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params {
            return Err(Error::Argument(format!(
                "circuit has {} parameter slots, got {} values",
                self.num_params,
                params.len()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, state: &mut StateVector, params: &[f64]) -> Result<()> {
        self.check_params(params)?;
        for g in &self.gates {
            g.apply_in_place(state, params, false)?;
        }
        Ok(())
    }

    /// Apply the inverse circuit (reversed order, adjoint gates).
    pub fn apply_inverse(&self, state: &mut StateVector, params: &[f64]) -> Result<()> {
        self.check_params(params)?;
        for g in self.gates.iter().rev() {
            g.apply_in_place(state, params, true)?;
        }
        Ok(())
    }

    /// `U(params)|0...0>`
    pub fn run(&self, params: &[f64]) -> Result<StateVector> {
        let mut s = StateVector::zero(self.n);
        self.apply(&mut s, params)?;
        Ok(s)
    }
}

impl fmt::Display for Circuit {
    /// Text diagram, one line per qubit. Rotation labels carry their slot
    /// (`RZ[3]`) or fixed angle; `*` marks a control.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut columns: Vec<Vec<String>> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let angle = match g.angle {
                Some(Angle::Slot(k)) => format!("[{k}]"),
                Some(Angle::Fixed(a)) => format!("({a:.3})"),
                None => String::new(),
            };
            let mut col = vec![String::new(); self.n];
            match &g.kind {
                GateKind::Rx => col[g.targets[0]] = format!("RX{angle}"),
                GateKind::Ry => col[g.targets[0]] = format!("RY{angle}"),
                GateKind::Rz => col[g.targets[0]] = format!("RZ{angle}"),
                GateKind::Cry => {
                    col[g.targets[0]] = "*".into();
                    col[g.targets[1]] = format!("RY{angle}");
                }
                GateKind::H => col[g.targets[0]] = "H".into(),
                GateKind::Sdg => col[g.targets[0]] = "Sdg".into(),
                GateKind::Pauli(p) => {
                    for (q, op) in p.ops().iter().enumerate() {
                        if *op != Pauli::I {
                            col[q] = op.as_char().to_string();
                        }
                    }
                }
            }
            columns.push(col);
        }
        for q in 0..self.n {
            write!(f, "q{q}:")?;
            for col in &columns {
                let width = col.iter().map(|s| s.len()).max().unwrap_or(1).max(1);
                if col[q].is_empty() {
                    write!(f, " {}", "-".repeat(width))?;
                } else {
                    write!(f, " {:-<width$}", col[q])?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `exp(-i H t)|psi>` through exact diagonalization.
pub fn evolve_exact(state: &StateVector, h: &PauliSum, t: f64) -> Result<StateVector> {
    if h.num_qubits() > DENSE_QUBIT_CAP {
        return Err(Error::Resource(format!("{} qubits exceeds dense cap", h.num_qubits())));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let spectrum = diagonalize(h)?;
    state.apply_matrix(&spectrum.propagator(t))
}

/// First-order Trotter product for the TFIM,
/// `(prod_j exp(i J t Z_j Z_{j+1} / r) prod_j exp(i J h t X_j / r))^r`,
/// which approximates `exp(+i H t)`. Pass `-t` for `exp(-i H t)`.
pub fn evolve_trotter(state: &StateVector, model: &TfimSpec, t: f64, steps: usize) -> Result<StateVector> {
    model.validate()?;
    if steps < 1 {
        return Err(Error::Argument("Trotter step count must be at least 1".into()));
    }
    if model.qubits != state.n {
        return Err(Error::Dimension(format!("{}-site model on {}-qubit state", model.qubits, state.n)));
    }
    let n = state.n;
    let zz_phase = model.coupling * t / steps as f64;
    let x_angle = model.coupling * model.field * t / steps as f64;
    // exp(i a X) = R_X(-a)
    let rx = Gate::rx(0, Angle::Fixed(-x_angle)).matrix(-x_angle);
    let mut out = state.clone();
    for _ in 0..steps {
        for j in 0..n {
            out.apply_zz_phase(j, (j + 1) % n, zz_phase);
        }
        for j in 0..n {
            out.apply_1q(j, rx);
        }
    }
    Ok(out)
}

/// Shots per circuit and the seed of the sampling stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub shots: usize,
    pub seed: u64,
}

impl ShotPlan {
    pub fn new(shots: usize, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Argument("shot count must be positive".into()));
        }
        Ok(ShotPlan { shots, seed })
    }

    /// Independent plan for a labelled sub-stream.
    pub fn substream(&self, labels: &[u64]) -> ShotPlan {
        ShotPlan {
            shots: self.shots,
            seed: derive_seed(self.seed, labels),
        }
    }
}

/// Draw `plan.shots` basis indices from `|amplitude|^2`.
///
/// Each shot takes one 53-bit uniform `u` and returns the first index whose
/// cumulative probability exceeds `u`.
pub fn sample_bitstrings(state: &StateVector, plan: &ShotPlan) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(state.amps.len());
    let mut acc = 0.0;
    for a in &state.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let last = state.amps.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0);
    let mut rng = rng_from_seed(plan.seed);
    (0..plan.shots)
        .map(|_| {
            let u = unit_f64(&mut rng) * acc;
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

/// Render a basis index as an `n`-character bitstring, qubit 0 first.
pub fn bitstring(index: usize, n: usize) -> String {
    (0..n).map(|q| if index >> (n - 1 - q) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Rotate `state` so that measuring `p` becomes a Z-basis parity measurement:
/// H on X factors, Sdg then H on Y factors.
pub fn basis_change_gates(p: &PauliString) -> Vec<Gate> {
    let mut gates = Vec::new();
    for (q, op) in p.ops().iter().enumerate() {
        match op {
            Pauli::X => gates.push(Gate::h(q)),
            Pauli::Y => {
                gates.push(Gate::sdg(q));
                gates.push(Gate::h(q));
            }
            _ => {}
        }
    }
    gates
}

/// Estimate `<P>` from shots: apply basis changes, sample, average the
/// parity of the bits on the string's support.
pub fn estimate_pauli_sampled(state: &StateVector, p: &PauliString, plan: &ShotPlan) -> Result<f64> {
    if p.num_qubits() != state.n {
        return Err(Error::Dimension(format!("{}-qubit string on {}-qubit state", p.num_qubits(), state.n)));
    }
    let mut rotated = state.clone();
    for g in basis_change_gates(p) {
        g.apply_in_place(&mut rotated, &[], false)?;
    }
    let support: usize = p
        .ops()
        .iter()
        .enumerate()
        .filter(|(_, &op)| op != Pauli::I)
        .map(|(q, _)| 1usize << (state.n - 1 - q))
        .sum();
    let shots = sample_bitstrings(&rotated, plan);
    let total: i64 = shots
        .iter()
        .map(|&b| if (b & support).count_ones().is_multiple_of(2) { 1 } else { -1 })
        .sum();
    Ok(total as f64 / plan.shots as f64)
}

/// Shot-based `<H>`: every non-identity term is measured with its own circuit
/// on the sub-stream labelled by its position in canonical order. The identity
/// offset is added exactly and costs no shots.
pub fn estimate_expectation_sampled_state(state: &StateVector, h: &PauliSum, plan: &ShotPlan) -> Result<f64> {
    if !h.is_hermitian() {
        return Err(Error::Contract("sampled expectation needs a Hermitian operator".into()));
    }
    let (offset, terms) = h.expectation_decompose();
    let mut total = offset;
    for (k, (s, c)) in terms.iter().enumerate() {
        total += c * estimate_pauli_sampled(state, s, &plan.substream(&[k as u64]))?;
    }
    Ok(total)
}

/// Prepare `circuit(params)|0...0>` and estimate `<H>` from shots.
pub fn estimate_expectation_sampled(circuit: &Circuit, params: &[f64], h: &PauliSum, plan: &ShotPlan) -> Result<f64> {
    let state = circuit.run(params)?;
    estimate_expectation_sampled_state(&state, h, plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::tfim;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn dist(a: &StateVector, b: &StateVector) -> f64 {
        a.amps.iter().zip(&b.amps).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn rx_zero_is_identity() {
        let mut rng = rng_from_seed(1);
        let s = StateVector::random(3, &mut rng);
        let out = apply_gate(&s, &Gate::rx(1, Angle::Fixed(0.0)), &[]).unwrap();
        assert!(dist(&s, &out) < 1e-15);
    }

    #[test]
    fn rx_half_pi_full_angle() {
        let out = apply_gate(&StateVector::zero(1), &Gate::rx(0, Angle::Fixed(FRAC_PI_2)), &[]).unwrap();
        assert!(out.amps[0].norm() < 1e-15);
        assert!(close(out.amps[1], Complex64::new(0.0, -1.0), 1e-15));
    }

    #[test]
    fn hadamard_on_zero() {
        let out = apply_gate(&StateVector::zero(1), &Gate::h(0), &[]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(out.amps[0], Complex64::new(r, 0.0), 1e-15));
        assert!(close(out.amps[1], Complex64::new(r, 0.0), 1e-15));
    }

    #[test]
    fn cry_acts_only_when_control_set() {
        // |10> -> |1>(cos|0> + sin|1>) with full-angle RY
        let s = StateVector::basis(2, 0b10).unwrap();
        let out = apply_gate(&s, &Gate::cry(0, 1, Angle::Fixed(0.3)), &[]).unwrap();
        assert!(close(out.amps[0b10], Complex64::new(0.3f64.cos(), 0.0), 1e-15));
        assert!(close(out.amps[0b11], Complex64::new(0.3f64.sin(), 0.0), 1e-15));
        let s0 = StateVector::basis(2, 0b01).unwrap();
        let out0 = apply_gate(&s0, &Gate::cry(0, 1, Angle::Fixed(0.3)), &[]).unwrap();
        assert!(dist(&s0, &out0) < 1e-15);
    }

    #[test]
    fn bad_gates_rejected() {
        let s = StateVector::zero(2);
        assert!(matches!(apply_gate(&s, &Gate::rx(2, Angle::Fixed(0.1)), &[]), Err(Error::Dimension(_))));
        assert!(apply_gate(&s, &Gate::rx(0, Angle::Slot(3)), &[0.1]).is_err());
        assert!(apply_gate(&s, &Gate::cry(1, 1, Angle::Fixed(0.1)), &[]).is_err());
        let bad = Gate { kind: GateKind::H, targets: vec![0], angle: Some(Angle::Fixed(0.1)) };
        assert!(apply_gate(&s, &bad, &[]).is_err());
    }

    #[test]
    fn gates_preserve_norm_and_invert() {
        let mut rng = rng_from_seed(2);
        let mut c = Circuit::new(3);
        let kinds = [0, 1, 2, 3, 4, 5];
        for (k, kind) in kinds.iter().cycle().take(24).enumerate() {
            let q = k % 3;
            let g = match kind {
                0 => Gate::rx(q, Angle::Slot(k)),
                1 => Gate::ry(q, Angle::Slot(k)),
                2 => Gate::rz(q, Angle::Slot(k)),
                3 => Gate::cry(q, (q + 1) % 3, Angle::Slot(k)),
                4 => Gate::h(q),
                _ => Gate::sdg(q),
            };
            c.push(g).unwrap();
        }
        let params: Vec<f64> = (0..c.num_params()).map(|_| unit_f64(&mut rng) * 2.0 * PI).collect();
        let start = StateVector::random(3, &mut rng);
        let mut s = start.clone();
        c.apply(&mut s, &params).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-10);
        c.apply_inverse(&mut s, &params).unwrap();
        assert!(dist(&s, &start) < 1e-12);
    }

    #[test]
    fn pauli_gate_matches_apply() {
        let p: PauliString = "XYZ".parse().unwrap();
        let mut rng = rng_from_seed(3);
        let s = StateVector::random(3, &mut rng);
        let out = apply_gate(&s, &Gate::pauli(p.clone()), &[]).unwrap();
        let direct = PauliSum::from_string(&p, Complex64::new(1.0, 0.0)).apply(s.amplitudes()).unwrap();
        for (a, b) in out.amps.iter().zip(&direct) {
            assert!(close(*a, *b, 1e-15));
        }
    }

    #[test]
    fn expectation_examples() {
        for n in 2..6 {
            let h = tfim(&TfimSpec::new(n, 1.0, 0.0)).unwrap();
            let e = StateVector::zero(n).expectation(&h).unwrap();
            let expect = if n == 2 { 2.0 } else { n as f64 };
            assert!((e - expect).abs() < 1e-12);
        }
        let plus = apply_gate(&StateVector::zero(1), &Gate::h(0), &[]).unwrap();
        let x = PauliSum::from_labels(&[(1.0, "X")]).unwrap();
        assert!((plus.expectation(&x).unwrap() - 1.0).abs() < 1e-15);
        let non_herm = x.scale(Complex64::new(0.0, 1.0));
        assert!(matches!(plus.expectation(&non_herm), Err(Error::Contract(_))));
    }

    #[test]
    fn expectation_matches_dense_quadratic_form() {
        let mut rng = rng_from_seed(4);
        let h = PauliSum::from_labels(&[(0.4, "XYZI"), (-1.3, "ZZII"), (0.2, "IIYY"), (0.9, "XIIX"), (0.5, "IIII")]).unwrap();
        let s = StateVector::random(4, &mut rng);
        let d = h.to_dense().unwrap();
        let v = DVector::from_column_slice(s.amplitudes());
        let q = (v.adjoint() * &d * &v)[(0, 0)];
        assert!((s.expectation(&h).unwrap() - q.re).abs() < 1e-10);
    }

    #[test]
    fn exact_evolution_properties() {
        let mut rng = rng_from_seed(5);
        let h = tfim(&TfimSpec::new(3, 1.0, 0.7)).unwrap();
        let s = StateVector::random(3, &mut rng);
        assert_eq!(evolve_exact(&s, &h, 0.0).unwrap(), s);

        let a = evolve_exact(&evolve_exact(&s, &h, 0.4).unwrap(), &h, 0.9).unwrap();
        let b = evolve_exact(&s, &h, 1.3).unwrap();
        assert!(dist(&a, &b) < 1e-9);
        assert!((b.norm() - 1.0).abs() < 1e-10);

        let spec = diagonalize(&h).unwrap();
        let v = spec.eigenvector(2);
        let ev = evolve_exact(&v, &h, 0.8).unwrap();
        let expect = Complex64::from_polar(1.0, -spec.eigenvalues()[2] * 0.8);
        assert!(close(v.inner(&ev).unwrap(), expect, 1e-10));

        let shifted = h.add(&PauliSum::identity(3, 2.7)).unwrap();
        let o1 = s.inner(&evolve_exact(&s, &h, 1.1).unwrap()).unwrap().norm();
        let o2 = s.inner(&evolve_exact(&s, &shifted, 1.1).unwrap()).unwrap().norm();
        assert!((o1 - o2).abs() < 1e-10);
    }

    #[test]
    fn exact_evolution_cap() {
        let h = PauliSum::identity(13, 1.0);
        let s = StateVector::zero(13);
        assert!(matches!(evolve_exact(&s, &h, 1.0), Err(Error::Resource(_))));
    }

    #[test]
    fn trotter_converges_to_exact() {
        let model = TfimSpec::new(3, 1.0, 1.0);
        let h = tfim(&model).unwrap();
        let mut rng = rng_from_seed(6);
        let s = StateVector::random(3, &mut rng);
        // evolve_trotter(+t) approximates exp(+iHt) = exact evolution at -t.
        let exact = evolve_exact(&s, &h, -0.7).unwrap();
        let d2048 = dist(&exact, &evolve_trotter(&s, &model, 0.7, 2048).unwrap());
        let d4096 = dist(&exact, &evolve_trotter(&s, &model, 0.7, 4096).unwrap());
        // First-order error is O(t^2 / r): halving per doubling of r.
        assert!(d2048 < 2.5e-4, "{d2048}");
        assert!(d4096 < 1e-4, "{d4096}");
        assert!((d2048 / d4096 - 2.0).abs() < 0.1);
    }

    #[test]
    fn trotter_zero_field_is_exact_for_any_steps() {
        let model = TfimSpec::new(4, 1.0, 0.0);
        let mut rng = rng_from_seed(7);
        let s = StateVector::random(4, &mut rng);
        let one = evolve_trotter(&s, &model, 0.9, 1).unwrap();
        let many = evolve_trotter(&s, &model, 0.9, 17).unwrap();
        assert!(dist(&one, &many) < 1e-12);
        let exact = evolve_exact(&s, &tfim(&model).unwrap(), -0.9).unwrap();
        assert!(dist(&one, &exact) < 1e-10);
    }

    #[test]
    fn trotter_error_shrinks_with_steps() {
        let model = TfimSpec::new(5, 1.0, 1.0);
        let h = tfim(&model).unwrap();
        let mut rng = rng_from_seed(8);
        let s = StateVector::random(5, &mut rng);
        let exact = evolve_exact(&s, &h, -1.0).unwrap();
        let e1 = dist(&exact, &evolve_trotter(&s, &model, 1.0, 1).unwrap());
        let e8 = dist(&exact, &evolve_trotter(&s, &model, 1.0, 8).unwrap());
        assert!(e1 >= 4.0 * e8, "e1={e1} e8={e8}");
        assert!(evolve_trotter(&s, &model, 1.0, 0).is_err());
    }

    #[test]
    fn sampling_examples() {
        let plan = ShotPlan::new(1000, 42).unwrap();
        assert!(sample_bitstrings(&StateVector::zero(3), &plan).iter().all(|&b| b == 0));
        let plus = apply_gate(&StateVector::zero(1), &Gate::h(0), &[]).unwrap();
        let shots = sample_bitstrings(&plus, &plan);
        let frac = shots.iter().filter(|&&b| b == 1).count() as f64 / 1000.0;
        assert!((frac - 0.5).abs() < 5.0 * 0.0158);
        assert_eq!(shots, sample_bitstrings(&plus, &plan));
        assert!(ShotPlan::new(0, 1).is_err());
        assert_eq!(bitstring(0b011, 3), "011");
    }

    #[test]
    fn sampled_expectation_examples() {
        let plan = ShotPlan::new(17, 1).unwrap();
        let z0 = PauliSum::from_labels(&[(1.0, "ZI")]).unwrap();
        let e = estimate_expectation_sampled_state(&StateVector::zero(2), &z0, &plan).unwrap();
        assert_eq!(e, 1.0);
        let id = PauliSum::identity(2, 3.25);
        assert_eq!(estimate_expectation_sampled_state(&StateVector::zero(2), &id, &plan).unwrap(), 3.25);
    }

    #[test]
    fn sampled_y_measurement() {
        // R_X(-pi/4)|0> = (|0> + i|1>)/sqrt2 is the +1 eigenstate of Y.
        let s = apply_gate(&StateVector::zero(1), &Gate::rx(0, Angle::Fixed(-PI / 4.0)), &[]).unwrap();
        let y = PauliSum::from_labels(&[(1.0, "Y")]).unwrap();
        assert!((s.expectation(&y).unwrap() - 1.0).abs() < 1e-12);
        let plan = ShotPlan::new(200, 9).unwrap();
        assert_eq!(estimate_expectation_sampled_state(&s, &y, &plan).unwrap(), 1.0);
    }

    #[test]
    fn diagram_has_one_line_per_qubit() {
        let mut c = Circuit::new(2);
        c.push(Gate::rz(0, Angle::Slot(0))).unwrap();
        c.push(Gate::cry(0, 1, Angle::Slot(1))).unwrap();
        let text = c.to_string();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("q0: RZ[0] *"));
        assert!(text.lines().nth(1).unwrap().contains("RY[1]"));
    }
}
