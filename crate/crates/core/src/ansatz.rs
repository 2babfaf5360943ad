//! Hardware-efficient ansatz: an RZ-RX-RZ block on every qubit followed by
//! a ring of controlled-Y rotations, repeated per layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{Angle, Circuit, Gate, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub qubits: usize,
    pub layers: usize,
}

impl Default for AnsatzSpec {
    fn default() -> Self {
        AnsatzSpec { qubits: 4, layers: 3 }
    }
}

impl AnsatzSpec {
    pub fn new(qubits: usize, layers: usize) -> Self {
        AnsatzSpec { qubits, layers }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits < 2 {
            return Err(Error::Argument(format!("ansatz needs at least 2 qubits, got {}", self.qubits)));
        }
        if self.layers < 1 {
            return Err(Error::Argument("ansatz needs at least one layer".into()));
        }
        Ok(())
    }

    /// `4 * layers * qubits`
    pub fn num_params(&self) -> usize {
        4 * self.layers * self.qubits
    }

    /// Slot of rotation `k` (0: RZ, 1: RX, 2: RZ) on `qubit` in `layer`.
    pub fn rotation_slot(&self, layer: usize, qubit: usize, k: usize) -> usize {
        4 * self.qubits * layer + 3 * qubit + k
    }

    /// Slot of the controlled rotation with control `qubit` in `layer`.
    pub fn entangler_slot(&self, layer: usize, qubit: usize) -> usize {
        4 * self.qubits * layer + 3 * self.qubits + qubit
    }
}

pub fn build(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    let n = spec.qubits;
    let mut c = Circuit::new(n);
    for layer in 0..spec.layers {
        for q in 0..n {
            c.push(Gate::rz(q, Angle::Slot(spec.rotation_slot(layer, q, 0))))?;
            c.push(Gate::rx(q, Angle::Slot(spec.rotation_slot(layer, q, 1))))?;
            c.push(Gate::rz(q, Angle::Slot(spec.rotation_slot(layer, q, 2))))?;
        }
        for q in 0..n {
            c.push(Gate::cry(q, (q + 1) % n, Angle::Slot(spec.entangler_slot(layer, q))))?;
        }
    }
    Ok(c)
}

/// `U(params)|0...0>`
pub fn prepare(spec: &AnsatzSpec, params: &[f64]) -> Result<StateVector> {
    if params.len() != spec.num_params() {
        return Err(Error::Argument(format!(
            "ansatz takes {} parameters, got {}",
            spec.num_params(),
            params.len()
        )));
    }
    build(spec)?.run(params)
}
