//! Fixtures shared by the kernel benchmarks.

use eigencert::ansatz::{self, AnsatzSpec};
use eigencert::models::tfim;
use eigencert::rng::{rng_from_seed, unit_f64};
use eigencert::{PauliSum, StateVector, TfimSpec};

/// Critical transverse-field Ising chain with an ansatz of `layers` layers
/// and a seeded parameter vector.
pub struct Fixture {
    pub model: TfimSpec,
    pub hamiltonian: PauliSum,
    pub ansatz: AnsatzSpec,
    pub params: Vec<f64>,
}

impl Fixture {
    pub fn new(qubits: usize, layers: usize) -> Self {
        let model = TfimSpec::new(qubits, 1.0, 1.0);
        let ansatz = AnsatzSpec::new(qubits, layers);
        let mut rng = rng_from_seed(qubits as u64 * 1000 + layers as u64);
        let params = (0..ansatz.num_params()).map(|_| std::f64::consts::TAU * unit_f64(&mut rng)).collect();
        Fixture { hamiltonian: tfim(&model).expect("valid model"), model, ansatz, params }
    }

    pub fn state(&self) -> StateVector {
        ansatz::prepare(&self.ansatz, &self.params).expect("matching parameter count")
    }
}
