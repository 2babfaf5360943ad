//! Variational eigenstate preparation with two certification costs: the
//! energy variance `<H^2> - <H>^2` and the unitary overlap
//! `1 - |<exp(-iHt)>|^2`, on a dense statevector simulator.

pub mod ansatz;
pub mod cost;
pub mod costmodel;
pub mod error;
pub mod harness;
pub mod models;
pub mod optimizer;
pub mod pauli;
pub mod rng;
pub mod simulator;
pub mod spectral;

pub use num_complex::Complex64;

pub use ansatz::AnsatzSpec;
pub use cost::{CostFunction, CostKind, CostMode, CostSpec, Evolution};
pub use costmodel::ResourceCount;
pub use error::{Error, Result};
pub use models::{FermionSpec, ModelSpec, RandomHermitianSpec, SchwingerSpec, TfimSpec};
pub use optimizer::{BfgsConfig, Problem, RunRecord, Termination};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use simulator::{Circuit, Gate, ShotPlan, StateVector};
pub use spectral::Spectrum;
