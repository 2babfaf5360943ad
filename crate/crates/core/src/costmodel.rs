//! Gate and circuit counts for estimating `F_H` and `F_Q` on a periodic
//! transverse-field Ising chain.
//!
//! Counts are obtained constructively: the ansatz is built and counted, the
//! variance estimator uses one circuit per Pauli term of `H` and of `H^2`
//! (the identity term of `H^2` included), each with one Hadamard per `X`
//! factor, and the unitary estimator runs `V`, an `r`-step product formula
//! with one gate per Hamiltonian term, and `V^dagger`. The polynomial closed
//! forms are reported alongside by [`closed_form`].

use serde::{Deserialize, Serialize};

use crate::ansatz::{self, AnsatzSpec};
use crate::error::{Error, Result};
use crate::models::{tfim, TfimSpec};
use crate::pauli::{Pauli, PauliSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCount {
    pub n: usize,
    pub l: usize,
    pub r: usize,
    /// Gates in the Trotterized evolution.
    pub n_u: usize,
    /// Gates in the ansatz.
    pub n_v: usize,
    /// Gates in the single unitary-cost circuit.
    pub n_q: usize,
    /// Gates over all circuits measuring `H`.
    pub n_h1: usize,
    /// Gates over all circuits measuring `H^2`.
    pub n_h2: usize,
    pub n_h: usize,
    pub circuits_h: usize,
}

impl ResourceCount {
    /// Shot totals for `m` shots per circuit: (variance, unitary).
    pub fn shots(&self, m: usize) -> (usize, usize) {
        (self.circuits_h * m, m)
    }
}

fn check_inputs(n: usize, l: usize, r: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Argument(format!("need at least 2 qubits, got {n}")));
    }
    if l == 0 {
        return Err(Error::Argument("layer count must be positive".into()));
    }
    if r == 0 {
        return Err(Error::Argument("Trotter step count must be positive".into()));
    }
    Ok(())
}

fn measurement_gates(sum: &PauliSum, n_v: usize) -> (usize, usize) {
    let circuits = sum.num_terms();
    let hadamards: usize = sum.iter().map(|(s, _)| s.count(Pauli::X)).sum();
    (circuits, circuits * n_v + hadamards)
}

/// Count gates and circuits for an `n`-site chain (unit coupling and
/// field), `l` ansatz layers and `r` Trotter steps.
pub fn count(n: usize, l: usize, r: usize) -> Result<ResourceCount> {
    check_inputs(n, l, r)?;
    let h = tfim(&TfimSpec::new(n, 1.0, 1.0))?;
    let h2 = h.square();
    let n_v = ansatz::build(&AnsatzSpec::new(n, l))?.gates().len();
    let n_u = r * h.num_terms();
    let (c1, n_h1) = measurement_gates(&h, n_v);
    let (c2, n_h2) = measurement_gates(&h2, n_v);
    Ok(ResourceCount {
        n,
        l,
        r,
        n_u,
        n_v,
        n_q: 2 * n_v + n_u,
        n_h1,
        n_h2,
        n_h: n_h1 + n_h2,
        circuits_h: c1 + c2,
    })
}

/// Polynomial forms of the variance-estimator counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub n_q: i64,
    pub n_h1: i64,
    pub n_h2: i64,
    pub n_h: i64,
    pub circuits_h: i64,
}

pub fn closed_form(n: usize, l: usize, r: usize) -> Result<ClosedForm> {
    check_inputs(n, l, r)?;
    let (n, l, r) = (n as i64, l as i64, r as i64);
    Ok(ClosedForm {
        n_q: 2 * n * (4 * l + r),
        n_h1: 2 * n * n * (4 * l + 1),
        n_h2: (4 * l - 3) * n + (2 - 12 * l) * n * n + 8 * l * n * n * n,
        n_h: (4 * l - 2) * (n - n * n) + 8 * l * n * n * n,
        circuits_h: 2 * n + (2 * n * n - 3 * n + 1),
    })
}

/// Fields where the constructive count and the closed form disagree.
pub fn formula_mismatches(c: &ResourceCount, f: &ClosedForm) -> Vec<&'static str> {
    let pairs = [
        ("N_Q", c.n_q, f.n_q),
        ("N_H1", c.n_h1, f.n_h1),
        ("N_H2", c.n_h2, f.n_h2),
        ("N_H", c.n_h, f.n_h),
        ("circuits_H", c.circuits_h, f.circuits_h),
    ];
    pairs.iter().filter(|(_, a, b)| *a as i64 != *b).map(|(name, _, _)| *name).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub n: usize,
    pub r: usize,
    pub n_q: usize,
    pub n_h: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverReport {
    pub alpha: f64,
    pub l: usize,
    pub rows: Vec<CrossoverRow>,
    /// Least `n` with `N_Q < N_H`.
    pub first_below: Option<usize>,
    /// Least `n` from which `N_Q < N_H` holds for the rest of the range.
    pub below_from: Option<usize>,
    /// Least `n` with `N_Q >= N_H`.
    pub first_above: Option<usize>,
}

/// Compare `N_Q` at `r = ceil(n^alpha)` with `N_H` over `n_range`.
pub fn crossover(n_range: std::ops::RangeInclusive<usize>, l: usize, alpha: f64) -> Result<CrossoverReport> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Argument(format!("exponent {alpha} must be finite and non-negative")));
    }
    if n_range.is_empty() {
        return Err(Error::Argument("empty qubit range".into()));
    }
    let mut rows = Vec::new();
    for n in n_range {
        let r = ((n as f64).powf(alpha).ceil() as usize).max(1);
        let c = count(n, l, r)?;
        rows.push(CrossoverRow { n, r, n_q: c.n_q, n_h: c.n_h });
    }
    let first_below = rows.iter().find(|row| row.n_q < row.n_h).map(|row| row.n);
    let first_above = rows.iter().find(|row| row.n_q >= row.n_h).map(|row| row.n);
    let tail = rows.iter().rev().take_while(|row| row.n_q < row.n_h).count();
    let below_from = (tail > 0).then(|| rows[rows.len() - tail].n);
    Ok(CrossoverReport { alpha, l, rows, first_below, below_from, first_above })
}
