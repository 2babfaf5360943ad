//! Model Hamiltonians as Pauli sums.
//!
//! Sites are 1-based in the physics formulas and map to qubit `site - 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{check_dense_cap, Pauli, PauliString, PauliSum, DENSE_QUBIT_CAP};
use crate::rng::rng_from_seed;

/// Transverse-field Ising chain `J * sum_j (Z_j Z_{j+1} + h X_j)` on a ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfimSpec {
    pub qubits: usize,
    pub coupling: f64,
    pub field: f64,
}

impl TfimSpec {
    pub fn new(qubits: usize, coupling: f64, field: f64) -> Self {
        TfimSpec {
            qubits,
            coupling,
            field,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits < 2 {
            return Err(Error::Argument("TFIM needs at least 2 qubits".into()));
        }
        Ok(())
    }
}

/// Lattice Schwinger model with staggered fermions; `qubits` must be even.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwingerSpec {
    pub qubits: usize,
    pub mass: f64,
}

/// Spinless fermions with nearest and next-nearest neighbor repulsion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermionSpec {
    pub qubits: usize,
    pub hopping: f64,
    pub u1: f64,
    pub u2: f64,
}

impl Default for FermionSpec {
    fn default() -> Self {
        FermionSpec {
            qubits: 4,
            hopping: 1.0,
            u1: 2.0,
            u2: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomHermitianSpec {
    pub qubits: usize,
    pub scale: f64,
    pub seed: u64,
}

pub fn tfim(spec: &TfimSpec) -> Result<PauliSum> {
    spec.validate()?;
    let n = spec.qubits;
    let mut h = PauliSum::zero(n);
    let j = Complex64::new(spec.coupling, 0.0);
    for site in 0..n {
        let next = (site + 1) % n;
        h.add_term(&PauliString::from_sparse(n, &[(site, Pauli::Z), (next, Pauli::Z)]), j);
        h.add_term(&PauliString::single(n, site, Pauli::X), j * spec.field);
    }
    Ok(h)
}

fn single(n: usize, q: usize, op: Pauli, coeff: Complex64) -> PauliSum {
    PauliSum::from_string(&PauliString::single(n, q, op), coeff)
}

/// `(X + sign * iY) / 2` on qubit `q`.
fn ladder(n: usize, q: usize, sign: f64) -> PauliSum {
    single(n, q, Pauli::X, Complex64::new(0.5, 0.0))
        .add(&single(n, q, Pauli::Y, Complex64::new(0.0, 0.5 * sign)))
        .expect("same width")
}

fn stagger(site: usize) -> f64 {
    if site.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Schwinger Hamiltonian with `sigma^± = (X ± iY)/2`, hopping on an open chain
/// and the electric field `L_j = -1/2 sum_{i<=j} (Z_i + (-1)^i)`.
pub fn schwinger(spec: &SchwingerSpec) -> Result<PauliSum> {
    let n = spec.qubits;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Argument(format!(
            "Schwinger model needs an even number of sites, got {n}"
        )));
    }
    let mut h = PauliSum::zero(n);
    for site in 1..n {
        let (q, next) = (site - 1, site);
        let up_down = ladder(n, q, 1.0).mul(&ladder(n, next, -1.0))?;
        let down_up = ladder(n, q, -1.0).mul(&ladder(n, next, 1.0))?;
        h = h.add(&up_down)?.add(&down_up)?;
    }
    let mut field = PauliSum::zero(n);
    for site in 1..=n {
        let q = site - 1;
        h = h.add(&single(n, q, Pauli::Z, Complex64::new(0.5 * spec.mass * stagger(site), 0.0)))?;
        field = field
            .add(&single(n, q, Pauli::Z, Complex64::new(-0.5, 0.0)))?
            .add(&PauliSum::identity(n, -0.5 * stagger(site)))?;
        h = h.add(&field.square())?;
    }
    Ok(h)
}

/// Jordan-Wigner creation operator on qubit `q`. Occupied sites are `|1>`, so
/// `c^dagger_q = Z_0 ... Z_{q-1} |1><0|_q` and `n_q = (I - Z_q)/2`.
pub fn creation(n: usize, q: usize) -> PauliSum {
    let string: Vec<(usize, Pauli)> = (0..q).map(|k| (k, Pauli::Z)).collect();
    let zs = PauliSum::from_string(&PauliString::from_sparse(n, &string), Complex64::new(1.0, 0.0));
    zs.mul(&ladder(n, q, -1.0)).expect("same width")
}

pub fn annihilation(n: usize, q: usize) -> PauliSum {
    creation(n, q).adjoint()
}

pub fn number(n: usize, q: usize) -> PauliSum {
    creation(n, q).mul(&annihilation(n, q)).expect("same width")
}

pub fn total_number(n: usize) -> PauliSum {
    (0..n).fold(PauliSum::zero(n), |acc, q| acc.add(&number(n, q)).expect("same width"))
}

/// Spinless-fermion chain mapped with Jordan-Wigner; all sums wrap around.
pub fn fermions_jw(spec: &FermionSpec) -> Result<PauliSum> {
    let n = spec.qubits;
    if n < 2 {
        return Err(Error::Argument("fermion chain needs at least 2 sites".into()));
    }
    let mut h = PauliSum::zero(n);
    let minus_t = Complex64::new(-spec.hopping, 0.0);
    for q in 0..n {
        let next = (q + 1) % n;
        let fwd = creation(n, q).mul(&annihilation(n, next))?;
        let back = creation(n, next).mul(&annihilation(n, q))?;
        h = h.add(&fwd.add(&back)?.scale(minus_t))?;
    }
    for q in 0..n {
        let nn = number(n, q).mul(&number(n, (q + 1) % n))?;
        let nnn = number(n, q).mul(&number(n, (q + 2) % n))?;
        h = h.add(&nn.scale_real(spec.u1))?.add(&nnn.scale_real(spec.u2))?;
    }
    Ok(h)
}

/// The dense matrix drawn for a random Hamiltonian: entries of `A` are complex
/// normals with unit variance (real and imaginary parts each variance 1/2),
/// symmetrized as `(A + A^dagger)/2` and multiplied by `scale`.
pub fn random_hermitian_matrix(spec: &RandomHermitianSpec) -> Result<DMatrix<Complex64>> {
    check_dense_cap(spec.qubits, DENSE_QUBIT_CAP)?;
    if spec.qubits == 0 {
        return Err(Error::Argument("random Hamiltonian needs at least one qubit".into()));
    }
    let dim = 1usize << spec.qubits;
    let mut rng = rng_from_seed(spec.seed);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid sigma");
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] = Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    let h = (&a + a.adjoint()) * Complex64::new(0.5 * spec.scale, 0.0);
    Ok(h)
}

pub fn random_hermitian(spec: &RandomHermitianSpec) -> Result<PauliSum> {
    let m = random_hermitian_matrix(spec)?;
    let sum = PauliSum::from_dense(&m)?;
    // Hermitian input gives real coefficients up to rounding; drop the residue.
    let mut out = PauliSum::zero(sum.num_qubits());
    for (s, c) in sum.iter() {
        out.add_term(&s, Complex64::new(c.re, 0.0));
    }
    Ok(out)
}

/// Any of the supported models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Tfim(TfimSpec),
    Schwinger(SchwingerSpec),
    Fermions(FermionSpec),
    Random(RandomHermitianSpec),
}

impl ModelSpec {
    pub fn qubits(&self) -> usize {
        match self {
            ModelSpec::Tfim(s) => s.qubits,
            ModelSpec::Schwinger(s) => s.qubits,
            ModelSpec::Fermions(s) => s.qubits,
            ModelSpec::Random(s) => s.qubits,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Tfim(_) => "tfim",
            ModelSpec::Schwinger(_) => "schwinger",
            ModelSpec::Fermions(_) => "fermions",
            ModelSpec::Random(_) => "random",
        }
    }

    pub fn hamiltonian(&self) -> Result<PauliSum> {
        match self {
            ModelSpec::Tfim(s) => tfim(s),
            ModelSpec::Schwinger(s) => schwinger(s),
            ModelSpec::Fermions(s) => fermions_jw(s),
            ModelSpec::Random(s) => random_hermitian(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::diagonalize_matrix;

    fn frob(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn kron_chain(factors: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
        factors[1..].iter().fold(factors[0].clone(), |acc, f| acc.kronecker(f))
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eye2() -> DMatrix<Complex64> {
        DMatrix::identity(2, 2)
    }

    fn z2() -> DMatrix<Complex64> {
        DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    /// `|0><1|`, i.e. `(X + iY)/2`.
    fn raise() -> DMatrix<Complex64> {
        DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
    }

    fn site_op(n: usize, q: usize, op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let factors: Vec<_> = (0..n).map(|k| if k == q { op.clone() } else { eye2() }).collect();
        kron_chain(&factors)
    }

    #[test]
    fn tfim_term_counts_and_weights() {
        let h = tfim(&TfimSpec::new(4, 1.0, 1.0)).unwrap();
        assert_eq!(h.num_terms(), 8);
        assert!(h.iter().all(|(_, c)| (c.re - 1.0).abs() < 1e-15 && c.im == 0.0));
        let (_, terms) = h.expectation_decompose();
        assert_eq!(terms.len(), 8);
        for n in 3..=8 {
            let h = tfim(&TfimSpec::new(n, 1.0, 0.8)).unwrap();
            assert_eq!(h.num_terms(), 2 * n);
        }
    }

    #[test]
    fn tfim_square_term_count() {
        // The closed form counts distinct strings; at n = 4 ring products
        // coincide (Z1Z3 arises twice, the two ZZZZ products are equal).
        for n in [3usize, 5, 6, 7, 8] {
            let h = tfim(&TfimSpec::new(n, 1.0, 1.0)).unwrap();
            assert_eq!(h.square().num_terms(), 2 * n * n - 3 * n + 1, "n = {n}");
        }
        let h4 = tfim(&TfimSpec::new(4, 1.0, 1.0)).unwrap();
        assert_eq!(h4.square().num_terms(), 18);
        assert_eq!(tfim(&TfimSpec::new(5, 1.0, 1.0)).unwrap().square().num_terms(), 36);
    }

    #[test]
    fn tfim_two_site_ring_doubles_bond() {
        let h = tfim(&TfimSpec::new(2, 1.0, 0.0)).unwrap();
        let d = h.to_dense().unwrap();
        let diag: Vec<f64> = (0..4).map(|i| d[(i, i)].re).collect();
        assert_eq!(diag, vec![2.0, -2.0, -2.0, 2.0]);
    }

    #[test]
    fn tfim_zero_field_is_diagonal() {
        let d = tfim(&TfimSpec::new(4, 1.0, 0.0)).unwrap().to_dense().unwrap();
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert_eq!(d[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn tfim_field_sign_symmetry() {
        let a = diagonalize_matrix(&tfim(&TfimSpec::new(4, 1.0, 0.6)).unwrap().to_dense().unwrap()).unwrap();
        let b = diagonalize_matrix(&tfim(&TfimSpec::new(4, 1.0, -0.6)).unwrap().to_dense().unwrap()).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn hopping_pair_identity() {
        let n = 2;
        let pair = ladder(n, 0, 1.0)
            .mul(&ladder(n, 1, -1.0))
            .unwrap()
            .add(&ladder(n, 0, -1.0).mul(&ladder(n, 1, 1.0)).unwrap())
            .unwrap();
        let expect = PauliSum::from_labels(&[(0.5, "XX"), (0.5, "YY")]).unwrap();
        assert_eq!(pair, expect);
    }

    #[test]
    fn schwinger_rejects_odd_sites() {
        assert!(schwinger(&SchwingerSpec { qubits: 3, mass: -0.7 }).is_err());
    }

    #[test]
    fn schwinger_matches_independent_dense_build() {
        let n = 4;
        let mass = -0.7;
        let h = schwinger(&SchwingerSpec { qubits: n, mass }).unwrap();
        assert!(h.is_hermitian());

        let dim = 1 << n;
        let lower = raise().adjoint();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for site in 1..n {
            let sp = site_op(n, site - 1, &raise());
            let sm_next = site_op(n, site, &lower);
            let sm = site_op(n, site - 1, &lower);
            let sp_next = site_op(n, site, &raise());
            m += &sp * &sm_next + &sm * &sp_next;
        }
        let id = DMatrix::<Complex64>::identity(dim, dim);
        for site in 1..=n {
            let sign = if site % 2 == 0 { 1.0 } else { -1.0 };
            m += site_op(n, site - 1, &z2()) * c(mass / 2.0 * sign, 0.0);
            let mut l = DMatrix::<Complex64>::zeros(dim, dim);
            for i in 1..=site {
                let si = if i % 2 == 0 { 1.0 } else { -1.0 };
                l += site_op(n, i - 1, &z2()) + &id * c(si, 0.0);
            }
            l *= c(-0.5, 0.0);
            m += &l * &l;
        }
        let d = h.to_dense().unwrap();
        assert!(frob(&(&d - &m)) < 1e-12);
        assert!(frob(&(&d - d.adjoint())) < 1e-12);
    }

    #[test]
    fn jw_adjacent_hop_is_xx_plus_yy() {
        let n = 4;
        let hop = creation(n, 1)
            .mul(&annihilation(n, 2))
            .unwrap()
            .add(&creation(n, 2).mul(&annihilation(n, 1)).unwrap())
            .unwrap();
        let expect = PauliSum::from_labels(&[(0.5, "IXXI"), (0.5, "IYYI")]).unwrap();
        assert_eq!(hop, expect);
    }

    #[test]
    fn density_product_expansion() {
        let n = 3;
        let nn = number(n, 0).mul(&number(n, 1)).unwrap();
        let expect = PauliSum::from_labels(&[(0.25, "III"), (-0.25, "ZII"), (-0.25, "IZI"), (0.25, "ZZI")]).unwrap();
        assert_eq!(nn, expect);
    }

    #[test]
    fn jw_anticommutation() {
        let n = 3;
        for i in 0..n {
            for j in 0..n {
                let ci = annihilation(n, i);
                let cdj = creation(n, j);
                let anti = ci.mul(&cdj).unwrap().add(&cdj.mul(&ci).unwrap()).unwrap();
                let expect = if i == j { PauliSum::identity(n, 1.0) } else { PauliSum::zero(n) };
                assert_eq!(anti, expect, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn fermions_conserve_particle_number() {
        let h = fermions_jw(&FermionSpec::default()).unwrap();
        assert!(h.is_hermitian());
        let comm = h.commutator(&total_number(4)).unwrap();
        assert!(frob(&comm.to_dense().unwrap()) < 1e-10);
    }

    #[test]
    fn random_hermitian_round_trip_and_linearity() {
        let spec = RandomHermitianSpec { qubits: 3, scale: 1.0, seed: 11 };
        let drawn = random_hermitian_matrix(&spec).unwrap();
        let sum = random_hermitian(&spec).unwrap();
        assert!(frob(&(sum.to_dense().unwrap() - &drawn)) < 1e-10);

        let big = random_hermitian(&RandomHermitianSpec { scale: 10.0, ..spec }).unwrap();
        let ev1 = diagonalize_matrix(&sum.to_dense().unwrap()).unwrap();
        let ev10 = diagonalize_matrix(&big.to_dense().unwrap()).unwrap();
        for (a, b) in ev1.eigenvalues().iter().zip(ev10.eigenvalues()) {
            assert!((10.0 * a - b).abs() < 1e-9);
        }
        let zero = random_hermitian(&RandomHermitianSpec { scale: 0.0, ..spec }).unwrap();
        assert!(zero.is_empty());
    }

    #[test]
    fn all_models_hermitian() {
        let models = [
            ModelSpec::Tfim(TfimSpec::new(4, 1.0, 1.0)),
            ModelSpec::Schwinger(SchwingerSpec { qubits: 4, mass: -0.7 }),
            ModelSpec::Fermions(FermionSpec::default()),
        ];
        for m in &models {
            let d = m.hamiltonian().unwrap().to_dense().unwrap();
            assert!(frob(&(&d - d.adjoint())) < 1e-12, "{}", m.name());
        }
    }
}
