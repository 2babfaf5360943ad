//! Pauli strings and weighted sums of Pauli strings.
//!
//! A [`PauliSum`] is the universal operator representation used throughout
//! the crate: model Hamiltonians are built as sums, squared for the variance
//! cost, measured term by term, and realized densely for the spectral oracle.
//!
//! Qubit 0 is the leftmost tensor factor. In a computational-basis index the
//! state of qubit `q` is bit `n - 1 - q` (big-endian).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped after canonicalization.
pub const PRUNE_TOL: f64 = 1e-12;

/// Largest qubit count realized as a dense matrix by default.
pub const DENSE_QUBIT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Single-qubit product `self * other = phase * result`.
    pub fn mul(self, other: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (Phase::One, p),
            (X, X) | (Y, Y) | (Z, Z) => (Phase::One, I),
            (X, Y) => (Phase::I, Z),
            (Y, X) => (Phase::MinusI, Z),
            (Y, Z) => (Phase::I, X),
            (Z, Y) => (Phase::MinusI, X),
            (Z, X) => (Phase::I, Y),
            (X, Z) => (Phase::MinusI, Y),
        }
    }
}

/// A unit phase `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    fn exponent(self) -> u8 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    fn from_exponent(k: u8) -> Phase {
        match k % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase::from_exponent(self.exponent() + other.exponent())
    }

    pub fn to_complex(self) -> Complex64 {
        i_pow(self.exponent() as u32)
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A tensor product of single-qubit Paulis with a unit phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    ops: Vec<Pauli>,
    phase: Phase,
}

/// Bit masks describing how a Pauli string acts on basis states.
///
/// `P|i> = i^y_count * (-1)^popcount(i & sign) |i ^ flip>`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Action {
    pub flip: usize,
    pub sign: usize,
    pub y_count: u32,
}

impl Action {
    #[inline]
    pub fn phase(&self, index: usize) -> Complex64 {
        let neg = (index & self.sign).count_ones() & 1;
        i_pow(self.y_count + 2 * neg)
    }
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        PauliString {
            ops,
            phase: Phase::One,
        }
    }

    pub fn with_phase(ops: Vec<Pauli>, phase: Phase) -> Self {
        PauliString { ops, phase }
    }

    pub fn identity(n: usize) -> Self {
        PauliString::new(vec![Pauli::I; n])
    }

    /// `op` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, op: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[q] = op;
        PauliString::new(ops)
    }

    /// Build from `(qubit, op)` pairs; later pairs on the same qubit multiply in.
    pub fn from_sparse(n: usize, pairs: &[(usize, Pauli)]) -> Self {
        let mut s = PauliString::identity(n);
        for &(q, op) in pairs {
            let (ph, p) = s.ops[q].mul(op);
            s.ops[q] = p;
            s.phase = s.phase.mul(ph);
        }
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn count(&self, op: Pauli) -> usize {
        self.ops.iter().filter(|&&p| p == op).count()
    }

    /// Product `self * other` with accumulated phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.ops.len() != other.ops.len() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}-qubit and {}-qubit Pauli strings",
                self.ops.len(),
                other.ops.len()
            )));
        }
        let mut phase = self.phase.mul(other.phase);
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                phase = phase.mul(ph);
                p
            })
            .collect();
        Ok(PauliString { ops, phase })
    }

    pub(crate) fn action(&self) -> Action {
        let n = self.ops.len();
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut y_count = 0u32;
        for (q, &p) in self.ops.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    y_count += 1;
                }
                Pauli::Z => sign |= bit,
            }
        }
        Action {
            flip,
            sign,
            y_count: y_count + self.phase.exponent() as u32,
        }
    }

    /// Dense `2^n x 2^n` realization.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        check_dense_cap(self.ops.len(), DENSE_QUBIT_CAP)?;
        let dim = 1usize << self.ops.len();
        let act = self.action();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i ^ act.flip, i)] = act.phase(i);
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            Phase::One => {}
            Phase::I => write!(f, "i")?,
            Phase::MinusOne => write!(f, "-")?,
            Phase::MinusI => write!(f, "-i")?,
        }
        for p in &self.ops {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses an optional phase prefix (`i`, `-`, `-i`, `+`) followed by `IXYZ` characters.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MinusI, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MinusOne, rest)
        } else if let Some(rest) = s.strip_prefix("+i").or_else(|| s.strip_prefix('i')) {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::One, rest)
        } else {
            (Phase::One, s)
        };
        let ops = body
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Parse(format!("bad Pauli character {c:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string {s:?}")));
        }
        Ok(PauliString { ops, phase })
    }
}

pub(crate) fn check_dense_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Resource(format!(
            "{n} qubits exceeds the dense realization cap of {cap}"
        )));
    }
    Ok(())
}

/// Weighted sum of phase-free Pauli strings.
///
/// Terms are kept in a map keyed by the operator sequence, so iteration order
/// is lexicographic (`I < X < Y < Z`) and deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<Vec<Pauli>, Complex64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize, coeff: f64) -> Self {
        let mut s = PauliSum::zero(n);
        s.add_term(&PauliString::identity(n), Complex64::new(coeff, 0.0));
        s
    }

    pub fn from_string(s: &PauliString, coeff: Complex64) -> Self {
        let mut out = PauliSum::zero(s.num_qubits());
        out.add_term(s, coeff);
        out
    }

    /// Convenience: real-weighted terms given as `(coefficient, "XZIY")`.
    pub fn from_labels(terms: &[(f64, &str)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Argument("no terms given".into()))?;
        let n = first.1.len();
        let mut out = PauliSum::zero(n);
        for &(c, label) in terms {
            let s: PauliString = label.parse()?;
            if s.num_qubits() != n {
                return Err(Error::Dimension(format!(
                    "term {label} has {} qubits, expected {n}",
                    s.num_qubits()
                )));
            }
            out.add_term(&s, Complex64::new(c, 0.0));
        }
        Ok(out)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Accumulate `coeff * s`, folding the string phase into the coefficient.
    pub fn add_term(&mut self, s: &PauliString, coeff: Complex64) {
        assert_eq!(s.num_qubits(), self.n, "term qubit count mismatch");
        let c = coeff * s.phase().to_complex();
        let entry = self.terms.entry(s.ops().to_vec()).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() < PRUNE_TOL {
            self.terms.remove(s.ops());
        }
    }

    pub fn coefficient(&self, ops: &[Pauli]) -> Complex64 {
        self.terms.get(ops).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliString, Complex64)> + '_ {
        self.terms
            .iter()
            .map(|(ops, &c)| (PauliString::new(ops.clone()), c))
    }

    /// Coefficient of the identity string.
    pub fn identity_coefficient(&self) -> Complex64 {
        self.coefficient(&vec![Pauli::I; self.n])
    }

    /// True if every coefficient is real to within the pruning tolerance.
    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() <= PRUNE_TOL)
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        let mut out = PauliSum::zero(self.n);
        for (ops, &c) in &self.terms {
            out.add_term(&PauliString::new(ops.clone()), c * factor);
        }
        out
    }

    pub fn scale_real(&self, factor: f64) -> PauliSum {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (ops, &c) in &other.terms {
            out.add_term(&PauliString::new(ops.clone()), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.add(&other.scale_real(-1.0))
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other)?;
        let mut acc: BTreeMap<Vec<Pauli>, Complex64> = BTreeMap::new();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let mut phase = Phase::One;
                let ops: Vec<Pauli> = a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| {
                        let (ph, p) = x.mul(y);
                        phase = phase.mul(ph);
                        p
                    })
                    .collect();
                *acc.entry(ops).or_default() += ca * cb * phase.to_complex();
            }
        }
        acc.retain(|_, c| c.norm() >= PRUNE_TOL);
        Ok(PauliSum {
            n: self.n,
            terms: acc,
        })
    }

    pub fn square(&self) -> PauliSum {
        self.mul(self).expect("same operand")
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n: self.n,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.conj())).collect(),
        }
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Split into the identity offset and the non-identity terms, each of
    /// which needs its own measurement circuit.
    pub fn expectation_decompose(&self) -> (f64, Vec<(PauliString, f64)>) {
        let mut offset = 0.0;
        let mut out = Vec::with_capacity(self.terms.len());
        for (ops, c) in &self.terms {
            let s = PauliString::new(ops.clone());
            if s.is_identity() {
                offset += c.re;
            } else {
                out.push((s, c.re));
            }
        }
        (offset, out)
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_capped(DENSE_QUBIT_CAP)
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        check_dense_cap(self.n, cap)?;
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for (ops, &c) in &self.terms {
            let act = PauliString::new(ops.clone()).action();
            for i in 0..dim {
                m[(i ^ act.flip, i)] += c * act.phase(i);
            }
        }
        Ok(m)
    }

    /// Expand a dense `2^n x 2^n` matrix in the Pauli basis via
    /// `c_P = Tr(P A) / 2^n`, enumerating all `4^n` strings.
    pub fn from_dense(matrix: &DMatrix<Complex64>) -> Result<PauliSum> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Dimension(format!(
                "expected a square 2^n matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_dense_cap(n, DENSE_QUBIT_CAP)?;
        let norm = 1.0 / dim as f64;
        let mut out = PauliSum::zero(n);
        for code in 0..(1usize << (2 * n)) {
            let ops: Vec<Pauli> = (0..n)
                .map(|q| match (code >> (2 * (n - 1 - q))) & 3 {
                    0 => Pauli::I,
                    1 => Pauli::X,
                    2 => Pauli::Y,
                    _ => Pauli::Z,
                })
                .collect();
            let s = PauliString::new(ops);
            let act = s.action();
            let trace: Complex64 = (0..dim).map(|k| act.phase(k) * matrix[(k, k ^ act.flip)]).sum();
            out.add_term(&s, trace * norm);
        }
        Ok(out)
    }

    /// Apply the operator to a vector of `2^n` amplitudes.
    pub fn apply(&self, amps: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.n;
        if amps.len() != dim {
            return Err(Error::Dimension(format!(
                "operator acts on {dim} amplitudes, vector has {}",
                amps.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (ops, &c) in &self.terms {
            let act = PauliString::new(ops.clone()).action();
            for (i, &a) in amps.iter().enumerate() {
                out[i ^ act.flip] += c * act.phase(i) * a;
            }
        }
        Ok(out)
    }

    /// One term per line: `coefficient<TAB>string`. Real coefficients are
    /// written in shortest round-trip form; complex ones as `(re,im)`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (ops, c) in &self.terms {
            let label: String = ops.iter().map(|p| p.as_char()).collect();
            if c.im == 0.0 {
                out.push_str(&format!("{:?}\t{}\n", c.re, label));
            } else {
                out.push_str(&format!("({:?},{:?})\t{}\n", c.re, c.im, label));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PauliSum> {
        let mut out: Option<PauliSum> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (coeff, label) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("line {}: expected coefficient<TAB>string", lineno + 1)))?;
            let c = parse_coefficient(coeff.trim())
                .ok_or_else(|| Error::Parse(format!("line {}: bad coefficient {coeff:?}", lineno + 1)))?;
            let s: PauliString = label.trim().parse()?;
            let sum = out.get_or_insert_with(|| PauliSum::zero(s.num_qubits()));
            if s.num_qubits() != sum.n {
                return Err(Error::Parse(format!(
                    "line {}: {} qubits, expected {}",
                    lineno + 1,
                    s.num_qubits(),
                    sum.n
                )));
            }
            sum.add_term(&s, c);
        }
        out.ok_or_else(|| Error::Parse("no terms found".into()))
    }

    fn check_same(&self, other: &PauliSum) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "operands act on {} and {} qubits",
                self.n, other.n
            )));
        }
        Ok(())
    }
}

fn parse_coefficient(s: &str) -> Option<Complex64> {
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let (re, im) = inner.split_once(',')?;
        Some(Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
    } else {
        Some(Complex64::new(s.parse().ok()?, 0.0))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
