//! Exact diagonalization and the analytic machinery built on it.
//!
//! A [`Spectrum`] is the ground truth for overlaps with eigenstates, for the
//! energy-error bound `|E - lambda| <= sqrt(F_H)`, for the spectral forms of
//! both cost functions, and for the small-perturbation expansions around an
//! eigenstate.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::simulator::StateVector;

/// Relative tolerance under which eigenvalues are treated as one subspace.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

pub fn diagonalize(h: &PauliSum) -> Result<Spectrum> {
    if !h.is_hermitian() {
        return Err(Error::Contract("diagonalize needs a Hermitian operator".into()));
    }
    diagonalize_matrix(&h.to_dense()?)
}

pub fn diagonalize_matrix(m: &DMatrix<Complex64>) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, j: usize) -> StateVector {
        let n = self.dim().trailing_zeros() as usize;
        StateVector::from_normalized(n, self.eigenvectors.column(j).iter().copied().collect())
    }

    /// `sum_j lambda_j |lambda_j><lambda_j|`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    /// `exp(-i H t)` as a dense matrix.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
        ));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    /// Amplitudes `beta_j = <lambda_j|psi>`.
    pub fn amplitudes(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        if psi.amplitudes().len() != self.dim() {
            return Err(Error::Dimension(format!(
                "state has {} amplitudes, spectrum has {}",
                psi.amplitudes().len(),
                self.dim()
            )));
        }
        let v = DVector::from_column_slice(psi.amplitudes());
        Ok((self.eigenvectors.adjoint() * v).iter().copied().collect())
    }

    /// Index ranges of (near-)degenerate eigenvalue groups.
    pub fn degenerate_groups(&self) -> Vec<Range<usize>> {
        let scale = self.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = DEGENERACY_TOL * scale;
        let mut groups = Vec::new();
        let mut start = 0;
        for k in 1..=self.dim() {
            if k == self.dim() || self.eigenvalues[k] - self.eigenvalues[k - 1] > tol {
                groups.push(start..k);
                start = k;
            }
        }
        groups
    }

    /// Eigenvalue nearest to `energy`; ties go to the lower index.
    pub fn nearest_eigenvalue(&self, energy: f64) -> (usize, f64) {
        let mut best = (0, self.eigenvalues[0]);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if (l - energy).abs() < (best.1 - energy).abs() {
                best = (k, l);
            }
        }
        best
    }
}

pub fn overlap(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr().min(1.0))
}

/// Result of matching a state against the eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosestEigenstate {
    /// Lowest eigenvector index of the winning subspace.
    pub index: usize,
    pub eigenvalue: f64,
    /// Squared overlap summed over the degenerate subspace.
    pub overlap: f64,
    pub degeneracy: usize,
}

/// Eigen-subspace with the largest total squared overlap; ties go to the
/// lowest index.
pub fn closest_eigenstate(psi: &StateVector, spectrum: &Spectrum) -> Result<ClosestEigenstate> {
    let beta = spectrum.amplitudes(psi)?;
    let mut best: Option<ClosestEigenstate> = None;
    for group in spectrum.degenerate_groups() {
        let w: f64 = beta[group.clone()].iter().map(|b| b.norm_sqr()).sum();
        if best.as_ref().is_none_or(|b| w > b.overlap) {
            best = Some(ClosestEigenstate {
                index: group.start,
                eigenvalue: spectrum.eigenvalues[group.start],
                overlap: w.min(1.0),
                degeneracy: group.len(),
            });
        }
    }
    Ok(best.expect("spectrum is non-empty"))
}

/// Squared overlap of `psi` with the degenerate subspace containing `index`.
pub fn subspace_overlap(psi: &StateVector, spectrum: &Spectrum, index: usize) -> Result<f64> {
    let beta = spectrum.amplitudes(psi)?;
    let group = spectrum
        .degenerate_groups()
        .into_iter()
        .find(|g| g.contains(&index))
        .ok_or_else(|| Error::Argument(format!("eigen index {index} out of range")))?;
    Ok(beta[group].iter().map(|b| b.norm_sqr()).sum::<f64>().min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBound {
    pub energy: f64,
    pub nearest: f64,
    pub sqrt_variance: f64,
    pub holds: bool,
}

/// Check `|<H> - lambda_nearest| <= sqrt(<H^2> - <H>^2)`.
pub fn check_energy_bound(psi: &StateVector, h: &PauliSum, spectrum: &Spectrum) -> Result<EnergyBound> {
    let energy = psi.expectation(h)?;
    let variance = crate::cost::f_h(psi, h, &crate::cost::CostMode::Exact)?;
    let (_, nearest) = spectrum.nearest_eigenvalue(energy);
    let sqrt_variance = variance.max(0.0).sqrt();
    Ok(EnergyBound {
        energy,
        nearest,
        sqrt_variance,
        holds: (energy - nearest).abs() <= sqrt_variance + 1e-9,
    })
}

/// `F_H = sum_ij lambda_i (lambda_i - lambda_j) |beta_i|^2 |beta_j|^2`.
pub fn variance_from_spectrum(psi: &StateVector, spectrum: &Spectrum) -> Result<f64> {
    let w: Vec<f64> = spectrum.amplitudes(psi)?.iter().map(|b| b.norm_sqr()).collect();
    let l = spectrum.eigenvalues();
    let mut acc = 0.0;
    for i in 0..w.len() {
        for j in 0..w.len() {
            acc += l[i] * (l[i] - l[j]) * w[i] * w[j];
        }
    }
    Ok(acc)
}

/// `F_Q = 2 sum_ij |beta_i|^2 |beta_j|^2 sin^2((lambda_i - lambda_j) t / 2)`.
pub fn unitary_cost_from_spectrum(psi: &StateVector, spectrum: &Spectrum, t: f64) -> Result<f64> {
    let w: Vec<f64> = spectrum.amplitudes(psi)?.iter().map(|b| b.norm_sqr()).collect();
    let l = spectrum.eigenvalues();
    let mut acc = 0.0;
    for i in 0..w.len() {
        for j in 0..w.len() {
            let s = ((l[i] - l[j]) * t / 2.0).sin();
            acc += w[i] * w[j] * s * s;
        }
    }
    Ok(2.0 * acc)
}

/// A state `(|lambda_1> + eps |phi>) / sqrt(1 + eps^2)` with
/// `|phi> = sum_{j>1} c_j |lambda_j>` normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationData {
    pub epsilon: f64,
    pub target_eigenvalue: f64,
    /// `(lambda_j, c_j)` for the admixed eigenvectors.
    pub components: Vec<(f64, Complex64)>,
}

impl PerturbationData {
    pub fn new(epsilon: f64, target_eigenvalue: f64, components: Vec<(f64, Complex64)>) -> Result<Self> {
        let norm: f64 = components.iter().map(|(_, c)| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!(
                "admixture weights sum to {norm}, expected 1"
            )));
        }
        Ok(PerturbationData {
            epsilon,
            target_eigenvalue,
            components,
        })
    }

    /// `d^2 = sum |c_j|^2 lambda_j^2`
    pub fn d2(&self) -> f64 {
        self.components.iter().map(|(l, c)| c.norm_sqr() * l * l).sum()
    }

    /// `e = sum |c_j|^2 lambda_j`
    pub fn e(&self) -> f64 {
        self.components.iter().map(|(l, c)| c.norm_sqr() * l).sum()
    }
}

/// Coefficients of `eps^2` and `eps^4` in the variance of the perturbed state.
pub fn variance_expansion(pd: &PerturbationData) -> (f64, f64) {
    let (l1, d2, e) = (pd.target_eigenvalue, pd.d2(), pd.e());
    let second = l1 * l1 + d2 - 2.0 * e * l1;
    let fourth = -(d2 + e * e + 2.0 * l1 * l1 - 4.0 * e * l1);
    (second, fourth)
}

/// Series inversion of the variance expansion: `eps^2` as a function of `delta`
/// to second order. Reverting `delta = a x + b x^2` gives
/// `x = delta / a - b delta^2 / a^3 + O(delta^3)`.
pub fn epsilon_squared_from_variance(pd: &PerturbationData, delta: f64) -> f64 {
    let (a, b) = variance_expansion(pd);
    delta / a - b / (a * a * a) * delta * delta
}

/// Leading-order `2 eps^2 [1 - sum_j |c_j|^2 cos((lambda_j - lambda_1) t)]`,
/// which predicts `1 - |<exp(-iHt)>|^2` for the perturbed state.
pub fn fq_expansion(pd: &PerturbationData, t: f64) -> f64 {
    let l1 = pd.target_eigenvalue;
    let c: f64 = pd
        .components
        .iter()
        .map(|(l, c)| c.norm_sqr() * ((l - l1) * t).cos())
        .sum();
    2.0 * pd.epsilon * pd.epsilon * (1.0 - c)
}

/// Build the perturbed state from eigenvector indices and coefficients.
pub fn perturbed_state(
    spectrum: &Spectrum,
    target: usize,
    admixture: &[(usize, Complex64)],
    epsilon: f64,
) -> Result<(StateVector, PerturbationData)> {
    let dim = spectrum.dim();
    if target >= dim || admixture.iter().any(|&(j, _)| j >= dim || j == target) {
        return Err(Error::Argument("admixture indices must be distinct from the target and in range".into()));
    }
    let norm = 1.0 / (1.0 + epsilon * epsilon).sqrt();
    let mut v = spectrum.eigenvectors.column(target).into_owned() * Complex64::new(norm, 0.0);
    for &(j, c) in admixture {
        v += spectrum.eigenvectors.column(j) * (c * epsilon * norm);
    }
    let n = dim.trailing_zeros() as usize;
    let pd = PerturbationData::new(
        epsilon,
        spectrum.eigenvalues[target],
        admixture.iter().map(|&(j, c)| (spectrum.eigenvalues[j], c)).collect(),
    )?;
    Ok((StateVector::from_normalized(n, v.iter().copied().collect()), pd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{f_h, f_q, CostMode};
    use crate::models::{random_hermitian, tfim, RandomHermitianSpec, TfimSpec};
    use crate::rng::rng_from_seed;

    fn random_h(n: usize, seed: u64) -> PauliSum {
        random_hermitian(&RandomHermitianSpec { qubits: n, scale: 1.0, seed }).unwrap()
    }

    #[test]
    fn single_z() {
        let s = diagonalize(&PauliSum::from_labels(&[(1.0, "Z")]).unwrap()).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-14);
        assert!(s.eigenvectors()[(1, 0)].norm() > 1.0 - 1e-12);
        assert!(s.eigenvectors()[(0, 1)].norm() > 1.0 - 1e-12);
    }

    #[test]
    fn tfim_two_sites_spectrum() {
        let s = diagonalize(&tfim(&TfimSpec::new(2, 1.0, 0.0)).unwrap()).unwrap();
        let expect = [-2.0, -2.0, 2.0, 2.0];
        for (a, b) in s.eigenvalues().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.degenerate_groups(), vec![0..2, 2..4]);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        for seed in 0..5 {
            let h = random_h(4, seed);
            let s = diagonalize(&h).unwrap();
            let d = h.to_dense().unwrap();
            let resid = (s.reconstruct() - &d).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(resid < 1e-9, "residual {resid}");
            let gram = s.eigenvectors().adjoint() * s.eigenvectors();
            let id = DMatrix::<Complex64>::identity(16, 16);
            assert!((gram - id).iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = PauliSum::from_labels(&[(1.0, "X")]).unwrap().scale(Complex64::new(0.0, 1.0));
        assert!(matches!(diagonalize(&h), Err(Error::Contract(_))));
    }

    #[test]
    fn overlap_examples() {
        let zero = StateVector::zero(1);
        let one = StateVector::basis(1, 1).unwrap();
        let plus = StateVector::from_amplitudes(
            1,
            vec![Complex64::new(0.5f64.sqrt(), 0.0), Complex64::new(0.5f64.sqrt(), 0.0)],
        )
        .unwrap();
        assert!((overlap(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(overlap(&zero, &one).unwrap(), 0.0);
        assert!((overlap(&plus, &zero).unwrap() - 0.5).abs() < 1e-15);
        assert!(overlap(&zero, &StateVector::zero(2)).is_err());
    }

    #[test]
    fn closest_eigenstate_argmax_and_degeneracy() {
        let h = random_h(3, 4);
        let s = diagonalize(&h).unwrap();
        let own = closest_eigenstate(&s.eigenvector(5), &s).unwrap();
        assert_eq!(own.index, 5);
        assert!((own.overlap - 1.0).abs() < 1e-12);

        let (a, b) = (0.9f64, (1.0f64 - 0.81).sqrt());
        let v = s.eigenvectors().column(2) * Complex64::new(a, 0.0) + s.eigenvectors().column(6) * Complex64::new(b, 0.0);
        let psi = StateVector::from_normalized(3, v.iter().copied().collect());
        let best = closest_eigenstate(&psi, &s).unwrap();
        assert_eq!(best.index, 2);
        assert!((best.overlap - 0.81).abs() < 1e-12);

        // TFIM at zero field: the two Neel-like ground states are degenerate.
        let t = diagonalize(&tfim(&TfimSpec::new(4, 1.0, 0.0)).unwrap()).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[0b0101] = Complex64::new(0.5f64.sqrt(), 0.0);
        amps[0b1010] = Complex64::new(0.5f64.sqrt(), 0.0);
        let sym = StateVector::from_amplitudes(4, amps).unwrap();
        let best = closest_eigenstate(&sym, &t).unwrap();
        assert_eq!(best.degeneracy, 2);
        assert!((best.overlap - 1.0).abs() < 1e-12);
        assert!((best.eigenvalue + 4.0).abs() < 1e-12);
    }

    #[test]
    fn closest_eigenstate_scale_invariant() {
        let h = random_h(3, 9);
        let s1 = diagonalize(&h).unwrap();
        let s2 = diagonalize(&h.scale_real(3.5)).unwrap();
        let mut rng = rng_from_seed(1);
        for _ in 0..20 {
            let psi = StateVector::random(3, &mut rng);
            assert_eq!(
                closest_eigenstate(&psi, &s1).unwrap().index,
                closest_eigenstate(&psi, &s2).unwrap().index
            );
        }
    }

    #[test]
    fn bound_on_eigenvector_and_two_level_boundary() {
        let h = random_h(3, 2);
        let s = diagonalize(&h).unwrap();
        let b = check_energy_bound(&s.eigenvector(3), &h, &s).unwrap();
        assert!(b.holds);
        assert!((b.energy - b.nearest).abs() < 1e-10);
        assert!(b.sqrt_variance < 1e-5);

        let v = (s.eigenvectors().column(1) + s.eigenvectors().column(6)) * Complex64::new(0.5f64.sqrt(), 0.0);
        let psi = StateVector::from_normalized(3, v.iter().copied().collect());
        let b = check_energy_bound(&psi, &h, &s).unwrap();
        let half_gap = (s.eigenvalues()[6] - s.eigenvalues()[1]) / 2.0;
        assert!((b.sqrt_variance - half_gap).abs() < 1e-9);
        assert!(b.holds);
    }

    #[test]
    fn spectral_forms_match_direct_costs() {
        let mut rng = rng_from_seed(5);
        for seed in 0..10 {
            let h = random_h(3, seed);
            let s = diagonalize(&h).unwrap();
            let psi = StateVector::random(3, &mut rng);
            let t = 0.3 + seed as f64 * 0.2;
            let fh = f_h(&psi, &h, &CostMode::Exact).unwrap();
            let fq = f_q(&psi, &h, t, &CostMode::Exact).unwrap();
            assert!((fh - variance_from_spectrum(&psi, &s).unwrap()).abs() < 1e-9);
            assert!((fq - unitary_cost_from_spectrum(&psi, &s, t).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn two_level_closed_forms() {
        let h = random_h(2, 8);
        let s = diagonalize(&h).unwrap();
        let v = (s.eigenvectors().column(0) + s.eigenvectors().column(3)) * Complex64::new(0.5f64.sqrt(), 0.0);
        let psi = StateVector::from_normalized(2, v.iter().copied().collect());
        let gap = s.eigenvalues()[3] - s.eigenvalues()[0];
        let fh = f_h(&psi, &h, &CostMode::Exact).unwrap();
        assert!((fh - gap * gap / 4.0).abs() < 1e-10);
        let t = 0.8;
        let fq = f_q(&psi, &h, t, &CostMode::Exact).unwrap();
        assert!((fq - (gap * t / 2.0).sin().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn expansion_two_level_case() {
        // lambda_1 = 0, single admixture with lambda_2 = 1.
        let pd = PerturbationData::new(0.0, 0.0, vec![(1.0, Complex64::new(1.0, 0.0))]).unwrap();
        let (a, b) = variance_expansion(&pd);
        assert_eq!(a, 1.0);
        assert_eq!(b, -2.0);
        assert_eq!(fq_expansion(&pd, 1.3), 0.0);
        for eps in [1e-2, 1e-3] {
            // Direct variance of (|0> + eps |1>)/sqrt(1+eps^2) under diag(0, 1).
            let p1 = eps * eps / (1.0 + eps * eps);
            let delta = p1 - p1 * p1;
            assert!((delta - a * eps * eps).abs() <= (b.abs() + 1.0) * eps.powi(4));
            let pd = PerturbationData { epsilon: eps, ..pd.clone() };
            let eps2 = epsilon_squared_from_variance(&pd, delta);
            assert!((eps2 - eps * eps).abs() < 10.0 * delta.powi(3));
        }
    }

    #[test]
    fn fq_expansion_resonance_and_zero_time() {
        let pd = PerturbationData::new(
            0.1,
            0.5,
            vec![(0.5 + 2.0 * std::f64::consts::PI, Complex64::new(0.6, 0.0)), (0.5 + 4.0 * std::f64::consts::PI, Complex64::new(0.0, 0.8))],
        )
        .unwrap();
        assert!(fq_expansion(&pd, 0.0).abs() < 1e-15);
        assert!(fq_expansion(&pd, 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_series_on_random_family() {
        let h = random_h(3, 21);
        let s = diagonalize(&h).unwrap();
        let adm = [(1usize, Complex64::new(0.6, 0.0)), (4, Complex64::new(0.0, 0.8))];
        for eps in [3e-2, 1e-2] {
            let (psi, pd) = perturbed_state(&s, 0, &adm, eps).unwrap();
            let delta = f_h(&psi, &h, &CostMode::Exact).unwrap();
            let (a, b) = variance_expansion(&pd);
            let eps2 = epsilon_squared_from_variance(&pd, delta);
            let second_order = (b / (a * a * a) * delta * delta).abs();
            // The second-order correction is resolved; what remains is third order.
            assert!((eps2 - eps * eps).abs() < 0.05 * second_order, "eps={eps}");
            assert!((delta / a - eps * eps).abs() > 0.5 * second_order);
        }
    }

    #[test]
    fn perturbation_rejects_unnormalized() {
        assert!(PerturbationData::new(0.1, 0.0, vec![(1.0, Complex64::new(0.5, 0.0))]).is_err());
    }
}
