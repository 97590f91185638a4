//! Dense exact-diagonalization oracle for the physical sector: stationary
//! distribution, thermal expectations, Gibbs variances, and exact METTS.
//! Ground truth for the acceptance tests.
//!
//! The grand-canonical operator H − μN is restricted to the physical sector
//! by expressing it in the physical-Z-basis states (d_phys = 2^L_KS of them,
//! far fewer than 2^N_q) and then diagonalized there. The additive constant
//! a·g²(L−1) is left out of the matrix; every quantity computed here is
//! invariant under that shift, and the energy observable carries the
//! constant itself. Boltzmann weights are always computed relative to the
//! ground state so βg = O(10) stays well inside f64 range.

use crate::model::{build_model, gauss_operators, LatticeConfig};
use crate::mupb::{build_1p1d, MeasurementBasis};
use crate::pauli::{commutes, PauliSum};
use crate::statevec::{apply_pauli_sum, expectation, StateVector};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("{0} qubits exceeds the dense limit {1}")]
    DenseLimit(usize, usize),
    #[error("operator does not commute with Gauss constraint {0}")]
    NotGaugeInvariant(usize),
    #[error("restricted operator has imaginary part {0:.3e}")]
    NotReal(f64),
    #[error(transparent)]
    Mupb(#[from] crate::mupb::MupbError),
}

pub const DEFAULT_DENSE_MAX_QUBITS: usize = 16;

/// Exact solution of H − μN restricted to the physical sector.
pub struct ExactSolution {
    cfg: LatticeConfig,
    /// Physical-Z-basis bit patterns, index order fixed once here.
    basis_bits: Vec<u64>,
    basis_states: Vec<StateVector>,
    labels: Vec<String>,
    eigenvalues: Vec<f64>,
    /// Column k is eigenvector k in physical-basis coordinates.
    eigenvectors: DMatrix<f64>,
}

/// Real matrix elements `<a|O|b>`; errors if an imaginary part survives.
fn real_matrix_in_basis(
    states: &[StateVector],
    op: &PauliSum,
) -> Result<DMatrix<f64>, ExactError> {
    let d = states.len();
    let mut m = DMatrix::zeros(d, d);
    let mut max_imag = 0.0f64;
    for j in 0..d {
        let oj = apply_pauli_sum(&states[j], op).expect("uniform sizes");
        for i in 0..d {
            let v: Complex64 = states[i].inner(&oj);
            max_imag = max_imag.max(v.im.abs());
            m[(i, j)] = v.re;
        }
    }
    if max_imag > 1e-10 {
        return Err(ExactError::NotReal(max_imag));
    }
    Ok(m)
}

impl ExactSolution {
    /// Builds and diagonalizes the restricted operator for the given model.
    pub fn build(cfg: &LatticeConfig, dense_max_qubits: usize) -> Result<Self, ExactError> {
        let n = cfg.layout().n_qubits();
        if n > dense_max_qubits {
            return Err(ExactError::DenseLimit(n, dense_max_qubits));
        }
        let (z_basis, _) = build_1p1d(cfg)?;
        Self::build_in_basis(cfg, &z_basis)
    }

    /// Same, but in an explicitly supplied physical basis.
    pub fn build_in_basis(
        cfg: &LatticeConfig,
        z_basis: &MeasurementBasis,
    ) -> Result<Self, ExactError> {
        let terms = build_model(cfg);
        let basis_bits = z_basis.physical_bit_patterns();
        let layout = cfg.layout();
        let labels = basis_bits.iter().map(|&b| layout.label_of(b)).collect();
        let basis_states: Vec<StateVector> =
            basis_bits.iter().map(|&b| z_basis.basis_state(b)).collect();
        let h = real_matrix_in_basis(&basis_states, &terms.as_sum())?;
        let sym = (h.clone() + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        Ok(ExactSolution {
            cfg: *cfg,
            basis_bits,
            basis_states,
            labels,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn cfg(&self) -> &LatticeConfig {
        &self.cfg
    }

    pub fn d_phys(&self) -> usize {
        self.basis_bits.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn basis_bits(&self) -> &[u64] {
        &self.basis_bits
    }

    pub fn basis_states(&self) -> &[StateVector] {
        &self.basis_states
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Component of eigenvector `k` on physical basis state `i`.
    pub fn eigenvectors_entry(&self, i: usize, k: usize) -> f64 {
        self.eigenvectors[(i, k)]
    }

    /// Boltzmann weights e^{-β(λ_k - λ_min)} per eigenstate.
    fn weights(&self, beta: f64) -> Vec<f64> {
        let min = self
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        self.eigenvalues
            .iter()
            .map(|&l| (-beta * (l - min)).exp())
            .collect()
    }

    /// Exact `Prob_i = <i|e^{-β(H-μN)}|i>/Z` over the physical basis.
    pub fn stationary_distribution(&self, beta: f64) -> Vec<f64> {
        let w = self.weights(beta);
        let d = self.d_phys();
        let mut probs = vec![0.0; d];
        for i in 0..d {
            for k in 0..d {
                probs[i] += self.eigenvectors[(i, k)].powi(2) * w[k];
            }
        }
        let z: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= z;
        }
        probs
    }

    fn check_gauge_invariant(&self, op: &PauliSum) -> Result<(), ExactError> {
        for (k, g) in gauss_operators(&self.cfg).iter().enumerate() {
            let ok = op
                .terms()
                .all(|(_, p)| commutes(p, g).expect("uniform sizes"));
            if !ok {
                return Err(ExactError::NotGaugeInvariant(k));
            }
        }
        Ok(())
    }

    /// `Tr_phys[O e^{-β(H-μN)}]/Z` via the eigendecomposition.
    pub fn thermal_expectation(&self, beta: f64, op: &PauliSum) -> Result<f64, ExactError> {
        self.check_gauge_invariant(op)?;
        let o = real_matrix_in_basis(&self.basis_states, op)?;
        let w = self.weights(beta);
        let z: f64 = w.iter().sum();
        let mut acc = 0.0;
        for k in 0..self.d_phys() {
            let vk = self.eigenvectors.column(k);
            acc += w[k] * (vk.transpose() * &o * vk)[(0, 0)];
        }
        Ok(acc / z)
    }

    /// `<O²> - <O>²` under the Gibbs state. Valid because O commutes with
    /// the projector, so the restricted O squares to the restricted O².
    pub fn gibbs_variance(&self, beta: f64, op: &PauliSum) -> Result<f64, ExactError> {
        self.check_gauge_invariant(op)?;
        let o = real_matrix_in_basis(&self.basis_states, op)?;
        let o2 = &o * &o;
        let w = self.weights(beta);
        let z: f64 = w.iter().sum();
        let (mut m1, mut m2) = (0.0, 0.0);
        for k in 0..self.d_phys() {
            let vk = self.eigenvectors.column(k);
            m1 += w[k] * (vk.transpose() * &o * vk)[(0, 0)];
            m2 += w[k] * (vk.transpose() * &o2 * vk)[(0, 0)];
        }
        Ok(m2 / z - (m1 / z).powi(2))
    }

    /// Exact METTS `e^{-β(H-μN)/2}|i>` (normalized) and its weight
    /// `<i|e^{-β(H-μN)}|i>` relative to the shifted ground state.
    pub fn exact_metts(&self, beta: f64, i: usize) -> (StateVector, f64) {
        let d = self.d_phys();
        let half: Vec<f64> = self
            .weights(beta)
            .iter()
            .map(|w| w.sqrt())
            .collect();
        // coords_j = sum_k V_jk e^{-β λ_k/2} V_ik
        let mut coords = vec![0.0; d];
        for k in 0..d {
            let a = half[k] * self.eigenvectors[(i, k)];
            for (j, c) in coords.iter_mut().enumerate() {
                *c += a * self.eigenvectors[(j, k)];
            }
        }
        let norm_sq: f64 = coords.iter().map(|c| c * c).sum();
        let inv = 1.0 / norm_sq.sqrt();
        let dim = self.basis_states[0].dim();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (j, c) in coords.iter().enumerate() {
            let scale = c * inv;
            for (a, b) in amps.iter_mut().zip(self.basis_states[j].amplitudes()) {
                *a += scale * b;
            }
        }
        let mut sv = StateVector::basis_state(self.basis_states[0].n_qubits(), 0);
        amps.clone_into(sv.amplitudes_mut());
        (sv, norm_sq)
    }

    /// Per-state METTS ensemble data for an observable: (Prob_i, μ_i,
    /// <φ_i|O²|φ_i>). Population quantities for the variance identities.
    pub fn metts_ensemble(
        &self,
        beta: f64,
        op: &PauliSum,
    ) -> Result<Vec<(f64, f64, f64)>, ExactError> {
        self.check_gauge_invariant(op)?;
        let d = self.d_phys();
        let mut weights = Vec::with_capacity(d);
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let (phi, w) = self.exact_metts(beta, i);
            let mu = expectation(&phi, op).expect("normalized");
            let ophi = apply_pauli_sum(&phi, op).expect("sizes");
            let m2 = ophi.inner(&ophi).re;
            weights.push(w);
            out.push((0.0, mu, m2));
        }
        let z: f64 = weights.iter().sum();
        for (i, entry) in out.iter_mut().enumerate() {
            entry.0 = weights[i] / z;
        }
        Ok(out)
    }
}

/// Independent full-space route: diagonalize H − μN on all 2^N qubits and
/// weight traces with the physical projector. Cross-checks the restricted
/// route; desk scale only.
pub fn thermal_expectation_fullspace(
    cfg: &LatticeConfig,
    beta: f64,
    op: &PauliSum,
    dense_max_qubits: usize,
) -> Result<f64, ExactError> {
    let n = cfg.layout().n_qubits();
    if n > 12.min(dense_max_qubits) {
        return Err(ExactError::DenseLimit(n, 12.min(dense_max_qubits)));
    }
    let dim = 1usize << n;
    let terms = build_model(cfg);
    let h_sum = terms.as_sum();

    // Dense H and O from their action on basis columns.
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut o = DMatrix::<f64>::zeros(dim, dim);
    let mut max_imag = 0.0f64;
    for j in 0..dim {
        let e = StateVector::basis_state(n, j as u64);
        let hj = apply_pauli_sum(&e, &h_sum).expect("sizes");
        let oj = apply_pauli_sum(&e, op).expect("sizes");
        for i in 0..dim {
            max_imag = max_imag
                .max(hj.amplitudes()[i].im.abs())
                .max(oj.amplitudes()[i].im.abs());
            h[(i, j)] = hj.amplitudes()[i].re;
            o[(i, j)] = oj.amplitudes()[i].re;
        }
    }
    if max_imag > 1e-10 {
        return Err(ExactError::NotReal(max_imag));
    }

    let proj = crate::model::physical_projector(cfg, dense_max_qubits);
    let mut p = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            p[(i, j)] = proj[i][j];
        }
    }

    let sym = (h.clone() + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    // Shift by the *physical-sector* minimum so weights match the restricted
    // route; unphysical eigenstates get zero projector weight anyway.
    let mut phys_min = f64::INFINITY;
    for k in 0..dim {
        let vk = eig.eigenvectors.column(k);
        let pw = (vk.transpose() * &p * vk)[(0, 0)];
        if pw > 1e-9 {
            phys_min = phys_min.min(eig.eigenvalues[k]);
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..dim {
        let w = (-beta * (eig.eigenvalues[k] - phys_min)).exp();
        let vk = eig.eigenvectors.column(k);
        let pw = (vk.transpose() * &p * vk)[(0, 0)];
        if pw < 1e-12 {
            continue;
        }
        let ow = (vk.transpose() * (&p * &o * &p) * vk)[(0, 0)];
        num += w * ow;
        den += w * pw;
    }
    Ok(num / den)
}
