//! Dense statevector engine: Clifford gates, imaginary-time Pauli
//! exponentials, expectation values, basis-rotated projective measurement,
//! and single-shot sampling of commuting Pauli groups.
//!
//! Indexing convention: qubit 1 is the most significant bit of the basis
//! index, so the bitstring reads left to right like the state label.
//!
//! Every stochastic operation takes an explicit RNG handle; the crate-level
//! policy is one dedicated ChaCha stream per purpose so runs are bit
//! reproducible from a master seed.

use crate::pauli::{commutes, CliffordCircuit, CliffordGate, PauliString, PauliSum};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StateVecError {
    #[error("bit count {0} does not match qubit count {1}")]
    SizeMismatch(usize, usize),
    #[error("operator acts on {0} qubits, state has {1}")]
    OperatorMismatch(usize, usize),
    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),
    #[error("strings in a sampling group must commute")]
    NonCommutingGroup,
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Dense complex state on `n_qubits` qubits (2^N amplitudes).
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state for a bit pattern given as an index
    /// (qubit 1 = most significant bit).
    pub fn basis_state(n_qubits: usize, index: u64) -> Self {
        assert!(n_qubits <= 24, "dense limit");
        let dim = 1usize << n_qubits;
        assert!((index as usize) < dim);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// Computational basis state from explicit bits, qubit 1 first.
    pub fn from_bits(bits: &[bool]) -> Self {
        let n = bits.len();
        let mut index = 0u64;
        for &b in bits {
            index = (index << 1) | b as u64;
        }
        Self::basis_state(n, index)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        let inv = 1.0 / n;
        for a in &mut self.amps {
            *a *= inv;
        }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Bit of qubit `q` (0-based) within basis index `idx`.
    #[inline]
    pub fn bit_of(&self, idx: u64, q: usize) -> bool {
        (idx >> (self.n_qubits - 1 - q)) & 1 == 1
    }

    fn qubit_mask(&self, q: usize) -> usize {
        1usize << (self.n_qubits - 1 - q)
    }

    pub fn apply_gate(&mut self, g: CliffordGate) {
        match g {
            CliffordGate::H(q) => {
                let mask = self.qubit_mask(q);
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let j = i | mask;
                        let a = self.amps[i];
                        let b = self.amps[j];
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[j] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            CliffordGate::S(q) => {
                let mask = self.qubit_mask(q);
                let phase = Complex64::new(0.0, 1.0);
                for i in 0..self.amps.len() {
                    if i & mask != 0 {
                        self.amps[i] *= phase;
                    }
                }
            }
            CliffordGate::X(q) => {
                let mask = self.qubit_mask(q);
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        self.amps.swap(i, i | mask);
                    }
                }
            }
            CliffordGate::Cnot { control, target } => {
                let cm = self.qubit_mask(control);
                let tm = self.qubit_mask(target);
                for i in 0..self.amps.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amps.swap(i, i | tm);
                    }
                }
            }
        }
    }

    fn apply_gate_inverse(&mut self, g: CliffordGate) {
        match g {
            CliffordGate::S(q) => {
                let mask = self.qubit_mask(q);
                let phase = Complex64::new(0.0, -1.0);
                for i in 0..self.amps.len() {
                    if i & mask != 0 {
                        self.amps[i] *= phase;
                    }
                }
            }
            // H, X, CNOT are involutions.
            other => self.apply_gate(other),
        }
    }

    /// Applies circuit gates in list order.
    pub fn apply_circuit(&mut self, c: &CliffordCircuit) {
        assert_eq!(c.n_qubits(), self.n_qubits);
        for &g in c.gates() {
            self.apply_gate(g);
        }
    }

    /// Applies the adjoint circuit (inverse gates in reverse order).
    pub fn apply_circuit_inverse(&mut self, c: &CliffordCircuit) {
        assert_eq!(c.n_qubits(), self.n_qubits);
        for &g in c.gates().iter().rev() {
            self.apply_gate_inverse(g);
        }
    }
}

/// Sign structure of a Pauli string in the MSB index convention:
/// `P |b> = base * (-1)^popcount(b & zmask) |b ^ xmask>`.
pub(crate) struct PauliAction {
    pub xmask: u64,
    pub zmask: u64,
    pub base: Complex64,
}

impl PauliAction {
    pub fn new(p: &PauliString) -> Self {
        let base = match p.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        } * p.sign();
        PauliAction {
            xmask: p.x_mask_msb(),
            zmask: p.z_mask_msb(),
            base,
        }
    }

    #[inline]
    pub fn phase(&self, b: u64) -> Complex64 {
        if (b & self.zmask).count_ones() & 1 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}

/// `P|s>` as a new vector.
pub fn apply_pauli(s: &StateVector, p: &PauliString) -> Result<StateVector, StateVecError> {
    if p.n_qubits() != s.n_qubits {
        return Err(StateVecError::OperatorMismatch(p.n_qubits(), s.n_qubits));
    }
    let act = PauliAction::new(p);
    let mut out = vec![Complex64::new(0.0, 0.0); s.amps.len()];
    for b in 0..s.amps.len() as u64 {
        out[(b ^ act.xmask) as usize] = act.phase(b) * s.amps[b as usize];
    }
    Ok(StateVector {
        n_qubits: s.n_qubits,
        amps: out,
    })
}

/// `<s|P|s>`; real for the Hermitian strings used here.
pub fn pauli_expectation(s: &StateVector, p: &PauliString) -> Result<f64, StateVecError> {
    if p.n_qubits() != s.n_qubits {
        return Err(StateVecError::OperatorMismatch(p.n_qubits(), s.n_qubits));
    }
    let act = PauliAction::new(p);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..s.amps.len() as u64 {
        let i = j ^ act.xmask;
        acc += s.amps[j as usize].conj() * act.phase(i) * s.amps[i as usize];
    }
    debug_assert!(acc.im.abs() < 1e-10, "expectation must be real");
    Ok(acc.re)
}

/// `sum_i c_i <s|P_i|s> + constant` for a normalized state.
pub fn expectation(s: &StateVector, terms: &PauliSum) -> Result<f64, StateVecError> {
    let norm = s.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(StateVecError::NotNormalized(norm));
    }
    let mut acc = terms.constant();
    for (c, p) in terms.terms() {
        acc += c * pauli_expectation(s, p)?;
    }
    Ok(acc)
}

/// `O|s>` for a Pauli sum (constant included).
pub fn apply_pauli_sum(s: &StateVector, terms: &PauliSum) -> Result<StateVector, StateVecError> {
    let mut out = s.clone();
    let k = terms.constant();
    for a in &mut out.amps {
        *a *= k;
    }
    for (c, p) in terms.terms() {
        let act = PauliAction::new(p);
        for b in 0..s.amps.len() as u64 {
            out.amps[(b ^ act.xmask) as usize] += c * act.phase(b) * s.amps[b as usize];
        }
    }
    Ok(out)
}

/// Applies `exp(-dtau * coeff * P) = cosh(t) I - sinh(t) P` in place.
///
/// Valid because `P^2 = I`. The result is intentionally NOT normalized;
/// imaginary-time evolution normalizes once per Trotter step.
pub fn apply_imag_pauli_exp(
    s: &mut StateVector,
    coeff: f64,
    p: &PauliString,
    dtau: f64,
) -> Result<(), StateVecError> {
    if p.n_qubits() != s.n_qubits {
        return Err(StateVecError::OperatorMismatch(p.n_qubits(), s.n_qubits));
    }
    let theta = dtau * coeff;
    apply_imag_exp_action(s, &PauliAction::new(p), theta.cosh(), theta.sinh());
    Ok(())
}

pub(crate) fn apply_imag_exp_action(s: &mut StateVector, act: &PauliAction, ch: f64, sh: f64) {
    if act.xmask == 0 {
        for b in 0..s.amps.len() as u64 {
            let w = ch - sh * act.phase(b).re;
            s.amps[b as usize] *= w;
        }
        return;
    }
    for b in 0..s.amps.len() as u64 {
        let j = b ^ act.xmask;
        if b < j {
            let ab = s.amps[b as usize];
            let aj = s.amps[j as usize];
            s.amps[b as usize] = ch * ab - sh * act.phase(j) * aj;
            s.amps[j as usize] = ch * aj - sh * act.phase(b) * ab;
        }
    }
}

/// Samples a computational bitstring from the exact Born distribution.
pub fn sample_bitstring<R: Rng>(s: &StateVector, rng: &mut R) -> u64 {
    let u: f64 = rng.gen::<f64>() * s.amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let mut acc = 0.0;
    for (i, a) in s.amps.iter().enumerate() {
        acc += a.norm_sqr();
        if u < acc {
            return i as u64;
        }
    }
    (s.amps.len() - 1) as u64
}

/// Projective measurement in the basis defined by `basis_circuit`.
///
/// Basis states are `U†|b>`, so the measurement applies `U`, samples `b`
/// from the Born distribution, and rebuilds the collapse state `U†|b>` from
/// scratch, as an exact eigenstate of whatever the basis stabilizes, free of
/// accumulated float error.
pub fn measure_in_basis<R: Rng>(
    s: &StateVector,
    basis_circuit: &CliffordCircuit,
    rng: &mut R,
) -> (u64, StateVector) {
    let mut rotated = s.clone();
    rotated.apply_circuit(basis_circuit);
    let bits = sample_bitstring(&rotated, rng);
    let mut collapsed = StateVector::basis_state(s.n_qubits, bits);
    collapsed.apply_circuit_inverse(basis_circuit);
    (bits, collapsed)
}

/// Draws one eigenvalue sample of the Hermitian operator `terms` from its
/// exact Born distribution.
///
/// All strings must commute, so sampling each `P_i` outcome sequentially via
/// projectors `(I ± P_i)/2` with state collapse in between realizes a joint
/// eigenbasis measurement; the returned value is `sum_i c_i o_i + constant`
/// and its expectation over the RNG equals `expectation(s, terms)`.
pub fn sample_pauli_group<R: Rng>(
    s: &StateVector,
    terms: &PauliSum,
    rng: &mut R,
) -> Result<f64, StateVecError> {
    let flat: Vec<&PauliString> = terms.terms().map(|(_, p)| p).collect();
    for i in 0..flat.len() {
        for j in (i + 1)..flat.len() {
            if !commutes(flat[i], flat[j]).unwrap_or(false) {
                return Err(StateVecError::NonCommutingGroup);
            }
        }
    }
    let mut work = s.clone();
    let mut value = terms.constant();
    for (c, p) in terms.terms() {
        let e = pauli_expectation(&work, p)?;
        let p_plus = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
        let outcome = if rng.gen::<f64>() < p_plus { 1.0 } else { -1.0 };
        value += c * outcome;
        // Collapse: (I + o P)/2 |work>, renormalized.
        let act = PauliAction::new(p);
        if act.xmask == 0 {
            for b in 0..work.amps.len() as u64 {
                let w = 0.5 * (1.0 + outcome * act.phase(b).re);
                work.amps[b as usize] *= w;
            }
        } else {
            for b in 0..work.amps.len() as u64 {
                let j = b ^ act.xmask;
                if b < j {
                    let ab = work.amps[b as usize];
                    let aj = work.amps[j as usize];
                    work.amps[b as usize] = 0.5 * (ab + outcome * act.phase(j) * aj);
                    work.amps[j as usize] = 0.5 * (aj + outcome * act.phase(b) * ab);
                }
            }
        }
        work.normalize();
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        PauliString::parse(s).unwrap()
    }

    fn sum_of(n: usize, terms: &[(f64, &str)]) -> PauliSum {
        let group = terms.iter().map(|(c, s)| (*c, ps(s))).collect();
        PauliSum::new(n, vec![group], 0.0)
    }

    #[test]
    fn basis_state_indexing() {
        let s = StateVector::from_bits(&[false, false, false]);
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        // bits 010: qubit 1 is the MSB, so the index is 2.
        let s = StateVector::from_bits(&[false, true, false]);
        assert_eq!(s.amplitudes()[2], Complex64::new(1.0, 0.0));
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(s.bit_of(2, 1) && !s.bit_of(2, 0) && !s.bit_of(2, 2));
    }

    #[test]
    fn hadamard_and_cnot() {
        let mut s = StateVector::basis_state(1, 0);
        s.apply_gate(CliffordGate::H(0));
        assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);

        let mut s = StateVector::basis_state(2, 0b10);
        s.apply_gate(CliffordGate::Cnot { control: 0, target: 1 });
        assert_eq!(s.amplitudes()[0b11], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn circuit_inverse_round_trip() {
        let mut c = CliffordCircuit::new(3);
        c.push(CliffordGate::H(0));
        c.push(CliffordGate::S(1));
        c.push(CliffordGate::Cnot { control: 0, target: 2 });
        c.push(CliffordGate::S(0));
        c.push(CliffordGate::H(2));
        let orig = {
            let mut s = StateVector::basis_state(3, 5);
            s.apply_gate(CliffordGate::H(1));
            s
        };
        let mut s = orig.clone();
        s.apply_circuit(&c);
        assert!((s.norm() - 1.0).abs() < 1e-12);
        s.apply_circuit_inverse(&c);
        let fidelity = s.inner(&orig).norm();
        assert!((fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_application_matches_by_hand() {
        // Y|0> = i|1>.
        let s = StateVector::basis_state(1, 0);
        let r = apply_pauli(&s, &ps("Y")).unwrap();
        assert_eq!(r.amplitudes()[1], Complex64::new(0.0, 1.0));
        // <0|Z|0> = 1, <+|Z|+> = 0.
        assert!((pauli_expectation(&s, &ps("Z")).unwrap() - 1.0).abs() < 1e-15);
        let mut plus = StateVector::basis_state(1, 0);
        plus.apply_gate(CliffordGate::H(0));
        assert!(pauli_expectation(&plus, &ps("Z")).unwrap().abs() < 1e-15);
    }

    #[test]
    fn imag_exp_on_eigenstate_rescales() {
        let mut s = StateVector::basis_state(1, 0);
        apply_imag_pauli_exp(&mut s, 1.0, &ps("Z"), 0.3).unwrap();
        // e^{-0.3 Z}|0> = e^{-0.3}|0>.
        assert!((s.amplitudes()[0].re - (-0.3f64).exp()).abs() < 1e-14);
        assert_eq!(s.amplitudes()[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn imag_exp_closed_form_on_plus() {
        // e^{-t Z}|+> ∝ e^{-t}|0> + e^{t}|1>.
        let t = 0.7;
        let mut s = StateVector::basis_state(1, 0);
        s.apply_gate(CliffordGate::H(0));
        apply_imag_pauli_exp(&mut s, 1.0, &ps("Z"), t).unwrap();
        let a0 = s.amplitudes()[0].re;
        let a1 = s.amplitudes()[1].re;
        assert!((a0 / a1 - (-2.0 * t).exp()).abs() < 1e-12);
    }

    #[test]
    fn imag_exp_dtau_zero_is_identity() {
        let mut s = StateVector::basis_state(2, 1);
        s.apply_gate(CliffordGate::H(0));
        let before = s.clone();
        apply_imag_pauli_exp(&mut s, 2.0, &ps("XY"), 0.0).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn imag_exp_matches_dense_series() {
        // Oracle: dense matrix exponential by scaling and squaring of the
        // Taylor series, independent of the cosh/sinh identity.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let n = rng.gen_range(1..=6usize);
            let dim = 1usize << n;
            let lits: String = (0..n)
                .map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)])
                .collect();
            let mut p = ps(&lits);
            if rng.gen::<bool>() {
                p.negate();
            }
            let coeff: f64 = rng.gen_range(-1.5..1.5);
            let dtau: f64 = rng.gen_range(0.0..0.8);

            // Dense matrix of P.
            let act = PauliAction::new(&p);
            let mut mat = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
            for b in 0..dim as u64 {
                mat[(b ^ act.xmask) as usize][b as usize] = act.phase(b);
            }
            // expm(-dtau*coeff*P) via scaled Taylor series.
            let scale = 16.0;
            let factor = -dtau * coeff / scale;
            let mut term = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
            let mut total = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
            for i in 0..dim {
                term[i][i] = Complex64::new(1.0, 0.0);
                total[i][i] = Complex64::new(1.0, 0.0);
            }
            for k in 1..=20 {
                let mut next = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
                for i in 0..dim {
                    for l in 0..dim {
                        if term[i][l].norm_sqr() == 0.0 {
                            continue;
                        }
                        for j in 0..dim {
                            next[i][j] += term[i][l] * mat[l][j] * factor / k as f64;
                        }
                    }
                }
                for i in 0..dim {
                    for j in 0..dim {
                        total[i][j] += next[i][j];
                    }
                }
                term = next;
            }
            for _ in 0..4 {
                // square: total = total * total  (scale = 2^4)
                let mut sq = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
                for i in 0..dim {
                    for l in 0..dim {
                        if total[i][l].norm_sqr() == 0.0 {
                            continue;
                        }
                        for j in 0..dim {
                            sq[i][j] += total[i][l] * total[l][j];
                        }
                    }
                }
                total = sq;
            }

            // Random-ish normalized state.
            let mut s = StateVector::basis_state(n, 0);
            for q in 0..n {
                s.apply_gate(CliffordGate::H(q));
                if rng.gen::<bool>() {
                    s.apply_gate(CliffordGate::S(q));
                }
            }
            let mut expected = vec![Complex64::new(0.0, 0.0); dim];
            for i in 0..dim {
                for j in 0..dim {
                    expected[i] += total[i][j] * s.amplitudes()[j];
                }
            }
            apply_imag_pauli_exp(&mut s, coeff, &p, dtau).unwrap();
            for i in 0..dim {
                assert!(
                    (s.amplitudes()[i] - expected[i]).norm() < 1e-12,
                    "mismatch at {i}: {} vs {}",
                    s.amplitudes()[i],
                    expected[i]
                );
            }
        }
    }

    #[test]
    fn expectation_requires_normalized_input() {
        let mut s = StateVector::basis_state(1, 0);
        let sum = sum_of(1, &[(1.0, "Z")]);
        assert!(expectation(&s, &sum).is_ok());
        s.amps[0] *= 2.0;
        assert!(matches!(
            expectation(&s, &sum),
            Err(StateVecError::NotNormalized(_))
        ));
    }

    #[test]
    fn measurement_of_basis_state_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = StateVector::basis_state(3, 0b101);
        let id = CliffordCircuit::new(3);
        for _ in 0..20 {
            let (bits, collapsed) = measure_in_basis(&s, &id, &mut rng);
            assert_eq!(bits, 0b101);
            assert!((collapsed.inner(&s).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_born_statistics_on_plus() {
        // chi^2 over 10^4 draws of |+> in the computational basis, 1 dof.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut plus = StateVector::basis_state(1, 0);
        plus.apply_gate(CliffordGate::H(0));
        let id = CliffordCircuit::new(1);
        let n = 10_000;
        let mut ones = 0usize;
        for _ in 0..n {
            let (bits, _) = measure_in_basis(&plus, &id, &mut rng);
            ones += bits as usize;
        }
        let expected = n as f64 / 2.0;
        let chi2 = (ones as f64 - expected).powi(2) / expected
            + ((n - ones) as f64 - expected).powi(2) / expected;
        assert!(chi2 < 10.83, "chi2 = {chi2}"); // 0.1% critical value, 1 dof
    }

    #[test]
    fn sample_group_deterministic_on_eigenstate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = StateVector::basis_state(1, 0);
        let sum = sum_of(1, &[(1.0, "Z")]);
        for _ in 0..10 {
            assert_eq!(sample_pauli_group(&s, &sum, &mut rng).unwrap(), 1.0);
        }
    }

    #[test]
    fn sample_group_unbiased_on_plus() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut plus = StateVector::basis_state(1, 0);
        plus.apply_gate(CliffordGate::H(0));
        let sum = sum_of(1, &[(1.0, "Z")]);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sample_pauli_group(&plus, &sum, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        // 4 sigma band around 0 with sigma = 1/sqrt(n).
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean = {mean}");
    }

    #[test]
    fn sample_group_respects_operator_identities() {
        // On a site-definite state, (X Z X)(Y Z Y) = -Z Z (site qubits), so
        // the two hopping outcomes must be opposite in every draw.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = StateVector::basis_state(3, 0b000);
        let xzx = sum_of(3, &[(1.0, "XZX")]);
        let yzy = sum_of(3, &[(1.0, "YZY")]);
        let both = sum_of(3, &[(1.0, "XZX"), (1.0, "YZY")]);
        for _ in 0..50 {
            assert_eq!(sample_pauli_group(&s, &both, &mut rng).unwrap(), 0.0);
        }
        // Individually each is a fair coin.
        let m1: f64 = (0..2000)
            .map(|_| sample_pauli_group(&s, &xzx, &mut rng).unwrap())
            .sum();
        let m2: f64 = (0..2000)
            .map(|_| sample_pauli_group(&s, &yzy, &mut rng).unwrap())
            .sum();
        assert!(m1.abs() < 200.0 && m2.abs() < 200.0);
    }

    #[test]
    fn sample_group_rejects_noncommuting() {
        let s = StateVector::basis_state(1, 0);
        let group = vec![vec![(1.0, ps("X")), (1.0, ps("Z"))]];
        let bad = PauliSum::new(1, group, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            sample_pauli_group(&s, &bad, &mut rng),
            Err(StateVecError::NonCommutingGroup)
        );
    }
}
