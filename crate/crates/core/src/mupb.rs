//! Mutually unbiased physical bases.
//!
//! A measurement basis is a Clifford circuit `U`: measurement applies `U`
//! and reads the computational register, so the basis states are `U†|b⟩`.
//! For a basis built here every `U†|b⟩` is an eigenstate of every Gauss
//! operator, and the builders also yield the rotated operators `U G U†` as
//! pure-Z strings, so physicality of an outcome `b` is an exact parity
//! computation rather than a float test.
//!
//! Two routes are provided: the explicit nearest-neighbor circuits for the
//! 1+1D model (Hadamards on links for the physical Z basis, and the
//! link-Hadamard layer composed with the gauge-invariant mixer `W` for the
//! physical X basis), and a general builder that canonicalizes an arbitrary
//! commuting constraint set and appends Hadamards on the unconstrained
//! qubits.

use crate::model::{gauss_operators, LatticeConfig};
use crate::pauli::{conjugate_by_circuit, CliffordCircuit, CliffordGate, PauliString};
use crate::statevec::{apply_pauli, StateVector};
use crate::tableau::{canonical_form, StabilizerTableau, TableauError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MupbError {
    #[error("invalid constraint tableau: {0}")]
    InvalidTableau(#[from] TableauError),
    #[error("construction identity failed: {0}")]
    BrokenIdentity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    ZPhys,
    XPhys,
}

impl std::fmt::Display for BasisTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisTag::ZPhys => write!(f, "Z_phys"),
            BasisTag::XPhys => write!(f, "X_phys"),
        }
    }
}

/// A measurement basis: circuit plus the Gauss operators rotated into the
/// measurement frame.
#[derive(Debug, Clone)]
pub struct MeasurementBasis {
    pub tag: BasisTag,
    pub circuit: CliffordCircuit,
    rotated_gauss: Vec<PauliString>,
}

impl MeasurementBasis {
    pub fn new(tag: BasisTag, circuit: CliffordCircuit, gauss: &[PauliString]) -> Self {
        let rotated_gauss = gauss
            .iter()
            .map(|g| conjugate_by_circuit(g, &circuit))
            .collect();
        MeasurementBasis {
            tag,
            circuit,
            rotated_gauss,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn rotated_gauss(&self) -> &[PauliString] {
        &self.rotated_gauss
    }

    /// True when every rotated Gauss operator is diagonal, i.e. measurement
    /// outcomes carry exact gauge sectors.
    pub fn has_exact_sector_structure(&self) -> bool {
        self.rotated_gauss.iter().all(|p| p.is_diagonal())
    }

    /// Gauss eigenvalue of basis state `U†|b⟩` under constraint `k`,
    /// computed exactly from the rotated operator's sign and Z support.
    pub fn gauss_eigenvalue(&self, bits: u64, k: usize) -> i8 {
        let p = &self.rotated_gauss[k];
        debug_assert!(
            p.is_diagonal(),
            "structural eigenvalues need Z-type rotations"
        );
        let parity = (bits & p.z_mask_msb()).count_ones() & 1 == 1;
        if p.is_negative() ^ parity {
            -1
        } else {
            1
        }
    }

    /// True when `U†|b⟩` lies in the +1 sector of every constraint.
    pub fn is_physical(&self, bits: u64) -> bool {
        (0..self.rotated_gauss.len()).all(|k| self.gauss_eigenvalue(bits, k) == 1)
    }

    /// All bit patterns whose basis states span the physical sector.
    pub fn physical_bit_patterns(&self) -> Vec<u64> {
        let dim = 1u64 << self.n_qubits();
        (0..dim).filter(|&b| self.is_physical(b)).collect()
    }

    /// Dense basis state `U†|b⟩`.
    pub fn basis_state(&self, bits: u64) -> StateVector {
        let mut s = StateVector::basis_state(self.n_qubits(), bits);
        s.apply_circuit_inverse(&self.circuit);
        s
    }

    pub fn d_phys(&self) -> u64 {
        1u64 << (self.n_qubits() - self.rotated_gauss.len())
    }
}

/// Explicit 1+1D construction.
///
/// Physical Z basis: Hadamards on all links. Physical X basis: the same
/// layer composed with the mixer `W = V† H_{fL} (Π H_links) V`, where `V`
/// Hadamards sites 1..L−1 and then CNOTs each such site into its adjacent
/// links. Both `V G_n V† = (−1)ⁿ X_n` and `W G_n W† = G_n` are asserted
/// symbolically during construction.
pub fn build_1p1d(cfg: &LatticeConfig) -> Result<(MeasurementBasis, MeasurementBasis), MupbError> {
    let layout = cfg.layout();
    let nq = layout.n_qubits();
    let gauss = gauss_operators(cfg);

    let mut z_circuit = CliffordCircuit::new(nq);
    for link in layout.link_qubits() {
        z_circuit.push(CliffordGate::H(link));
    }

    // V: Hadamards on sites 1..L-1, then each such site controls CNOTs into
    // its adjacent links (right link always; left link when it exists).
    let mut v = CliffordCircuit::new(nq);
    for n in 1..cfg.l_ks {
        v.push(CliffordGate::H(layout.site(n)));
    }
    for n in 1..cfg.l_ks {
        v.push(CliffordGate::Cnot {
            control: layout.site(n),
            target: layout.link(n),
        });
        if n > 1 {
            v.push(CliffordGate::Cnot {
                control: layout.site(n),
                target: layout.link(n - 1),
            });
        }
    }

    for (n, g) in gauss.iter().enumerate() {
        let rotated = conjugate_by_circuit(g, &v);
        let site = layout.site(n + 1);
        let expect = PauliString::from_supports(nq, &[site], &[], (n + 1) % 2 == 1);
        if rotated != expect {
            return Err(MupbError::BrokenIdentity(format!(
                "V G_{} V† = {rotated}, expected {expect}",
                n + 1
            )));
        }
    }

    // W = V ++ (H on all links) ++ H_{fL} ++ V†.
    let mut w = CliffordCircuit::new(nq);
    w.extend(&v);
    for link in layout.link_qubits() {
        w.push(CliffordGate::H(link));
    }
    w.push(CliffordGate::H(layout.site(cfg.l_ks)));
    for &g in v.gates().iter().rev() {
        w.push(g); // H and CNOT are self-inverse
    }

    for (n, g) in gauss.iter().enumerate() {
        let rotated = conjugate_by_circuit(g, &w);
        if rotated != *g {
            return Err(MupbError::BrokenIdentity(format!(
                "W G_{} W† = {rotated}, expected invariance",
                n + 1
            )));
        }
    }

    // Measurement circuit for the X basis applies W first, then the link
    // Hadamards; basis states are (U_H W)†|b⟩ = W† U_H† |b⟩.
    let mut x_circuit = CliffordCircuit::new(nq);
    x_circuit.extend(&w);
    x_circuit.extend(&z_circuit);

    let z_basis = MeasurementBasis::new(BasisTag::ZPhys, z_circuit, &gauss);
    let x_basis = MeasurementBasis::new(BasisTag::XPhys, x_circuit, &gauss);
    debug_assert!(z_basis.has_exact_sector_structure());
    debug_assert!(x_basis.has_exact_sector_structure());
    Ok((z_basis, x_basis))
}

/// General construction for an arbitrary commuting constraint set.
///
/// Canonicalization maps constraint j to +Z_j, so the Z-basis circuit is the
/// canonicalizer (with sign-fix X gates appended) and the X-basis circuit
/// adds Hadamards on the unconstrained qubits S+1..N. A basis state is then
/// physical exactly when its first S outcome bits are 0.
pub fn build_general(
    gauss: &StabilizerTableau,
) -> Result<(MeasurementBasis, MeasurementBasis), MupbError> {
    let n = gauss.n_qubits();
    let s = gauss.num_generators();
    let canon = canonical_form(gauss);
    let z_circuit = canon.full_circuit();

    for (j, g) in gauss.generators().iter().enumerate() {
        let rotated = conjugate_by_circuit(g, &z_circuit);
        let expect = PauliString::from_supports(n, &[], &[j], false);
        if rotated != expect {
            return Err(MupbError::BrokenIdentity(format!(
                "canonicalized constraint {j} is {rotated}, expected {expect}"
            )));
        }
    }

    let mut x_circuit = z_circuit.clone();
    for q in s..n {
        x_circuit.push(CliffordGate::H(q));
    }

    let z_basis = MeasurementBasis::new(BasisTag::ZPhys, z_circuit, gauss.generators());
    let x_basis = MeasurementBasis::new(BasisTag::XPhys, x_circuit, gauss.generators());
    Ok((z_basis, x_basis))
}

/// Dense state vector of a stabilizer state (tableau with S = N).
pub fn stabilizer_state(t: &StabilizerTableau) -> Result<StateVector, TableauError> {
    if t.num_generators() != t.n_qubits() {
        return Err(TableauError::NotAState(t.num_generators(), t.n_qubits()));
    }
    let canon = canonical_form(t);
    let mut s = StateVector::basis_state(t.n_qubits(), 0);
    s.apply_circuit_inverse(&canon.full_circuit());
    Ok(s)
}

/// Dense verification report for a candidate basis pair.
#[derive(Debug, Clone)]
pub struct MupbReport {
    pub n_qubits: usize,
    pub n_constraints: usize,
    pub d_phys: u64,
    pub tol: f64,
    /// Worst `‖G e − λ e‖` over all basis states of both bases, with λ the
    /// nearest of ±1.
    pub max_eigen_residual: f64,
    pub z_physical_count: usize,
    pub x_physical_count: usize,
    /// Worst `| |⟨i|j⟩|² − 1/d_phys |` over physical cross pairs.
    pub max_overlap_deviation: f64,
    pub min_overlap_sq: f64,
    pub max_overlap_sq: f64,
    pub z_gate_count: usize,
    pub x_gate_count: usize,
    pub z_depth: usize,
    pub x_depth: usize,
    pub eigenstate_ok: bool,
    pub count_ok: bool,
    pub overlap_ok: bool,
}

impl MupbReport {
    pub fn passed(&self) -> bool {
        self.eigenstate_ok && self.count_ok && self.overlap_ok
    }
}

impl std::fmt::Display for MupbReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "MUPB verification: N={} S={} d_phys={} tol={:.1e}",
            self.n_qubits, self.n_constraints, self.d_phys, self.tol
        )?;
        writeln!(
            f,
            "  [{}] gauss eigenstates: max residual {:.3e}",
            if self.eigenstate_ok { "pass" } else { "FAIL" },
            self.max_eigen_residual
        )?;
        writeln!(
            f,
            "  [{}] +1-sector counts: z={} x={} (expected {})",
            if self.count_ok { "pass" } else { "FAIL" },
            self.z_physical_count,
            self.x_physical_count,
            self.d_phys
        )?;
        writeln!(
            f,
            "  [{}] cross overlaps: |<i|j>|^2 in [{:.6e}, {:.6e}], max dev {:.3e}",
            if self.overlap_ok { "pass" } else { "FAIL" },
            self.min_overlap_sq,
            self.max_overlap_sq,
            self.max_overlap_deviation
        )?;
        write!(
            f,
            "  circuits: z {} gates depth {}, x {} gates depth {}",
            self.z_gate_count, self.z_depth, self.x_gate_count, self.x_depth
        )
    }
}

/// Checks Definition-1 structure densely: (a) every basis state of both
/// bases is a Gauss eigenstate within `tol`; (b) all physical cross overlaps
/// squared equal 1/d_phys within `tol`; (c) each +1 sector has exactly
/// `d_phys` members. Failures are report entries, not errors.
pub fn verify_mupb(
    z_basis: &MeasurementBasis,
    x_basis: &MeasurementBasis,
    gauss: &[PauliString],
    tol: f64,
) -> MupbReport {
    let n = z_basis.n_qubits();
    let dim = 1u64 << n;
    let s = gauss.len();
    let d_phys = 1u64 << (n - s);

    let mut max_eigen_residual: f64 = 0.0;
    let mut z_physical: Vec<StateVector> = Vec::new();
    let mut x_physical: Vec<StateVector> = Vec::new();

    for (basis, bucket) in [(z_basis, &mut z_physical), (x_basis, &mut x_physical)] {
        for bits in 0..dim {
            let state = basis.basis_state(bits);
            let mut all_plus = true;
            for g in gauss {
                let gs = apply_pauli(&state, g).expect("uniform sizes");
                let lambda = state.inner(&gs).re;
                let rounded = if lambda >= 0.0 { 1.0 } else { -1.0 };
                let mut residual = 0.0f64;
                for (a, b) in gs.amplitudes().iter().zip(state.amplitudes()) {
                    residual += (a - rounded * b).norm_sqr();
                }
                max_eigen_residual = max_eigen_residual.max(residual.sqrt());
                if rounded < 0.0 {
                    all_plus = false;
                }
            }
            if all_plus {
                bucket.push(state);
            }
        }
    }

    let target = 1.0 / d_phys as f64;
    let mut min_overlap_sq = f64::INFINITY;
    let mut max_overlap_sq: f64 = 0.0;
    for zi in &z_physical {
        for xj in &x_physical {
            let o = zi.inner(xj).norm_sqr();
            min_overlap_sq = min_overlap_sq.min(o);
            max_overlap_sq = max_overlap_sq.max(o);
        }
    }
    if z_physical.is_empty() || x_physical.is_empty() {
        min_overlap_sq = 0.0;
        max_overlap_sq = 0.0;
    }
    let max_overlap_deviation = (min_overlap_sq - target)
        .abs()
        .max((max_overlap_sq - target).abs());

    MupbReport {
        n_qubits: n,
        n_constraints: s,
        d_phys,
        tol,
        max_eigen_residual,
        z_physical_count: z_physical.len(),
        x_physical_count: x_physical.len(),
        max_overlap_deviation,
        min_overlap_sq,
        max_overlap_sq,
        z_gate_count: z_basis.circuit.len(),
        x_gate_count: x_basis.circuit.len(),
        z_depth: z_basis.circuit.depth(),
        x_depth: x_basis.circuit.depth(),
        eigenstate_ok: max_eigen_residual <= tol,
        count_ok: z_physical.len() as u64 == d_phys && x_physical.len() as u64 == d_phys,
        overlap_ok: max_overlap_deviation <= tol,
    }
}

pub const DEFAULT_VERIFY_TOL: f64 = 1e-10;
