//! The (1+1)-dimensional Z2 lattice gauge theory coupled to staggered
//! fermions: Hamiltonian terms, Gauss-law operators, observables, qubit
//! layout, and state-label conventions.
//!
//! Qubits are ordered `f1, g12, f2, g23, ..., fL`: staggered sites
//! interleaved with gauge links, qubit 1 leftmost and most significant.
//! With open boundaries and the left virtual link frozen there are
//! `N_q = 2·L_KS − 1` qubits and `L_KS − 1` Gauss operators, so the physical
//! sector has dimension `2^{L_KS}`.
//!
//! Units: the gauge coupling g is set to 1, so all inputs are the
//! dimensionless combinations a·g, m/g, μ/g, β·g.

use crate::pauli::{commutes, PauliString, PauliSum};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("l_ks must be at least 2, got {0}")]
    LatticeTooSmall(usize),
    #[error("lattice spacing a*g must be positive")]
    NonPositiveSpacing,
    #[error("malformed label {0:?}: {1}")]
    BadLabel(String, &'static str),
}

/// Dimensionless model parameters (g == 1 sets the units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    /// Staggered site count L_KS (the Dirac-site count is L_KS/2).
    pub l_ks: usize,
    /// Lattice spacing a·g.
    pub a_g: f64,
    /// Fermion mass m/g.
    pub m_over_g: f64,
    /// Chemical potential μ/g.
    pub mu_over_g: f64,
}

impl LatticeConfig {
    pub fn new(l_ks: usize, a_g: f64, m_over_g: f64, mu_over_g: f64) -> Result<Self, ModelError> {
        if l_ks < 2 {
            return Err(ModelError::LatticeTooSmall(l_ks));
        }
        // NaN fails this too.
        if a_g.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(ModelError::NonPositiveSpacing);
        }
        Ok(LatticeConfig {
            l_ks,
            a_g,
            m_over_g,
            mu_over_g,
        })
    }

    /// Dirac site count L_D = L_KS/2 (kept real so odd L_KS works too).
    pub fn l_dirac(&self) -> f64 {
        self.l_ks as f64 / 2.0
    }

    pub fn layout(&self) -> QubitLayout {
        QubitLayout { l_ks: self.l_ks }
    }
}

/// Interleaved site/link qubit layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitLayout {
    pub l_ks: usize,
}

impl QubitLayout {
    pub fn n_qubits(&self) -> usize {
        2 * self.l_ks - 1
    }

    /// 0-based qubit index of staggered site n (1-based site label).
    pub fn site(&self, n: usize) -> usize {
        debug_assert!((1..=self.l_ks).contains(&n));
        2 * (n - 1)
    }

    /// 0-based qubit index of the link between sites n and n+1.
    pub fn link(&self, n: usize) -> usize {
        debug_assert!((1..self.l_ks).contains(&n));
        2 * n - 1
    }

    pub fn is_link(&self, qubit: usize) -> bool {
        qubit % 2 == 1
    }

    pub fn link_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.l_ks).map(|n| self.link(n))
    }

    pub fn site_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.l_ks).map(|n| self.site(n))
    }

    /// Renders a bit pattern (qubit 1 = MSB of `bits`) as a state label:
    /// site bits print as '0'/'1', link bits as '+' (0) / '-' (1) because the
    /// physical Z basis puts links through a Hadamard.
    pub fn label_of(&self, bits: u64) -> String {
        let n = self.n_qubits();
        (0..n)
            .map(|q| {
                let bit = (bits >> (n - 1 - q)) & 1 == 1;
                match (self.is_link(q), bit) {
                    (false, false) => '0',
                    (false, true) => '1',
                    (true, false) => '+',
                    (true, true) => '-',
                }
            })
            .collect()
    }

    /// Parses a label back to its bit pattern; accepts ASCII '-' and U+2212.
    pub fn bits_of_label(&self, label: &str) -> Result<u64, ModelError> {
        let chars: Vec<char> = label.chars().collect();
        let n = self.n_qubits();
        if chars.len() != n {
            return Err(ModelError::BadLabel(label.into(), "wrong length"));
        }
        let mut bits = 0u64;
        for (q, &c) in chars.iter().enumerate() {
            let bit = match (self.is_link(q), c) {
                (false, '0') => false,
                (false, '1') => true,
                (true, '+') => false,
                (true, '-') | (true, '−') => true,
                _ => {
                    return Err(ModelError::BadLabel(
                        label.into(),
                        "character does not match site/link position",
                    ))
                }
            };
            bits |= (bit as u64) << (n - 1 - q);
        }
        Ok(bits)
    }
}

/// Hamiltonian split into the three internally-commuting Trotter groups.
///
/// `h_e`/`h_o` hold the even-/odd-bond hopping strings; `h_d` holds the
/// diagonal-plus-electric part (including −μ/2 ΣZ when μ ≠ 0). The constant
/// `a·g²·(L−1)` from the electric term is kept separately: it is skipped in
/// imaginary-time propagation (a pure norm rescale) but belongs in the
/// energy observable.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    pub h_e: Vec<(f64, PauliString)>,
    pub h_o: Vec<(f64, PauliString)>,
    pub h_d: Vec<(f64, PauliString)>,
    pub constant_offset: f64,
    pub n_qubits: usize,
}

impl HamiltonianTerms {
    /// All strings of H − μN with coefficients (constant excluded).
    pub fn all_terms(&self) -> impl Iterator<Item = &(f64, PauliString)> {
        self.h_e.iter().chain(&self.h_o).chain(&self.h_d)
    }

    /// H − μN as a grouped Pauli sum, constant excluded.
    pub fn as_sum(&self) -> PauliSum {
        PauliSum::new(
            self.n_qubits,
            vec![self.h_e.clone(), self.h_o.clone(), self.h_d.clone()],
            0.0,
        )
    }
}

fn hopping_strings(layout: &QubitLayout, n: usize, coeff: f64) -> [(f64, PauliString); 2] {
    let nq = layout.n_qubits();
    let (s0, link, s1) = (layout.site(n), layout.link(n), layout.site(n + 1));
    let xx = PauliString::from_supports(nq, &[s0, s1], &[link], false);
    let yy = PauliString::from_supports(nq, &[s0, s1], &[s0, link, s1], false);
    [(coeff, xx), (coeff, yy)]
}

/// Builds the qubit Hamiltonian of H − μN:
/// hopping −1/(4a)·(X σᶻ X + Y σᶻ Y) per bond (even bonds in `h_e`, odd in
/// `h_o`), electric −a·g² σˣ per link, mass (m/2)(−1)ⁿ Zₙ, chemical −μ/2 Zₙ,
/// and the identity offset a·g²·(L−1).
pub fn build_model(cfg: &LatticeConfig) -> HamiltonianTerms {
    let layout = cfg.layout();
    let nq = layout.n_qubits();
    let hop = -1.0 / (4.0 * cfg.a_g);

    let mut h_e = Vec::new();
    let mut h_o = Vec::new();
    for n in 1..cfg.l_ks {
        let dst = if n % 2 == 0 { &mut h_e } else { &mut h_o };
        dst.extend(hopping_strings(&layout, n, hop));
    }

    let mut h_d = Vec::new();
    for n in 1..cfg.l_ks {
        let p = PauliString::from_supports(nq, &[layout.link(n)], &[], false);
        h_d.push((-cfg.a_g, p));
    }
    for n in 1..=cfg.l_ks {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let p = PauliString::from_supports(nq, &[], &[layout.site(n)], false);
        h_d.push((0.5 * cfg.m_over_g * sign, p));
    }
    if cfg.mu_over_g != 0.0 {
        for n in 1..=cfg.l_ks {
            let p = PauliString::from_supports(nq, &[], &[layout.site(n)], false);
            h_d.push((-0.5 * cfg.mu_over_g, p));
        }
    }

    HamiltonianTerms {
        h_e,
        h_o,
        h_d,
        constant_offset: cfg.a_g * (cfg.l_ks - 1) as f64,
        n_qubits: nq,
    }
}

/// Gauss-law operators `G_n = (−1)ⁿ σˣ_{n−1,n} Zₙ σˣ_{n,n+1}` for
/// 1 ≤ n ≤ L_KS−1; the boundary condition freezes the absent left link, so
/// G₁ = −Z₁ σˣ₁₂.
pub fn gauss_operators(cfg: &LatticeConfig) -> Vec<PauliString> {
    let layout = cfg.layout();
    let nq = layout.n_qubits();
    (1..cfg.l_ks)
        .map(|n| {
            let mut xs = vec![layout.link(n)];
            if n > 1 {
                xs.push(layout.link(n - 1));
            }
            let negative = n % 2 == 1;
            PauliString::from_supports(nq, &xs, &[layout.site(n)], negative)
        })
        .collect()
}

/// The three tracked observables as grouped Pauli sums.
#[derive(Debug, Clone)]
pub struct Observables {
    /// ⟨H⟩/L_D including the constant offset (no chemical-potential term).
    pub energy_density: PauliSum,
    /// (1/L_KS) Σ (−1)ⁿ Zₙ.
    pub chiral_condensate: PauliSum,
    /// N/L_D = (1/(2 L_D)) Σ Zₙ.
    pub number_density: PauliSum,
}

impl Observables {
    pub fn named(&self) -> [(&'static str, &PauliSum); 3] {
        [
            ("energy", &self.energy_density),
            ("chiral", &self.chiral_condensate),
            ("number", &self.number_density),
        ]
    }

    /// Owned (name, sum) list in the order the chain driver records them.
    pub fn into_named(self) -> Vec<(String, PauliSum)> {
        vec![
            ("energy".into(), self.energy_density),
            ("chiral".into(), self.chiral_condensate),
            ("number".into(), self.number_density),
        ]
    }
}

pub fn observables(cfg: &LatticeConfig) -> Observables {
    let layout = cfg.layout();
    let nq = layout.n_qubits();
    let l_d = cfg.l_dirac();

    // Energy groups mirror the Trotter split of H (μ = 0 variant).
    let h = build_model(&LatticeConfig {
        mu_over_g: 0.0,
        ..*cfg
    });
    let scale = |v: &[(f64, PauliString)]| -> Vec<(f64, PauliString)> {
        v.iter().map(|(c, p)| (c / l_d, p.clone())).collect()
    };
    let energy_density = PauliSum::new(
        nq,
        vec![scale(&h.h_e), scale(&h.h_o), scale(&h.h_d)],
        h.constant_offset / l_d,
    );

    let chiral: Vec<(f64, PauliString)> = (1..=cfg.l_ks)
        .map(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let p = PauliString::from_supports(nq, &[], &[layout.site(n)], false);
            (sign / cfg.l_ks as f64, p)
        })
        .collect();
    let chiral_condensate = PauliSum::new(nq, vec![chiral], 0.0);

    let number: Vec<(f64, PauliString)> = (1..=cfg.l_ks)
        .map(|n| {
            let p = PauliString::from_supports(nq, &[], &[layout.site(n)], false);
            (1.0 / (2.0 * l_d), p)
        })
        .collect();
    let number_density = PauliSum::new(nq, vec![number], 0.0);

    Observables {
        energy_density,
        chiral_condensate,
        number_density,
    }
}

/// Default initial state: all site bits 0, link bits solved from the Gauss
/// constraints left to right (|0-0⟩ for L_KS=2, |0-0-0+0⟩ for L_KS=4).
///
/// Returns the bit pattern of the physical-Z-basis label.
pub fn default_initial_bits(cfg: &LatticeConfig) -> u64 {
    let layout = cfg.layout();
    let n = layout.n_qubits();
    let mut bits = 0u64; // all site bits 0
    // G_m eigenvalue on a physical-Z basis state |b> is
    // (−1)^m (−1)^{b_left_link} (−1)^{b_site} (−1)^{b_right_link}; demand +1.
    let mut left = false; // frozen boundary link
    for m in 1..cfg.l_ks {
        let right = (m % 2 == 1) ^ left; // site bit is 0
        if right {
            bits |= 1 << (n - 1 - layout.link(m));
        }
        left = right;
    }
    bits
}

/// Gauss eigenvalue pattern of a physical-Z-basis bit pattern.
pub fn gauss_eigenvalues_of_bits(cfg: &LatticeConfig, bits: u64) -> Vec<i8> {
    let layout = cfg.layout();
    let n = layout.n_qubits();
    let bit = |q: usize| -> u32 { ((bits >> (n - 1 - q)) & 1) as u32 };
    (1..cfg.l_ks)
        .map(|m| {
            let mut parity = m as u32 + bit(layout.site(m)) + bit(layout.link(m));
            if m > 1 {
                parity += bit(layout.link(m - 1));
            }
            if parity % 2 == 0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Dense physical projector Π (I+G_n)/2, real-valued (the Gauss strings
/// carry no Y literal). Desk scale only.
pub fn physical_projector(cfg: &LatticeConfig, dense_max_qubits: usize) -> Vec<Vec<f64>> {
    let n = cfg.layout().n_qubits();
    assert!(
        n <= dense_max_qubits,
        "physical_projector: {n} qubits exceeds dense limit {dense_max_qubits}"
    );
    let dim = 1usize << n;
    let mut proj = vec![vec![0.0; dim]; dim];
    for (i, row) in proj.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for g in gauss_operators(cfg) {
        debug_assert_eq!(g.y_count(), 0);
        let xmask = g.x_mask_msb() as usize;
        let zmask = g.z_mask_msb() as usize;
        let sign = g.sign();
        // G|k> = phase(k)|k ^ xmask|, so (G·P)[r][c] = phase(r^xmask)·P[r^xmask][c].
        let mut next = vec![vec![0.0; dim]; dim];
        for r in 0..dim {
            let rp = r ^ xmask;
            let phase = if (rp & zmask).count_ones() & 1 == 1 {
                -sign
            } else {
                sign
            };
            for c in 0..dim {
                next[r][c] = 0.5 * (proj[r][c] + phase * proj[rp][c]);
            }
        }
        proj = next;
    }
    proj
}

/// Checks [H, G_n] = 0 term by term and intra-group commutation; used by
/// tests and the verifier command.
pub fn check_gauge_structure(cfg: &LatticeConfig) -> bool {
    let terms = build_model(cfg);
    let gauss = gauss_operators(cfg);
    let all_commute = terms
        .all_terms()
        .all(|(_, h)| gauss.iter().all(|g| commutes(h, g).expect("uniform sizes")));
    let intra = |v: &[(f64, PauliString)]| {
        (0..v.len()).all(|i| ((i + 1)..v.len()).all(|j| commutes(&v[i].1, &v[j].1).unwrap()))
    };
    all_commute && intra(&terms.h_e) && intra(&terms.h_o) && intra(&terms.h_d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(l_ks: usize, mu: f64) -> LatticeConfig {
        LatticeConfig::new(l_ks, 0.25, 0.01, mu).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(LatticeConfig::new(1, 0.25, 0.0, 0.0).is_err());
        assert!(LatticeConfig::new(2, 0.0, 0.0, 0.0).is_err());
        assert!(LatticeConfig::new(2, 0.25, 0.0, 0.0).is_ok());
    }

    #[test]
    fn term_counts_l2() {
        let t = build_model(&cfg(2, 1.0));
        assert!(t.h_e.is_empty());
        assert_eq!(t.h_o.len(), 2);
        // 1 link + 2 mass + 2 chemical.
        assert_eq!(t.h_d.len(), 5);
        assert_eq!(t.n_qubits, 3);
    }

    #[test]
    fn term_counts_l4() {
        let t = build_model(&cfg(4, 1.0));
        assert_eq!(t.h_e.len(), 2);
        assert_eq!(t.h_o.len(), 4);
        assert_eq!(t.h_d.len(), 3 + 4 + 4);
        assert_eq!(t.n_qubits, 7);
        assert!((t.constant_offset - 0.75).abs() < 1e-15);
    }

    #[test]
    fn mu_zero_omits_chemical_strings() {
        let t = build_model(&cfg(4, 0.0));
        assert_eq!(t.h_d.len(), 3 + 4);
    }

    #[test]
    fn gauss_operators_shape() {
        let g = gauss_operators(&cfg(2, 0.0));
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].to_string(), "-ZXI");

        let g = gauss_operators(&cfg(4, 0.0));
        assert_eq!(g.len(), 3);
        assert_eq!(g[0].to_string(), "-ZXIIIII");
        assert_eq!(g[1].to_string(), "+IXZXIII");
        assert_eq!(g[2].to_string(), "-IIIXZXI");
        for a in &g {
            for b in &g {
                assert!(commutes(a, b).unwrap());
            }
            let sq = crate::pauli::multiply(a, a).unwrap();
            assert!(sq.is_identity_string() && !sq.is_negative());
        }
    }

    #[test]
    fn hamiltonian_commutes_with_gauss() {
        for l in [2, 3, 4, 5] {
            assert!(check_gauge_structure(&cfg(l, 0.7)));
        }
    }

    #[test]
    fn label_codec_round_trip() {
        let layout = cfg(2, 0.0).layout();
        let bits = layout.bits_of_label("0-0").unwrap();
        assert_eq!(bits, 0b010);
        assert_eq!(layout.label_of(bits), "0-0");

        let layout = cfg(4, 0.0).layout();
        // Fig-6-style label; its bit pattern follows from the codec rules
        // (site chars are raw bits, link '+' is 0) and is Gauss-checked below.
        let bits = layout.bits_of_label("1+0+1+0").unwrap();
        assert_eq!(bits, 0b1000100);
        assert_eq!(layout.label_of(bits), "1+0+1+0");
        assert_eq!(gauss_eigenvalues_of_bits(&cfg(4, 0.0), bits), vec![1, 1, 1]);

        assert!(layout.bits_of_label("0101000").is_err());
        assert!(layout.bits_of_label("0-0-0+0").is_ok());
        assert!(layout.bits_of_label("0-0").is_err());
    }

    #[test]
    fn default_initial_state_is_physical() {
        let c2 = cfg(2, 0.0);
        let bits = default_initial_bits(&c2);
        assert_eq!(c2.layout().label_of(bits), "0-0");
        assert!(gauss_eigenvalues_of_bits(&c2, bits).iter().all(|&e| e == 1));

        let c4 = cfg(4, 0.0);
        let bits = default_initial_bits(&c4);
        assert_eq!(c4.layout().label_of(bits), "0-0-0+0");
        assert!(gauss_eigenvalues_of_bits(&c4, bits).iter().all(|&e| e == 1));

        // A plausible-looking but wrong L=4 label fails the middle Gauss law.
        let printed = c4.layout().bits_of_label("0-0+0-0").unwrap();
        assert_eq!(gauss_eigenvalues_of_bits(&c4, printed)[1], -1);
    }

    #[test]
    fn number_and_chiral_eigenvalues_on_labels() {
        let c4 = cfg(4, 0.0);
        let obs = observables(&c4);
        let all_up = c4.layout().bits_of_label("0-0-0+0").unwrap();
        let sv = crate::statevec::StateVector::basis_state(7, all_up);
        // Diagonal observables read site bits straight off the basis state.
        let n = crate::statevec::expectation(&sv, &obs.number_density).unwrap();
        assert!((n - 1.0).abs() < 1e-12, "density 1 when N = +2, L_D = 2");
        let chi = crate::statevec::expectation(&sv, &obs.chiral_condensate).unwrap();
        assert!(chi.abs() < 1e-12);

        // All sites flipped: density -1 by sign symmetry.
        let flipped = c4.layout().bits_of_label("1-1-1+1").unwrap();
        let sv = crate::statevec::StateVector::basis_state(7, flipped);
        let n = crate::statevec::expectation(&sv, &obs.number_density).unwrap();
        assert!((n + 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_rank_and_idempotence_l2() {
        let c2 = cfg(2, 0.0);
        let p = physical_projector(&c2, 16);
        let dim = 8;
        for r in 0..dim {
            for c in 0..dim {
                let mut pp = 0.0;
                for k in 0..dim {
                    pp += p[r][k] * p[k][c];
                }
                assert!((pp - p[r][c]).abs() < 1e-12, "idempotence");
                assert!((p[r][c] - p[c][r]).abs() < 1e-12, "symmetry");
            }
        }
        // Trace = rank = 4 = 2^{L_KS}.
        let tr: f64 = (0..dim).map(|i| p[i][i]).sum();
        assert!((tr - 4.0).abs() < 1e-12);
    }
}
