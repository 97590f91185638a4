//! Signed N-qubit Pauli strings in symplectic (x-bits, z-bits, sign) form,
//! plus the Clifford gates that act on them by conjugation.
//!
//! Qubit `q` carries the literal I/X/Z/Y according to its (x, z) bit pair
//! (00/10/01/11). Signs are restricted to ±1: every operator in this crate is
//! a Hermitian product of Hermitian generators, so a ±i phase can only appear
//! when multiplying anticommuting strings, which is reported as an error
//! rather than tracked.
//!
//! Circuit convention: gates listed first act on states first, so conjugating
//! an operator by a circuit folds the gates in list order.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("product of anticommuting strings has an imaginary phase")]
    ImaginaryPhase,
    #[error("invalid pauli character {0:?}")]
    InvalidCharacter(char),
    #[error("empty pauli string")]
    Empty,
    #[error("gate qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("CNOT control and target must differ")]
    ControlEqualsTarget,
}

const WORD_BITS: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS).max(1)
}

/// Signed Pauli string on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_bits: Vec<u64>,
    z_bits: Vec<u64>,
    negative: bool,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        let w = words_for(n_qubits);
        PauliString {
            n_qubits,
            x_bits: vec![0; w],
            z_bits: vec![0; w],
            negative: false,
        }
    }

    /// Builds a string from explicit X/Z supports (0-based qubit indices).
    pub fn from_supports(n_qubits: usize, xs: &[usize], zs: &[usize], negative: bool) -> Self {
        let mut p = Self::identity(n_qubits);
        for &q in xs {
            assert!(q < n_qubits);
            p.set_x(q, true);
        }
        for &q in zs {
            assert!(q < n_qubits);
            p.set_z(q, true);
        }
        p.negative = negative;
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn negate(&mut self) {
        self.negative = !self.negative;
    }

    #[inline]
    pub fn x(&self, q: usize) -> bool {
        (self.x_bits[q / WORD_BITS] >> (q % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn z(&self, q: usize) -> bool {
        (self.z_bits[q / WORD_BITS] >> (q % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set_x(&mut self, q: usize, v: bool) {
        let mask = 1u64 << (q % WORD_BITS);
        if v {
            self.x_bits[q / WORD_BITS] |= mask;
        } else {
            self.x_bits[q / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn set_z(&mut self, q: usize, v: bool) {
        let mask = 1u64 << (q % WORD_BITS);
        if v {
            self.z_bits[q / WORD_BITS] |= mask;
        } else {
            self.z_bits[q / WORD_BITS] &= !mask;
        }
    }

    pub fn is_identity_string(&self) -> bool {
        self.x_bits.iter().all(|&w| w == 0) && self.z_bits.iter().all(|&w| w == 0)
    }

    /// True when the X support is empty, i.e. the string is diagonal in the
    /// computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.x_bits.iter().all(|&w| w == 0)
    }

    /// Number of qubits carrying a Y literal.
    pub fn y_count(&self) -> u32 {
        self.x_bits
            .iter()
            .zip(&self.z_bits)
            .map(|(&x, &z)| (x & z).count_ones())
            .sum()
    }

    /// X support as a u64 mask with qubit 0 at the top bit position `n-1`
    /// (matching the statevector index convention). Requires `n_qubits <= 64`.
    pub fn x_mask_msb(&self) -> u64 {
        assert!(self.n_qubits <= 64, "mask form requires <= 64 qubits");
        let mut m = 0u64;
        for q in 0..self.n_qubits {
            if self.x(q) {
                m |= 1 << (self.n_qubits - 1 - q);
            }
        }
        m
    }

    /// Z support in the same MSB convention as [`Self::x_mask_msb`].
    pub fn z_mask_msb(&self) -> u64 {
        assert!(self.n_qubits <= 64, "mask form requires <= 64 qubits");
        let mut m = 0u64;
        for q in 0..self.n_qubits {
            if self.z(q) {
                m |= 1 << (self.n_qubits - 1 - q);
            }
        }
        m
    }

    /// Parses the text form: optional sign ('+'/'-'/'−') followed by one of
    /// I/X/Y/Z per qubit, qubit 1 leftmost.
    pub fn parse(s: &str) -> Result<Self, PauliError> {
        let mut chars = s.trim().chars().peekable();
        let mut negative = false;
        match chars.peek() {
            Some('+') => {
                chars.next();
            }
            Some('-') | Some('−') => {
                negative = true;
                chars.next();
            }
            _ => {}
        }
        let literals: Vec<char> = chars.collect();
        if literals.is_empty() {
            return Err(PauliError::Empty);
        }
        let mut p = Self::identity(literals.len());
        p.negative = negative;
        for (q, c) in literals.iter().enumerate() {
            match c {
                'I' | 'i' => {}
                'X' | 'x' => p.set_x(q, true),
                'Z' | 'z' => p.set_z(q, true),
                'Y' | 'y' => {
                    p.set_x(q, true);
                    p.set_z(q, true);
                }
                _ => return Err(PauliError::InvalidCharacter(*c)),
            }
        }
        Ok(p)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for q in 0..self.n_qubits {
            let c = match (self.x(q), self.z(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Symplectic product parity: true iff the strings commute.
pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool, PauliError> {
    if p.n_qubits != q.n_qubits {
        return Err(PauliError::SizeMismatch(p.n_qubits, q.n_qubits));
    }
    let mut parity = 0u32;
    for w in 0..p.x_bits.len() {
        parity ^= (p.x_bits[w] & q.z_bits[w]).count_ones() & 1;
        parity ^= (p.z_bits[w] & q.x_bits[w]).count_ones() & 1;
    }
    Ok(parity & 1 == 0)
}

/// Group product `p·q` with exact ±1 sign tracking.
///
/// Errors when the product picks up a ±i phase, which happens exactly when
/// the inputs anticommute.
pub fn multiply(p: &PauliString, q: &PauliString) -> Result<PauliString, PauliError> {
    if p.n_qubits != q.n_qubits {
        return Err(PauliError::SizeMismatch(p.n_qubits, q.n_qubits));
    }
    // Literal-wise: X_q^{a} Z_q^{b} ordering with phase exponent of i tracked
    // mod 4. Writing each literal as i^{x.z} X^x Z^z and commuting Z past X
    // costs (-1)^{z1.x2} per qubit.
    let mut i_phase: u32 = if p.negative { 2 } else { 0 };
    i_phase += if q.negative { 2 } else { 0 };
    let mut out = PauliString::identity(p.n_qubits);
    for w in 0..p.x_bits.len() {
        let (x1, z1) = (p.x_bits[w], p.z_bits[w]);
        let (x2, z2) = (q.x_bits[w], q.z_bits[w]);
        // i^{y-count} factors from packing and unpacking Y literals.
        i_phase += (x1 & z1).count_ones() + (x2 & z2).count_ones();
        // Reordering Z1 past X2.
        i_phase += 2 * (z1 & x2).count_ones();
        let xr = x1 ^ x2;
        let zr = z1 ^ z2;
        i_phase += 4 - ((xr & zr).count_ones() % 4); // unpack result Ys: i^{-y}
        out.x_bits[w] = xr;
        out.z_bits[w] = zr;
    }
    match i_phase % 4 {
        0 => Ok(out),
        2 => {
            out.negative = true;
            Ok(out)
        }
        _ => Err(PauliError::ImaginaryPhase),
    }
}

/// Real-weighted sum of Pauli strings plus a constant, organized into groups
/// of mutually commuting strings.
///
/// The grouping carries physics: an expectation value sums over everything,
/// while a single-shot estimator draws one joint eigenvalue sample per group.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    groups: Vec<Vec<(f64, PauliString)>>,
    constant: f64,
}

impl PauliSum {
    pub fn new(n_qubits: usize, groups: Vec<Vec<(f64, PauliString)>>, constant: f64) -> Self {
        for group in &groups {
            for (_, p) in group {
                assert_eq!(p.n_qubits(), n_qubits);
            }
        }
        PauliSum {
            n_qubits,
            groups,
            constant,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn groups(&self) -> &[Vec<(f64, PauliString)>] {
        &self.groups
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = &(f64, PauliString)> {
        self.groups.iter().flatten()
    }

    pub fn num_terms(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }

    /// True when every string is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.terms().all(|(_, p)| p.is_diagonal())
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.terms()
            .all(|(_, p)| commutes(p, other).unwrap_or(false))
    }
}

/// One Clifford gate (plus X, used only for sign corrections).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Cnot { control: usize, target: usize },
    X(usize),
}

impl CliffordGate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            CliffordGate::H(q) | CliffordGate::S(q) | CliffordGate::X(q) => (q, None),
            CliffordGate::Cnot { control, target } => (control, Some(target)),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<(), PauliError> {
        let (a, b) = self.qubits();
        if a >= n_qubits {
            return Err(PauliError::QubitOutOfRange {
                index: a,
                n_qubits,
            });
        }
        if let Some(b) = b {
            if b >= n_qubits {
                return Err(PauliError::QubitOutOfRange {
                    index: b,
                    n_qubits,
                });
            }
            if a == b {
                return Err(PauliError::ControlEqualsTarget);
            }
        }
        Ok(())
    }
}

impl fmt::Display for CliffordGate {
    /// 1-based qubit indices, matching the text interfaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CliffordGate::H(q) => write!(f, "H {}", q + 1),
            CliffordGate::S(q) => write!(f, "S {}", q + 1),
            CliffordGate::Cnot { control, target } => {
                write!(f, "CNOT {} {}", control + 1, target + 1)
            }
            CliffordGate::X(q) => write!(f, "X {}", q + 1),
        }
    }
}

/// Ordered gate list; gates earlier in the list are applied to states first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordCircuit {
    n_qubits: usize,
    gates: Vec<CliffordGate>,
}

impl CliffordCircuit {
    pub fn new(n_qubits: usize) -> Self {
        CliffordCircuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[CliffordGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: CliffordGate) {
        g.validate(self.n_qubits).expect("gate out of range");
        self.gates.push(g);
    }

    pub fn extend(&mut self, other: &CliffordCircuit) {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.gates.extend_from_slice(&other.gates);
    }

    /// Greedy circuit depth: each gate goes in the earliest layer after its
    /// qubits' previous gates. Reported for diagnostics only.
    pub fn depth(&self) -> usize {
        let mut last = vec![0usize; self.n_qubits];
        let mut depth = 0;
        for g in &self.gates {
            let (a, b) = g.qubits();
            let layer = match b {
                Some(b) => last[a].max(last[b]) + 1,
                None => last[a] + 1,
            };
            last[a] = layer;
            if let Some(b) = b {
                last[b] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }
}

/// Conjugation `g·p·g†` of a string by one gate.
///
/// H swaps X and Z (Y picks up a sign); S maps X to Y and Y to −X; CNOT maps
/// X_c to X_cX_t and Z_t to Z_cZ_t with the usual sign rule; X flips the sign
/// when the qubit carries Z or Y.
pub fn conjugate_by_gate(p: &PauliString, g: CliffordGate) -> PauliString {
    let mut out = p.clone();
    conjugate_in_place(&mut out, g);
    out
}

pub(crate) fn conjugate_in_place(p: &mut PauliString, g: CliffordGate) {
    match g {
        CliffordGate::H(q) => {
            let (x, z) = (p.x(q), p.z(q));
            if x && z {
                p.negative = !p.negative;
            }
            p.set_x(q, z);
            p.set_z(q, x);
        }
        CliffordGate::S(q) => {
            let (x, z) = (p.x(q), p.z(q));
            if x && z {
                p.negative = !p.negative;
            }
            p.set_z(q, x ^ z);
        }
        CliffordGate::Cnot { control, target } => {
            let (xc, zc) = (p.x(control), p.z(control));
            let (xt, zt) = (p.x(target), p.z(target));
            if xc && zt && (xt == zc) {
                p.negative = !p.negative;
            }
            p.set_x(target, xt ^ xc);
            p.set_z(control, zc ^ zt);
        }
        CliffordGate::X(q) => {
            if p.z(q) {
                p.negative = !p.negative;
            }
        }
    }
}

/// Conjugation by a whole circuit, folding gates in list order.
pub fn conjugate_by_circuit(p: &PauliString, c: &CliffordCircuit) -> PauliString {
    let mut out = p.clone();
    for &g in c.gates() {
        conjugate_in_place(&mut out, g);
    }
    out
}

/// Conjugation by the adjoint circuit, `U†·p·U`: inverse gates folded in
/// reverse order (S is applied three times; H, CNOT, X are involutions).
pub fn conjugate_by_circuit_inverse(p: &PauliString, c: &CliffordCircuit) -> PauliString {
    let mut out = p.clone();
    for &g in c.gates().iter().rev() {
        match g {
            CliffordGate::S(q) => {
                for _ in 0..3 {
                    conjugate_in_place(&mut out, CliffordGate::S(q));
                }
            }
            other => conjugate_in_place(&mut out, other),
        }
    }
    out
}
