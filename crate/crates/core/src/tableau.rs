//! Stabilizer-group engine: validation, canonical form with Clifford circuit
//! extraction, codespace dimension, and stabilizer-state overlap magnitudes.
//!
//! A tableau is a list of independent, mutually commuting signed Pauli
//! strings. The canonicalizer emits an H/S/CNOT circuit that conjugates every
//! generator to a single-qubit `Z`, plus the X gates that fix any residual
//! minus signs so the canonical generators are exactly `+Z_1..+Z_S`. Getting
//! `+` rather than `±` matters downstream: measurement bases built from the
//! circuit must stabilize the `+1` gauge sector, not a random sign pattern.

use crate::f2linalg::{self, BinMatrix};
use crate::pauli::{
    commutes, conjugate_in_place, multiply, CliffordCircuit, CliffordGate, PauliString,
};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableauError {
    #[error("no generators supplied")]
    Empty,
    #[error("generators act on different qubit counts")]
    MixedSizes,
    #[error("not abelian: generators {0} and {1} anticommute")]
    NotAbelian(usize, usize),
    #[error("dependent generators (combination {0:?} multiplies to identity)")]
    DependentGenerators(Vec<usize>),
    #[error("-I in group (combination {0:?} multiplies to -identity)")]
    MinusIdentityInGroup(Vec<usize>),
    #[error("operation requires stabilizer states (S = N), got S={0}, N={1}")]
    NotAState(usize, usize),
    #[error("invalid stabilizer file line {line}: {source}")]
    Parse {
        line: usize,
        source: crate::pauli::PauliError,
    },
}

/// Validated stabilizer group: S independent, commuting, signed Pauli
/// generators on N qubits with -I excluded. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n_qubits: usize,
    generators: Vec<PauliString>,
}

impl StabilizerTableau {
    /// Validates and wraps a generator list.
    pub fn from_generators(ps: &[PauliString]) -> Result<Self, TableauError> {
        if ps.is_empty() {
            return Err(TableauError::Empty);
        }
        let n = ps[0].n_qubits();
        if ps.iter().any(|p| p.n_qubits() != n) {
            return Err(TableauError::MixedSizes);
        }
        for i in 0..ps.len() {
            for j in (i + 1)..ps.len() {
                if !commutes(&ps[i], &ps[j]).expect("sizes checked") {
                    return Err(TableauError::NotAbelian(i, j));
                }
            }
        }
        check_independent(ps, n)?;
        Ok(StabilizerTableau {
            n_qubits: n,
            generators: ps.to_vec(),
        })
    }

    /// The unconstrained group (S = 0); its codespace is the whole space.
    pub fn empty(n_qubits: usize) -> Self {
        StabilizerTableau {
            n_qubits,
            generators: Vec::new(),
        }
    }

    /// Parses the stabilizer-group file format: one Pauli string per line,
    /// `#` comments, blank lines ignored.
    pub fn parse_group_file(text: &str) -> Result<Vec<PauliString>, TableauError> {
        let mut out = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let p = PauliString::parse(line).map_err(|source| TableauError::Parse {
                line: i + 1,
                source,
            })?;
            out.push(p);
        }
        Ok(out)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Dimension of the common +1 eigenspace, `2^(N-S)`.
    pub fn codespace_dimension(&self) -> u128 {
        1u128 << (self.n_qubits - self.generators.len())
    }
}

/// Symplectic independence check; on failure reconstructs the dependent
/// combination to distinguish "dependent" from "-I in group".
fn check_independent(ps: &[PauliString], n: usize) -> Result<(), TableauError> {
    let s = ps.len();
    let mut m = BinMatrix::zeros(s, 2 * n);
    for (r, p) in ps.iter().enumerate() {
        for q in 0..n {
            m.set(r, q, p.x(q));
            m.set(r, n + q, p.z(q));
        }
    }
    // Row reduction with combination tracking.
    let mut combo = BinMatrix::identity(s);
    let mut r = 0;
    for c in 0..2 * n {
        let Some(pivot) = (r..s).find(|&i| m.get(i, c)) else {
            continue;
        };
        if pivot != r {
            m.xor_rows(pivot, r);
            combo.xor_rows(pivot, r);
            m.xor_rows(r, pivot);
            combo.xor_rows(r, pivot);
            m.xor_rows(pivot, r);
            combo.xor_rows(pivot, r);
        }
        for i in 0..s {
            if i != r && m.get(i, c) {
                m.xor_rows(r, i);
                combo.xor_rows(r, i);
            }
        }
        r += 1;
        if r == s {
            return Ok(());
        }
    }
    // Some row vanished: find it and report the combination.
    let row = (0..s).find(|&i| m.row_is_zero(i)).expect("rank < s");
    let members: Vec<usize> = (0..s).filter(|&j| combo.get(row, j)).collect();
    let mut product = PauliString::identity(n);
    for &j in &members {
        product = multiply(&product, &ps[j]).expect("commuting generators");
    }
    debug_assert!(product.is_identity_string());
    if product.is_negative() {
        Err(TableauError::MinusIdentityInGroup(members))
    } else {
        Err(TableauError::DependentGenerators(members))
    }
}

/// Output of [`canonical_form`]: conjugating every generator by `circuit`
/// and then by X gates on `sign_fixes` yields exactly `{+Z_1, .., +Z_S}`
/// (generator i lands on qubit i).
#[derive(Debug, Clone)]
pub struct Canonicalization {
    pub circuit: CliffordCircuit,
    pub sign_fixes: Vec<usize>,
}

impl Canonicalization {
    /// The full conjugation including the sign-fix X gates.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        let mut out = crate::pauli::conjugate_by_circuit(p, &self.circuit);
        for &q in &self.sign_fixes {
            conjugate_in_place(&mut out, CliffordGate::X(q));
        }
        out
    }

    /// Circuit with the sign-fix X gates appended; conjugating by this single
    /// circuit maps generator i to `+Z_i`.
    pub fn full_circuit(&self) -> CliffordCircuit {
        let mut c = self.circuit.clone();
        for &q in &self.sign_fixes {
            c.push(CliffordGate::X(q));
        }
        c
    }
}

struct CanonBuilder {
    gens: Vec<PauliString>,
    circuit: CliffordCircuit,
    n: usize,
    s: usize,
}

impl CanonBuilder {
    fn apply(&mut self, g: CliffordGate) {
        for p in &mut self.gens {
            conjugate_in_place(p, g);
        }
        self.circuit.push(g);
    }

    fn x_block(&self) -> BinMatrix {
        let mut m = BinMatrix::zeros(self.s, self.n);
        for (r, p) in self.gens.iter().enumerate() {
            for q in 0..self.n {
                m.set(r, q, p.x(q));
            }
        }
        m
    }

    fn z_col_nonzero(&self, q: usize) -> bool {
        self.gens.iter().any(|p| p.z(q))
    }

    /// Column-operation Gaussian elimination with CNOTs, taking the X block
    /// (assumed full row rank) to `(I 0)`. Row i is fully cleared in one
    /// pass: the pivot columns built so far have zeros in all earlier rows,
    /// so neither the pivot fix nor the clearing sweep can disturb them.
    fn cnot_eliminate(&mut self) {
        for i in 0..self.s {
            if !self.gens[i].x(i) {
                let j = (i..self.n)
                    .find(|&j| self.gens[i].x(j))
                    .expect("X block must have full row rank");
                self.apply(CliffordGate::Cnot {
                    control: j,
                    target: i,
                });
            }
            for j in 0..self.n {
                if j != i && self.gens[i].x(j) {
                    self.apply(CliffordGate::Cnot {
                        control: i,
                        target: j,
                    });
                }
            }
        }
    }
}

/// Canonicalizes a tableau, emitting the Clifford circuit that conjugates
/// every generator to a single-qubit `+Z`.
///
/// Follows the nine-step procedure: H gates to make the X block full rank,
/// CNOT elimination, an H swap of the free columns, CNOT elimination of the
/// leftover X part, phase gates chosen via [`f2linalg::symmetric_decompose`],
/// CNOTs realizing the triangular factor, a phase-gate layer cancelling the
/// Z block, CNOT elimination back to the identity, and a final H swap.
/// `sign_fixes` lists the qubits whose canonical generator came out as `-Z`.
pub fn canonical_form(t: &StabilizerTableau) -> Canonicalization {
    let n = t.n_qubits();
    let s = t.num_generators();
    let mut b = CanonBuilder {
        gens: t.generators().to_vec(),
        circuit: CliffordCircuit::new(n),
        n,
        s,
    };
    // Already-canonical inputs (generator i is ±Z_i) pass through untouched;
    // only the sign fixes are reported.
    let already_canonical = b.gens.iter().enumerate().all(|(i, p)| {
        p.is_diagonal() && (0..n).all(|q| p.z(q) == (q == i))
    });
    if s == 0 || already_canonical {
        let sign_fixes = b
            .gens
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_negative())
            .map(|(i, _)| i)
            .collect();
        return Canonicalization {
            circuit: b.circuit,
            sign_fixes,
        };
    }

    // Step 1: Hadamards until the X block has rank S. A column that fixes a
    // rank deficiency always exists while rank < S (the deficient combination
    // is a pure-Z operator whose support must leave the pivot set).
    let mut r = f2linalg::rank(&b.x_block());
    while r < s {
        let mut progressed = false;
        for q in 0..n {
            let mut candidate = b.x_block();
            for (row, p) in b.gens.iter().enumerate() {
                candidate.set(row, q, p.z(q));
            }
            let cr = f2linalg::rank(&candidate);
            if cr > r {
                b.apply(CliffordGate::H(q));
                r = cr;
                progressed = true;
                break;
            }
        }
        assert!(progressed, "no Hadamard increases X-block rank");
    }

    // Step 2: CNOT elimination -> (I 0 | C D).
    b.cnot_eliminate();

    // Step 3: swap the free Z columns into the X block -> (I D | C 0).
    for q in s..n {
        if b.z_col_nonzero(q) {
            b.apply(CliffordGate::H(q));
        }
    }

    // Step 4: eliminate D -> (I 0 | C 0).
    b.cnot_eliminate();

    // Step 5: commutativity makes C symmetric; phase gates toggle its
    // diagonal so that C = M Mᵀ.
    let mut c_block = BinMatrix::zeros(s, s);
    for (row, p) in b.gens.iter().enumerate() {
        for q in 0..s {
            c_block.set(row, q, p.z(q));
        }
    }
    debug_assert!(c_block.is_symmetric(), "commutativity violated");
    let (lambda, m_fact) =
        f2linalg::symmetric_decompose(&c_block).expect("C is square and symmetric");
    for q in 0..s {
        if lambda.get(q, q) {
            b.apply(CliffordGate::S(q));
        }
    }

    // Step 6: CNOTs realizing the triangular factor -> (M 0 | M 0).
    for j in 0..s {
        for i in (j + 1)..s {
            if m_fact.get(i, j) {
                b.apply(CliffordGate::Cnot {
                    control: i,
                    target: j,
                });
            }
        }
    }

    // Step 7: phase gates cancel the Z block -> (M 0 | 0).
    for q in 0..s {
        b.apply(CliffordGate::S(q));
    }
    debug_assert!(b.gens.iter().all(|p| (0..n).all(|q| !p.z(q))));

    // Step 8: eliminate M -> (I 0 | 0).
    b.cnot_eliminate();

    // Step 9: swap -> (0 | I 0); generators are now ±Z_i.
    for q in 0..s {
        b.apply(CliffordGate::H(q));
    }

    let mut sign_fixes = Vec::new();
    for (i, p) in b.gens.iter().enumerate() {
        debug_assert!(
            p.is_diagonal() && (0..n).all(|q| p.z(q) == (q == i)),
            "canonical form must be +/-Z_i"
        );
        if p.is_negative() {
            sign_fixes.push(i);
        }
    }
    Canonicalization {
        circuit: b.circuit,
        sign_fixes,
    }
}

/// Magnitude of the inner product of two stabilizer states.
///
/// Zero when some string appears with opposite signs in the two groups;
/// otherwise `2^(-s/2)` where `s` is the minimal number of generators of `b`
/// outside `a`'s group. The minimum is reached constructively: canonicalize
/// `a`, transform `b`'s generators the same way, and row-reduce so that the
/// X-bearing generators are independent; their count is the X-block rank,
/// and the remaining pure-Z generators must all carry `+`.
pub fn state_overlap_magnitude(
    a: &StabilizerTableau,
    b: &StabilizerTableau,
) -> Result<f64, TableauError> {
    if a.num_generators() != a.n_qubits() {
        return Err(TableauError::NotAState(a.num_generators(), a.n_qubits()));
    }
    if b.num_generators() != b.n_qubits() || b.n_qubits() != a.n_qubits() {
        return Err(TableauError::NotAState(b.num_generators(), b.n_qubits()));
    }
    let n = a.n_qubits();
    let canon = canonical_form(a);
    let mut rows: Vec<PauliString> = b.generators().iter().map(|p| canon.conjugate(p)).collect();

    // Row-reduce on the X block; row products keep the signs exact.
    let mut pivot_rows = 0usize;
    for q in 0..n {
        let Some(p) = (pivot_rows..n).find(|&i| rows[i].x(q)) else {
            continue;
        };
        rows.swap(p, pivot_rows);
        for i in 0..n {
            if i != pivot_rows && rows[i].x(q) {
                rows[i] = multiply(&rows[i], &rows[pivot_rows]).expect("abelian group");
            }
        }
        pivot_rows += 1;
    }
    for row in rows.iter().skip(pivot_rows) {
        debug_assert!(row.is_diagonal());
        if row.is_negative() {
            return Ok(0.0);
        }
    }
    Ok(0.5f64.powf(pivot_rows as f64 / 2.0))
}

/// Random valid tableau: random ±Z_i seeds conjugated through a random
/// Clifford circuit. Used by tests and the verification CLI.
pub fn random_tableau<R: Rng>(n_qubits: usize, n_gens: usize, rng: &mut R) -> StabilizerTableau {
    assert!(n_gens <= n_qubits && n_qubits > 0);
    let mut gens: Vec<PauliString> = (0..n_gens)
        .map(|i| {
            let mut p = PauliString::from_supports(n_qubits, &[], &[i], false);
            if rng.gen::<bool>() {
                p.negate();
            }
            p
        })
        .collect();
    let n_gates = 2 * n_qubits * n_qubits + 4;
    for _ in 0..n_gates {
        let g = match rng.gen_range(0..3) {
            0 => CliffordGate::H(rng.gen_range(0..n_qubits)),
            1 => CliffordGate::S(rng.gen_range(0..n_qubits)),
            _ => {
                if n_qubits == 1 {
                    CliffordGate::H(0)
                } else {
                    let c = rng.gen_range(0..n_qubits);
                    let mut t = rng.gen_range(0..n_qubits);
                    if t == c {
                        t = (t + 1) % n_qubits;
                    }
                    CliffordGate::Cnot { control: c, target: t }
                }
            }
        };
        for p in &mut gens {
            conjugate_in_place(p, g);
        }
    }
    StabilizerTableau::from_generators(&gens).expect("conjugation preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        PauliString::parse(s).unwrap()
    }

    fn steane_tableau() -> StabilizerTableau {
        StabilizerTableau::from_generators(&[
            ps("XZZXI"),
            ps("IXZZX"),
            ps("XIXZZ"),
            ps("ZXIXZ"),
        ])
        .unwrap()
    }

    #[test]
    fn from_generators_validation() {
        let t = StabilizerTableau::from_generators(&[ps("ZI"), ps("IZ")]).unwrap();
        assert_eq!(t.num_generators(), 2);

        assert_eq!(
            StabilizerTableau::from_generators(&[ps("X"), ps("Z")]),
            Err(TableauError::NotAbelian(0, 1))
        );
        assert_eq!(
            StabilizerTableau::from_generators(&[ps("ZI"), ps("IZ"), ps("ZZ")]),
            Err(TableauError::DependentGenerators(vec![0, 1, 2]))
        );
        assert_eq!(
            StabilizerTableau::from_generators(&[ps("ZI"), ps("IZ"), ps("-ZZ")]),
            Err(TableauError::MinusIdentityInGroup(vec![0, 1, 2]))
        );
        assert!(matches!(
            StabilizerTableau::from_generators(&[]),
            Err(TableauError::Empty)
        ));
        assert!(steane_tableau().num_generators() == 4);
    }

    #[test]
    fn codespace_dimensions() {
        let g1 = StabilizerTableau::from_generators(&[ps("-ZXI")]).unwrap();
        assert_eq!(g1.codespace_dimension(), 4);
        let full = StabilizerTableau::from_generators(&[ps("ZI"), ps("IZ")]).unwrap();
        assert_eq!(full.codespace_dimension(), 1);
        assert_eq!(steane_tableau().codespace_dimension(), 2);
    }

    #[test]
    fn canonical_form_trivial_cases() {
        let t = StabilizerTableau::from_generators(&[ps("Z")]).unwrap();
        let c = canonical_form(&t);
        assert!(c.circuit.is_empty() && c.sign_fixes.is_empty());

        let t = StabilizerTableau::from_generators(&[ps("-Z")]).unwrap();
        let c = canonical_form(&t);
        assert!(c.circuit.is_empty());
        assert_eq!(c.sign_fixes, vec![0]);
    }

    fn assert_canonicalizes(t: &StabilizerTableau) {
        let c = canonical_form(t);
        for (i, g) in t.generators().iter().enumerate() {
            let mapped = c.conjugate(g);
            let expect = PauliString::from_supports(t.n_qubits(), &[], &[i], false);
            assert_eq!(mapped, expect, "generator {i} must map to +Z_{}", i + 1);
        }
        // Only H/S/CNOT in the circuit proper.
        assert!(c
            .circuit
            .gates()
            .iter()
            .all(|g| !matches!(g, CliffordGate::X(_))));
    }

    #[test]
    fn canonical_form_steane_example() {
        assert_canonicalizes(&steane_tableau());
    }

    #[test]
    fn canonical_form_random_tableaus() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let n = rng.gen_range(1..=12);
            let s = rng.gen_range(1..=n);
            let t = random_tableau(n, s, &mut rng);
            assert_canonicalizes(&t);
            let gate_bound = 8 * n * n;
            let c = canonical_form(&t);
            assert!(
                c.circuit.len() + c.sign_fixes.len() <= gate_bound,
                "trial {trial}: {} gates exceeds 8N^2 = {gate_bound}",
                c.circuit.len()
            );
        }
    }

    #[test]
    fn overlap_trivial_cases() {
        let zero = StabilizerTableau::from_generators(&[ps("Z")]).unwrap();
        let one = StabilizerTableau::from_generators(&[ps("-Z")]).unwrap();
        let plus = StabilizerTableau::from_generators(&[ps("X")]).unwrap();
        assert_eq!(state_overlap_magnitude(&zero, &one).unwrap(), 0.0);
        assert_eq!(state_overlap_magnitude(&zero, &zero).unwrap(), 1.0);
        let v = state_overlap_magnitude(&zero, &plus).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let partial = StabilizerTableau::from_generators(&[ps("ZI")]).unwrap();
        assert!(state_overlap_magnitude(&partial, &partial).is_err());
    }

    #[test]
    fn overlap_is_symmetric_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(1..=6);
            let a = random_tableau(n, n, &mut rng);
            let b = random_tableau(n, n, &mut rng);
            let ab = state_overlap_magnitude(&a, &b).unwrap();
            let ba = state_overlap_magnitude(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-12, "|<a|b>| = {ab} vs |<b|a>| = {ba}");
        }
    }

    #[test]
    fn parse_group_file_format() {
        let text = "# gauss ops\n-ZXI\n\n+IXZ  # trailing comment\n";
        let gens = StabilizerTableau::parse_group_file(text).unwrap();
        assert_eq!(gens, vec![ps("-ZXI"), ps("IXZ")]);
        assert!(StabilizerTableau::parse_group_file("XW\n").is_err());
        assert!(StabilizerTableau::parse_group_file("# only comments\n")
            .unwrap()
            .is_empty());
    }
}
