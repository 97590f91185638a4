//! Exact linear algebra over GF(2).
//!
//! Matrices are stored row-major with bit-packed rows (64 entries per word),
//! so the row XORs that dominate Gaussian elimination run word-at-a-time.
//! Besides rank and multiplication this module implements the symmetric
//! decomposition `A ⊕ Λ = M·Mᵀ` with `M` unit lower triangular, which the
//! tableau canonicalizer needs to pick its phase-gate layer.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum F2Error {
    #[error("dimension mismatch: left is {0}x{1}, right is {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
}

const WORD_BITS: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Dense binary matrix over GF(2) with bit-packed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinMatrix {
    rows: usize,
    cols: usize,
    row_words: usize,
    bits: Vec<u64>,
}

impl BinMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let row_words = words_for(cols).max(1);
        BinMatrix {
            rows,
            cols,
            row_words,
            bits: vec![0; rows * row_words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from 0/1 entries in row-major order.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v != 0);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        let w = self.bits[r * self.row_words + c / WORD_BITS];
        (w >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let idx = r * self.row_words + c / WORD_BITS;
        let mask = 1u64 << (c % WORD_BITS);
        if v {
            self.bits[idx] |= mask;
        } else {
            self.bits[idx] &= !mask;
        }
    }

    /// XORs row `src` into row `dst`.
    pub fn xor_rows(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let (s, d) = (src * self.row_words, dst * self.row_words);
        for k in 0..self.row_words {
            let w = self.bits[s + k];
            self.bits[d + k] ^= w;
        }
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.bits[r * self.row_words..(r + 1) * self.row_words]
            .iter()
            .all(|&w| w == 0)
    }

    pub fn transpose(&self) -> BinMatrix {
        let mut t = BinMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }
}

/// Rank of the row space over GF(2).
///
/// Plain Gaussian elimination on a working copy; the pivot is always the
/// first row carrying a 1 in the pivot column so the result (and everything
/// derived from it) is deterministic.
pub fn rank(m: &BinMatrix) -> usize {
    let mut work = m.clone();
    let mut r = 0;
    for c in 0..work.cols {
        let Some(pivot) = (r..work.rows).find(|&i| work.get(i, c)) else {
            continue;
        };
        if pivot != r {
            work.xor_rows(pivot, r);
            work.xor_rows(r, pivot);
            work.xor_rows(pivot, r);
        }
        for i in 0..work.rows {
            if i != r && work.get(i, c) {
                work.xor_rows(r, i);
            }
        }
        r += 1;
        if r == work.rows {
            break;
        }
    }
    r
}

/// Matrix product modulo 2.
pub fn multiply(a: &BinMatrix, b: &BinMatrix) -> Result<BinMatrix, F2Error> {
    if a.cols != b.rows {
        return Err(F2Error::DimensionMismatch(a.rows, a.cols, b.rows, b.cols));
    }
    let mut out = BinMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            if a.get(i, k) {
                // out row i ^= b row k
                let (s, d) = (k * b.row_words, i * out.row_words);
                for w in 0..b.row_words {
                    let v = b.bits[s + w];
                    out.bits[d + w] ^= v;
                }
            }
        }
    }
    Ok(out)
}

/// Decomposes a symmetric binary matrix as `a ⊕ lambda = m·mᵀ`.
///
/// `lambda` is diagonal and `m` is lower triangular with unit diagonal, hence
/// invertible. The entries follow the column recurrence
/// `M_ij = A_ij ⊕ Σ_{k<j} M_ik·M_jk` with `Λ_ii` absorbing whatever the
/// diagonal needs.
pub fn symmetric_decompose(a: &BinMatrix) -> Result<(BinMatrix, BinMatrix), F2Error> {
    if a.rows != a.cols {
        return Err(F2Error::NotSquare(a.rows, a.cols));
    }
    let n = a.rows;
    for i in 0..n {
        for j in 0..i {
            if a.get(i, j) != a.get(j, i) {
                return Err(F2Error::NotSymmetric(i, j));
            }
        }
    }

    let mut m = BinMatrix::zeros(n, n);
    let mut lambda = BinMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, true);
    }
    for j in 0..n {
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v ^= m.get(i, k) & m.get(j, k);
            }
            m.set(i, j, v);
        }
    }
    // Diagonal of M·Mᵀ is forced by the off-diagonal entries; Λ makes up the
    // difference with A.
    for i in 0..n {
        let mut d = false;
        for k in 0..=i {
            d ^= m.get(i, k);
        }
        lambda.set(i, i, a.get(i, i) ^ d);
    }
    Ok((lambda, m))
}
