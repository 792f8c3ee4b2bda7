//! Exact linear algebra on square 0-1 matrices.
//!
//! Indices are 0-based throughout the Rust API. Rank is always rank over the
//! rationals; see [`rank`] for how it is computed and certified.

mod bareiss;
pub(crate) mod bits;
mod border;
mod modular;
mod peel;
mod rank;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use bareiss::{bareiss_rank, bareiss_rank_bits};
pub use bits::BitMatrix;
pub use border::{border, rank_increase_classify, RankIncrease};
pub use modular::{is_prime_u64, random_prime, rank_mod_p, rank_mod_p_bits};
pub use rank::{
    deficiency, deficiency_from_parts, rank_exact, rank_exact_bits, rank_exact_with, RankOptions,
    RankReport,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix dimension must be at least 1")]
    Empty,
    #[error("entry at ({row}, {col}) is not 0 or 1")]
    NotZeroOne { row: usize, col: usize },
    #[error("malformed matrix text: {0}")]
    Parse(String),
    #[error(
        "internal error: negative deficiency (m={m}, rank={rank}, z={z}); the rank computation is wrong"
    )]
    NegativeDeficiency { m: usize, rank: usize, z: usize },
}

/// A square 0-1 matrix with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZeroOneMatrix {
    bits: BitMatrix,
}

impl ZeroOneMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            bits: BitMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| i == j)
    }

    /// `J - I`: ones everywhere off the diagonal.
    pub fn all_ones_off_diagonal(n: usize) -> Self {
        Self::from_fn(n, |i, j| i != j)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> bool) -> Self {
        Self {
            bits: BitMatrix::from_fn(n, n, f),
        }
    }

    /// Builds from nested rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(MatrixError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => m.set(i, j, true),
                    _ => return Err(MatrixError::NotZeroOne { row: i, col: j }),
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.bits.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits.get(i, j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.bits.set(i, j, value)
    }

    pub fn bits(&self) -> &BitMatrix {
        &self.bits
    }

    pub(crate) fn bits_mut(&mut self) -> &mut BitMatrix {
        &mut self.bits
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        self.bits.row(i)
    }

    pub fn transpose(&self) -> Self {
        Self {
            bits: self.bits.transpose(),
        }
    }

    /// The leading `k x k` minor `M[k]`.
    pub fn leading_minor(&self, k: usize) -> Self {
        assert!(k <= self.n(), "minor size {k} exceeds dimension {}", self.n());
        let idx: Vec<usize> = (0..k).collect();
        Self {
            bits: self.bits.select(&idx, &idx),
        }
    }

    /// `M^{(A,B)}`: the matrix with rows `A` and columns `B` removed.
    pub fn delete(&self, rows: &[usize], cols: &[usize]) -> BitMatrix {
        let keep_r: Vec<usize> = (0..self.n()).filter(|i| !rows.contains(i)).collect();
        let keep_c: Vec<usize> = (0..self.n()).filter(|j| !cols.contains(j)).collect();
        self.bits.select(&keep_r, &keep_c)
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.bits.row_weight(i)
    }

    pub fn col_weights(&self) -> Vec<usize> {
        self.bits.col_weights()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    /// Out-neighbourhood of `i`: the column indices of the ones in row `i`.
    pub fn out_neighbours(&self, i: usize) -> Vec<usize> {
        self.bits.row_support(i)
    }

    /// In-neighbourhood of `j`: the row indices of the ones in column `j`.
    pub fn in_neighbours(&self, j: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.get(i, j)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.bits == self.bits.transpose()
    }

    /// `Z^row(M)`: indices of all-zero rows.
    pub fn zero_rows(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.bits.row(i).iter().all(|&w| w == 0))
            .collect()
    }

    /// `Z^col(M)`: indices of all-zero columns.
    pub fn zero_cols(&self) -> Vec<usize> {
        let mut any = vec![0u64; self.bits.stride()];
        for i in 0..self.n() {
            for (a, &w) in any.iter_mut().zip(self.bits.row(i)) {
                *a |= w;
            }
        }
        (0..self.n())
            .filter(|&j| (any[j / 64] >> (j % 64)) & 1 == 0)
            .collect()
    }

    /// `z(M) = max(|Z^row(M)|, |Z^col(M)|)`.
    pub fn z_value(&self) -> usize {
        self.zero_rows().len().max(self.zero_cols().len())
    }

    /// Parses the text format: first line `n`, then `n` lines of `n`
    /// characters from `{0,1}`.
    pub fn parse_text(text: &str) -> Result<Self, MatrixError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| MatrixError::Parse("missing dimension line".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| MatrixError::Parse(format!("bad dimension line {header:?}")))?;
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| MatrixError::Parse(format!("expected {n} rows, found {i}")))?;
            if line.len() != n {
                return Err(MatrixError::Parse(format!(
                    "row {} has {} characters, expected {n}",
                    i + 1,
                    line.len()
                )));
            }
            for (j, ch) in line.bytes().enumerate() {
                match ch {
                    b'0' => {}
                    b'1' => m.set(i, j, true),
                    _ => return Err(MatrixError::NotZeroOne { row: i, col: j }),
                }
            }
        }
        if lines.next().is_some() {
            return Err(MatrixError::Parse(format!("more than {n} rows")));
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n());
        for i in 0..self.n() {
            for j in 0..self.n() {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }
}

impl FromStr for ZeroOneMatrix {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_text(s)
    }
}

impl fmt::Debug for ZeroOneMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
