//! The bordered matrix `Γ(Q, x, y)` and the rank change it produces.

use serde::Serialize;

use super::bits::BitMatrix;
use super::rank::{rank_exact_bits, RankOptions};
use super::{MatrixError, ZeroOneMatrix};

/// `Q` in the top-left block, `y` as the new last column, `x` as the new last
/// row, and a zero in the corner.
pub fn border(q: &ZeroOneMatrix, x: &[bool], y: &[bool]) -> Result<ZeroOneMatrix, MatrixError> {
    let m = q.n();
    for v in [x, y] {
        if v.len() != m {
            return Err(MatrixError::DimensionMismatch {
                expected: m,
                found: v.len(),
            });
        }
    }
    let mut out = ZeroOneMatrix::zeros(m + 1);
    for i in 0..m {
        let words = q.row_words(i).to_vec();
        let mut row = vec![0u64; out.bits().stride()];
        row[..words.len()].copy_from_slice(&words);
        out.bits_mut().set_row(i, &row);
        out.set(i, m, y[i]);
    }
    for (j, &xj) in x.iter().enumerate() {
        out.set(m, j, xj);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankIncrease {
    /// `rank(Γ) - rank(Q)`, always in `0..=2`.
    pub delta: usize,
    /// `x` is not in the row span of `Q`.
    pub x_outside_row_span: bool,
    /// `y` is not in the column span of `Q`.
    pub y_outside_col_span: bool,
}

impl RankIncrease {
    /// The `+2` case happens exactly when both vectors escape their spans.
    pub fn is_consistent(&self) -> bool {
        (self.delta == 2) == (self.x_outside_row_span && self.y_outside_col_span)
    }
}

/// Classifies the rank increase from bordering, computing the span
/// predicates by separate rank computations on `[Q; x]` and `[Q^T; y]`.
pub fn rank_increase_classify(
    q: &ZeroOneMatrix,
    x: &[bool],
    y: &[bool],
) -> Result<RankIncrease, MatrixError> {
    let gamma = border(q, x, y)?;
    let opts = RankOptions::default();
    let rq = rank_exact_bits(q.bits(), &opts).rank;
    let rg = rank_exact_bits(gamma.bits(), &opts).rank;

    let m = q.n();
    let x_row = BitMatrix::from_fn(1, m, |_, j| x[j]);
    let y_row = BitMatrix::from_fn(1, m, |_, j| y[j]);
    let rx = rank_exact_bits(&q.bits().stack_rows(&x_row), &opts).rank;
    let ry = rank_exact_bits(&q.bits().transpose().stack_rows(&y_row), &opts).rank;

    let out = RankIncrease {
        delta: rg - rq,
        x_outside_row_span: rx > rq,
        y_outside_col_span: ry > rq,
    };
    debug_assert!(out.delta <= 2);
    debug_assert!(out.is_consistent(), "bordering dichotomy violated: {out:?}");
    Ok(out)
}
