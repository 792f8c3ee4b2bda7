//! Fraction-free (Bareiss) elimination over the integers.
//!
//! Every intermediate entry is a minor of the input, so the divisions are
//! exact. Elimination first runs in `i128` and restarts with big integers on
//! the first overflow.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::bits::BitMatrix;
use super::ZeroOneMatrix;

fn bareiss_i128(m: &BitMatrix) -> Option<usize> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<i128> = (0..rows * cols)
        .map(|k| m.get(k / cols, k % cols) as i128)
        .collect();
    let mut prev: i128 = 1;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| a[r * cols + col] != 0) else {
            continue;
        };
        if pivot != rank {
            for j in 0..cols {
                a.swap(pivot * cols + j, rank * cols + j);
            }
        }
        let pv = a[rank * cols + col];
        for r in rank + 1..rows {
            let f = a[r * cols + col];
            for j in col + 1..cols {
                let lhs = pv.checked_mul(a[r * cols + j])?;
                let rhs = f.checked_mul(a[rank * cols + j])?;
                let num = lhs.checked_sub(rhs)?;
                debug_assert_eq!(num % prev, 0);
                a[r * cols + j] = num / prev;
            }
            a[r * cols + col] = 0;
        }
        prev = pv;
        rank += 1;
    }
    Some(rank)
}

fn bareiss_big(m: &BitMatrix) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<BigInt> = (0..rows * cols)
        .map(|k| BigInt::from(m.get(k / cols, k % cols) as u8))
        .collect();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| !a[r * cols + col].is_zero()) else {
            continue;
        };
        if pivot != rank {
            for j in 0..cols {
                a.swap(pivot * cols + j, rank * cols + j);
            }
        }
        let pv = a[rank * cols + col].clone();
        for r in rank + 1..rows {
            let f = a[r * cols + col].clone();
            for j in col + 1..cols {
                let num = &pv * &a[r * cols + j] - &f * &a[rank * cols + j];
                a[r * cols + j] = num / &prev;
            }
            a[r * cols + col] = BigInt::zero();
        }
        prev = pv;
        rank += 1;
    }
    rank
}

/// Exact rational rank of a rectangular 0-1 matrix by fraction-free elimination.
pub fn bareiss_rank_bits(m: &BitMatrix) -> usize {
    bareiss_i128(m).unwrap_or_else(|| bareiss_big(m))
}

pub fn bareiss_rank(m: &ZeroOneMatrix) -> usize {
    bareiss_rank_bits(m.bits())
}
