//! Rank over the rationals and the deficiency `Y(M) = m - rank(M) - z(M)`.
//!
//! `rank_exact` works in stages, stopping as soon as the rank is pinned:
//!
//! 1. peel off zero lines and lines with a single non-zero entry, which
//!    changes the rank by a known amount over every field;
//! 2. eliminate the remaining core over GF(2);
//! 3. eliminate over one, then a second, random prime in `(2^60, 2^62)`.
//!
//! Every modular rank is a lower bound for the rational rank, and
//! `min(rows, cols)` of the core is an upper bound, so a stage that reaches
//! the upper bound certifies the result. Otherwise the answer is the maximum
//! over the two large primes, which is wrong only if both primes divide every
//! maximal non-vanishing minor. For an `n x n` 0-1 matrix those minors are at
//! most `n^{n/2}`, so at most `n log2(n) / 120` primes from the range can be
//! bad (about 38 at `n = 512`) out of roughly `2^56` candidates.
//!
//! Small matrices are additionally confirmed with fraction-free elimination.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::bareiss::bareiss_rank_bits;
use super::bits::BitMatrix;
use super::modular::{random_prime, rank_gf2, rank_mod_p_bits};
use super::peel::peel;
use super::{MatrixError, ZeroOneMatrix};
use crate::rng::CounterRng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    /// The rank is proven equal to the rational rank: a modular rank reached
    /// the structural upper bound, or fraction-free elimination confirmed it.
    pub certified: bool,
    pub primes_used: Vec<u64>,
    pub oracle_checked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankOptions {
    /// Matrices with `max(rows, cols)` at most this are confirmed by Bareiss.
    pub oracle_max_n: usize,
    /// Mixed into prime selection. Primes are otherwise a function of the
    /// matrix, so repeated calls on the same input agree bit for bit.
    pub prime_seed: u64,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self {
            oracle_max_n: 64,
            prime_seed: 0x6869_746d_6174,
        }
    }
}

fn prime_rng(m: &BitMatrix, seed: u64) -> CounterRng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    for i in 0..m.rows() {
        for w in m.row(i) {
            h.update(w.to_le_bytes());
        }
    }
    let digest = h.finalize();
    let mut key = [0u8; 8];
    key.copy_from_slice(&digest[..8]);
    CounterRng::new(u64::from_le_bytes(key))
}

/// Rational rank of a rectangular 0-1 matrix.
pub fn rank_exact_bits(m: &BitMatrix, opts: &RankOptions) -> RankReport {
    let peeled = peel(m);
    let core = &peeled.core;
    let upper = core.rows().min(core.cols());
    let mut primes_used = Vec::new();

    let (core_rank, mut certified) = if upper == 0 {
        (0, true)
    } else {
        primes_used.push(2);
        let r2 = rank_gf2(core);
        if r2 == upper {
            (r2, true)
        } else {
            let mut rng = prime_rng(core, opts.prime_seed);
            let p1 = random_prime(&mut rng);
            primes_used.push(p1);
            let r1 = rank_mod_p_bits(core, p1);
            if r1 == upper {
                (r1, true)
            } else {
                let p2 = loop {
                    let p = random_prime(&mut rng);
                    if p != p1 {
                        break p;
                    }
                };
                primes_used.push(p2);
                let r = r1.max(rank_mod_p_bits(core, p2)).max(r2);
                (r, r == upper)
            }
        }
    };
    let mut rank = peeled.removed_rank + core_rank;

    let mut oracle_checked = false;
    if m.rows().max(m.cols()) <= opts.oracle_max_n {
        let exact = bareiss_rank_bits(m);
        if exact != rank {
            log::error!("modular rank {rank} disagrees with fraction-free rank {exact}");
            debug_assert_eq!(exact, rank, "modular rank disagrees with Bareiss");
            rank = exact;
        }
        oracle_checked = true;
        certified = true;
    }
    RankReport {
        rank,
        certified,
        primes_used,
        oracle_checked,
    }
}

pub fn rank_exact_with(m: &ZeroOneMatrix, opts: &RankOptions) -> RankReport {
    rank_exact_bits(m.bits(), opts)
}

/// Rational rank with default options.
pub fn rank_exact(m: &ZeroOneMatrix) -> RankReport {
    rank_exact_with(m, &RankOptions::default())
}

/// `m - rank - z`, refusing to return a negative value.
pub fn deficiency_from_parts(m: usize, rank: usize, z: usize) -> Result<usize, MatrixError> {
    m.checked_sub(rank)
        .and_then(|r| r.checked_sub(z))
        .ok_or(MatrixError::NegativeDeficiency { m, rank, z })
}

/// `Y(M) = m - rank(M) - z(M)`.
pub fn deficiency(m: &ZeroOneMatrix) -> Result<usize, MatrixError> {
    deficiency_from_parts(m.n(), rank_exact(m).rank, m.z_value())
}
