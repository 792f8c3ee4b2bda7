//! Rank over `Z/pZ` for word-size primes.
//!
//! `p = 2` runs on the packed rows directly (row XOR). Odd primes below 2^63
//! use Montgomery arithmetic on a dense residue matrix.

use rand::Rng;

use super::bits::BitMatrix;
use super::ZeroOneMatrix;

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A uniformly chosen prime in the open interval `(2^60, 2^62)`.
pub fn random_prime<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    loop {
        let candidate = rng.random_range((1u64 << 60) + 1..(1u64 << 62)) | 1;
        if is_prime_u64(candidate) {
            return candidate;
        }
    }
}

/// Montgomery arithmetic modulo an odd `m < 2^63`, with `R = 2^64`.
#[derive(Debug, Clone, Copy)]
struct Montgomery {
    m: u64,
    m_inv_neg: u64,
    r2: u64,
}

impl Montgomery {
    fn new(m: u64) -> Self {
        debug_assert!(m % 2 == 1 && m < 1 << 63);
        // Newton iteration for m^-1 mod 2^64.
        let mut inv = m;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(m.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % m as u128) as u64;
        Self {
            m,
            m_inv_neg: inv.wrapping_neg(),
            r2: mul_mod(r, r, m),
        }
    }

    #[inline]
    fn reduce(&self, t: u128) -> u64 {
        let u = (t as u64).wrapping_mul(self.m_inv_neg);
        let s = ((t + u as u128 * self.m as u128) >> 64) as u64;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.m, self.r2)
    }

    fn from_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128)
    }

    fn inverse(&self, a_mont: u64) -> u64 {
        let a = self.from_mont(a_mont);
        self.to_mont(pow_mod(a, self.m - 2, self.m))
    }
}

pub(crate) fn rank_gf2(m: &BitMatrix) -> usize {
    let mut rows: Vec<Vec<u64>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
    let mut rank = 0;
    for col in 0..m.cols() {
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let prow = &head[rank];
        for row in tail.iter_mut() {
            if row[w] & b != 0 {
                for (x, y) in row[w..].iter_mut().zip(&prow[w..]) {
                    *x ^= *y;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn rank_odd_prime(m: &BitMatrix, prime: u64) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 {
        return 0;
    }
    let mont = Montgomery::new(prime);
    let one = mont.to_mont(1);
    let mut a = vec![0u64; rows * cols];
    for i in 0..rows {
        for j in super::bits::ones_of(m.row(i)) {
            a[i * cols + j] = one;
        }
    }
    let p = prime;
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| a[r * cols + col] != 0) else {
            continue;
        };
        if pivot != rank {
            for j in col..cols {
                a.swap(pivot * cols + j, rank * cols + j);
            }
        }
        let inv = mont.inverse(a[rank * cols + col]);
        for j in col..cols {
            let v = a[rank * cols + j];
            if v != 0 {
                a[rank * cols + j] = mont.mul(v, inv);
            }
        }
        let (head, tail) = a.split_at_mut((rank + 1) * cols);
        let prow = &head[rank * cols + col..rank * cols + cols];
        for row in tail.chunks_exact_mut(cols) {
            let f = row[col];
            if f == 0 {
                continue;
            }
            for (x, &y) in row[col..].iter_mut().zip(prow) {
                if y != 0 {
                    let t = mont.mul(f, y);
                    *x = if *x >= t { *x - t } else { *x + p - t };
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Rank of a rectangular 0-1 matrix over `Z/prime`.
pub fn rank_mod_p_bits(m: &BitMatrix, prime: u64) -> usize {
    assert!(prime >= 2, "modulus must be at least 2");
    if prime == 2 {
        rank_gf2(m)
    } else {
        assert!(prime < 1 << 63, "modulus must be below 2^63");
        debug_assert!(is_prime_u64(prime), "{prime} is not prime");
        rank_odd_prime(m, prime)
    }
}

/// Rank of `m` over the integers modulo `prime`; never exceeds the rational rank.
pub fn rank_mod_p(m: &ZeroOneMatrix, prime: u64) -> usize {
    rank_mod_p_bits(m.bits(), prime)
}
