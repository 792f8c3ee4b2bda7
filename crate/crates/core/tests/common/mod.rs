//! Independent reference implementations used as test oracles. None of this
//! shares code with the library under test.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use hitmat::matrix::ZeroOneMatrix;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut StdRng, n: usize, density: f64) -> ZeroOneMatrix {
    ZeroOneMatrix::from_fn(n, |_, _| rng.random_bool(density))
}

pub fn to_dense(m: &ZeroOneMatrix) -> Vec<Vec<u8>> {
    (0..m.n()).map(|i| (0..m.n()).map(|j| m.get(i, j) as u8).collect()).collect()
}

/// Rank by Gauss-Jordan elimination over exact rationals.
pub fn rational_rank(rows: &[Vec<u8>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let (nr, nc) = (a.len(), a.first().map_or(0, Vec::len));
    let mut rank = 0;
    for col in 0..nc {
        let Some(piv) = (rank..nr).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = BigRational::one() / a[rank][col].clone();
        for c in col..nc {
            a[rank][c] = &a[rank][c] * &inv;
        }
        for r in 0..nr {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..nc {
                    let delta = &f * &a[rank][c];
                    a[r][c] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn oracle_rank(m: &ZeroOneMatrix) -> usize {
    rational_rank(&to_dense(m))
}

/// Subsets of `items` with sizes in `lo..=hi`, by recursion.
pub fn subsets(items: &[usize], lo: usize, hi: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], start: usize, cur: &mut Vec<usize>, lo: usize, hi: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() >= lo {
            out.push(cur.clone());
        }
        if cur.len() == hi {
            return;
        }
        for k in start..items.len() {
            cur.push(items[k]);
            go(items, k + 1, cur, lo, hi, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, 0, &mut Vec::new(), lo, hi, &mut out);
    out
}

/// Number of columns in `pool` hit exactly once by the rows in `set`.
pub fn selector_count(rows: &[Vec<u8>], set: &[usize], pool: &BTreeSet<usize>) -> usize {
    pool.iter()
        .filter(|&&j| set.iter().filter(|&&i| rows[i][j] == 1).count() == 1)
        .count()
}

/// Plain `b`-blocked by enumerating every eligible subset.
pub fn brute_blocked(rows: &[Vec<u8>], b: usize) -> bool {
    let n = rows.len();
    let eligible: Vec<usize> = (0..n).filter(|&i| rows[i].iter().any(|&x| x == 1)).collect();
    let pool: BTreeSet<usize> = (0..rows[0].len()).collect();
    subsets(&eligible, 2, b)
        .iter()
        .all(|s| selector_count(rows, s, &pool) >= 2)
}

/// Whether two distinct low-out-degree vertices of the leading `m x m`
/// minor are within undirected distance 2, by breadth-first search.
pub fn bfs_close_pair(rows: &[Vec<u8>], m: usize, threshold: f64, excluded: &BTreeSet<usize>) -> bool {
    let low: Vec<usize> = (0..m)
        .filter(|&v| !excluded.contains(&v))
        .filter(|&v| (0..m).filter(|&j| rows[v][j] == 1).count() as f64 <= threshold)
        .collect();
    let neighbours = |v: usize| -> Vec<usize> {
        (0..m).filter(|&u| u != v && (rows[v][u] == 1 || rows[u][v] == 1)).collect()
    };
    for &s in &low {
        let mut dist = vec![usize::MAX; m];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            if dist[v] == 2 {
                continue;
            }
            for u in neighbours(v) {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        if low.iter().any(|&t| t != s && dist[t] <= 2) {
            return true;
        }
    }
    false
}

/// `C(k, j) / 2^k` maximized over `j`, computed with Pascal's triangle.
pub fn binomial_mode_half(k: usize) -> BigRational {
    let mut row = vec![num_bigint::BigInt::one()];
    for _ in 0..k {
        let mut next = vec![num_bigint::BigInt::one(); row.len() + 1];
        for j in 1..row.len() {
            next[j] = &row[j - 1] + &row[j];
        }
        row = next;
    }
    let best = row.iter().max().unwrap().clone();
    BigRational::new(best, num_bigint::BigInt::one() << k)
}
