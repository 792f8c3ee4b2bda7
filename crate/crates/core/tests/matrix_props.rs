mod common;

use common::{oracle_rank, random_matrix, rational_rank, rng, to_dense};
use hitmat::matrix::{
    bareiss_rank, border, deficiency, rank_exact, rank_exact_with, rank_increase_classify,
    rank_mod_p, RankOptions, ZeroOneMatrix,
};
use proptest::prelude::*;
use rand::Rng;

const M61: u64 = (1 << 61) - 1;

fn arb_matrix(max_n: usize) -> impl Strategy<Value = ZeroOneMatrix> {
    (1..=max_n, 0.0f64..=1.0).prop_flat_map(|(n, d)| {
        proptest::collection::vec(proptest::bool::weighted(d), n * n)
            .prop_map(move |bits| ZeroOneMatrix::from_fn(n, |i, j| bits[i * n + j]))
    })
}

fn arb_bordered(max_n: usize) -> impl Strategy<Value = (ZeroOneMatrix, Vec<bool>, Vec<bool>)> {
    arb_matrix(max_n).prop_flat_map(|q| {
        let n = q.n();
        (
            Just(q),
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<bool>(), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn modular_rank_never_exceeds_rational_rank(m in arb_matrix(14)) {
        let exact = oracle_rank(&m);
        for prime in [2, 3, 5, 7, M61] {
            prop_assert!(rank_mod_p(&m, prime) <= exact);
        }
        prop_assert_eq!(rank_mod_p(&m, M61), exact);
    }

    #[test]
    fn rank_is_transpose_invariant(m in arb_matrix(20)) {
        prop_assert_eq!(rank_exact(&m).rank, rank_exact(&m.transpose()).rank);
        prop_assert_eq!(m.transpose().transpose(), m.clone());
    }

    #[test]
    fn deficiency_is_transpose_invariant(m in arb_matrix(20)) {
        prop_assert_eq!(deficiency(&m).unwrap(), deficiency(&m.transpose()).unwrap());
    }

    #[test]
    fn bordering_adds_at_most_two((q, x, y) in arb_bordered(10)) {
        let g = border(&q, &x, &y).unwrap();
        let (rq, rg) = (oracle_rank(&q), oracle_rank(&g));
        prop_assert!(rq <= rg && rg <= rq + 2);
        let c = rank_increase_classify(&q, &x, &y).unwrap();
        prop_assert_eq!(c.delta, rg - rq);
        prop_assert!(c.is_consistent());
    }

    #[test]
    fn classification_matches_span_tests((q, x, y) in arb_bordered(8)) {
        // x is outside the row span iff appending it raises the rank.
        let mut rows = to_dense(&q);
        let rq = rational_rank(&rows);
        rows.push(x.iter().map(|&b| b as u8).collect());
        let x_out = rational_rank(&rows) > rq;
        let mut cols = to_dense(&q.transpose());
        cols.push(y.iter().map(|&b| b as u8).collect());
        let y_out = rational_rank(&cols) > rq;
        let c = rank_increase_classify(&q, &x, &y).unwrap();
        prop_assert_eq!(c.x_outside_row_span, x_out);
        prop_assert_eq!(c.y_outside_col_span, y_out);
        prop_assert_eq!(c.delta == 2, x_out && y_out);
    }
}

#[test]
fn modular_rank_matches_bareiss_on_random_12x12() {
    let mut r = rng(1);
    for _ in 0..1000 {
        let d = r.random_range(0.05..0.95);
        let m = random_matrix(&mut r, 12, d);
        assert_eq!(rank_mod_p(&m, M61), bareiss_rank(&m));
    }
}

#[test]
fn rank_exact_matches_bareiss_at_density_0_3() {
    let mut r = rng(2);
    let no_oracle = RankOptions {
        oracle_max_n: 0,
        ..RankOptions::default()
    };
    for _ in 0..200 {
        let m = random_matrix(&mut r, 16, 0.3);
        let report = rank_exact_with(&m, &no_oracle);
        assert_eq!(report.rank, bareiss_rank(&m));
        assert!(!report.oracle_checked);
        let checked = rank_exact(&m);
        assert!(checked.oracle_checked && checked.certified);
    }
}

#[test]
fn ten_thousand_small_matrices_against_rational_oracle() {
    let mut r = rng(3);
    let no_oracle = RankOptions {
        oracle_max_n: 0,
        ..RankOptions::default()
    };
    for t in 0..10_000 {
        let n = 1 + t % 20;
        let d = [0.1, 0.3, 0.5, 0.9][t % 4];
        let m = random_matrix(&mut r, n, d);
        let exact = oracle_rank(&m);
        let report = rank_exact_with(&m, &no_oracle);
        assert_eq!(report.rank, exact, "{m:?}");
        for &p in &report.primes_used {
            assert!(rank_mod_p(&m, p) <= exact);
        }
    }
}

#[test]
fn small_known_ranks() {
    assert_eq!(rank_exact(&ZeroOneMatrix::identity(9)).rank, 9);
    let mut m = ZeroOneMatrix::identity(6);
    m.set(1, 1, false);
    m.set(1, 0, true);
    assert_eq!(rank_exact(&m).rank, 5);
    let ones = ZeroOneMatrix::from_rows(&[[1u8, 1], [1, 1]]).unwrap();
    assert_eq!(rank_mod_p(&ones, M61), 1);
    assert_eq!(deficiency(&ones).unwrap(), 1);
    assert_eq!(deficiency(&ZeroOneMatrix::zeros(5)).unwrap(), 0);
}

#[test]
fn large_structured_ranks() {
    // J - I is non-singular for every n >= 2; over GF(2) it is singular for
    // odd n, which the modular stage must not be fooled by.
    for n in [65, 127, 200] {
        let r = rank_exact(&ZeroOneMatrix::all_ones_off_diagonal(n));
        assert_eq!(r.rank, n);
        assert!(r.certified);
    }
    // duplicating a row drops the rank of a full-rank matrix by exactly one
    let mut m = ZeroOneMatrix::all_ones_off_diagonal(150);
    for j in 0..150 {
        let v = m.get(5, j);
        m.set(77, j, v);
    }
    let r = rank_exact(&m);
    assert_eq!(r.rank, 149);
    assert_eq!(rank_mod_p(&m, M61), 149);
}
