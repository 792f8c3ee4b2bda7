mod common;

use std::collections::BTreeSet;

use common::{bfs_close_pair, brute_blocked, random_matrix, rng, selector_count, subsets, to_dense};
use hitmat::matrix::ZeroOneMatrix;
use hitmat::process::{random_template, Model, Template, UniformField};
use hitmat::rng::CounterRng;
use hitmat::structure::{
    close_low_degree_pair, is_b_blocked, is_b_dense, is_n_robust, is_well_separated, selectors,
    CheckMode, RobustParams, SampleConfig,
};
use proptest::prelude::*;
use rand::Rng;

fn exact(m: &ZeroOneMatrix, b: usize, t: Option<&Template>) -> Option<bool> {
    is_b_blocked(m, b, t, CheckMode::Exact, &SampleConfig::default())
        .unwrap()
        .holds
}

/// Template-relative blocked condition on one side, by enumeration.
fn brute_side(rows: &[Vec<u8>], b: usize, skip_rows: &BTreeSet<usize>, skip_cols: &BTreeSet<usize>) -> bool {
    let n = rows.len();
    let eligible: Vec<usize> = (0..n)
        .filter(|i| !skip_rows.contains(i) && rows[*i].iter().any(|&x| x == 1))
        .collect();
    let pool: BTreeSet<usize> = (0..n).filter(|j| !skip_cols.contains(j)).collect();
    subsets(&eligible, 2, b)
        .iter()
        .all(|s| selector_count(rows, s, &pool) >= 2)
}

fn brute_relative(m: &ZeroOneMatrix, b: usize, t: &Template) -> bool {
    let rows = to_dense(m);
    let cols = to_dense(&m.transpose());
    let union = |sets: &std::collections::BTreeMap<usize, BTreeSet<usize>>| -> BTreeSet<usize> {
        sets.values().flatten().copied().collect()
    };
    let i_plus: BTreeSet<usize> = t.plus.keys().copied().collect();
    let i_minus: BTreeSet<usize> = t.minus.keys().copied().collect();
    let row_pool_skip: BTreeSet<usize> = i_minus.union(&union(&t.plus)).copied().collect();
    let col_pool_skip: BTreeSet<usize> = i_plus.union(&union(&t.minus)).copied().collect();
    brute_side(&rows, b, &i_plus, &row_pool_skip) && brute_side(&cols, b, &i_minus, &col_pool_skip)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn selectors_match_definition(n in 1usize..70, seed: u64, k in 1usize..6) {
        let mut r = rng(seed);
        let m = random_matrix(&mut r, n, 0.2);
        let set: Vec<usize> = (0..k.min(n)).map(|_| r.random_range(0..n)).collect::<BTreeSet<_>>().into_iter().collect();
        let rows = to_dense(&m);
        let want: Vec<usize> = (0..n)
            .filter(|&j| set.iter().filter(|&&i| rows[i][j] == 1).count() == 1)
            .collect();
        prop_assert_eq!(selectors(&m, &set, None), want);
    }

    #[test]
    fn blocked_is_monotone_in_b(n in 4usize..11, seed: u64, d in 0.1f64..0.6) {
        let m = random_matrix(&mut rng(seed), n, d);
        let verdicts: Vec<bool> = (2..=n).map(|b| exact(&m, b, None).unwrap()).collect();
        for w in verdicts.windows(2) {
            prop_assert!(w[0] || !w[1], "blocked at b+1 but not at b");
        }
    }

    #[test]
    fn witness_really_fails(n in 3usize..12, seed: u64, d in 0.1f64..0.6) {
        let m = random_matrix(&mut rng(seed), n, d);
        let v = is_b_blocked(&m, 3.min(n), None, CheckMode::Exact, &SampleConfig::default()).unwrap();
        if let Some(w) = v.witness {
            prop_assert!(w.len() >= 2 && w.len() <= 3);
            prop_assert!(w.iter().all(|&i| m.row_weight(i) > 0));
            prop_assert!(selectors(&m, &w, None).len() < 2);
        }
    }

    #[test]
    fn sampled_never_contradicts_exact(n in 4usize..14, seed: u64, d in 0.1f64..0.6) {
        let m = random_matrix(&mut rng(seed), n, d);
        let cfg = SampleConfig { random_subsets: 200, seed, ..SampleConfig::default() };
        let s = is_b_blocked(&m, 4.min(n), None, CheckMode::Sampled, &cfg).unwrap();
        let e = exact(&m, 4.min(n), None).unwrap();
        prop_assert!(s.holds.is_none() || s.holds == Some(false));
        if s.holds == Some(false) {
            prop_assert!(!e);
        }
    }

    #[test]
    fn template_relative_matches_enumeration(n in 6usize..12, seed: u64, d in 0.1f64..0.5) {
        let m = random_matrix(&mut rng(seed), n, d);
        let Some(t) = random_template(&mut CounterRng::new(seed), n, 2, false) else { return Ok(()); };
        prop_assert_eq!(exact(&m, 3, Some(&t)).unwrap(), brute_relative(&m, 3, &t));
    }
}

#[test]
fn blocked_matches_brute_force_on_16x16() {
    let mut r = rng(11);
    let mut refuted = 0;
    for t in 0..1000 {
        let d = [0.1, 0.2, 0.3][t % 3];
        let m = random_matrix(&mut r, 16, d);
        let want = brute_blocked(&to_dense(&m), 4);
        assert_eq!(exact(&m, 4, None), Some(want));
        refuted += usize::from(!want);
    }
    // both outcomes are exercised
    assert!(refuted > 0 && refuted < 1000);
}

#[test]
fn close_pairs_match_bfs_on_32_vertex_digraphs() {
    let mut r = rng(12);
    let mut found = 0;
    for t in 0..1000 {
        let d = [0.03, 0.15, 0.3][t % 3];
        let mut g = random_matrix(&mut r, 32, d);
        for i in 0..32 {
            g.set(i, i, false);
        }
        let threshold = [1.0, 1.5, 2.0][t % 3];
        let excluded: BTreeSet<usize> = (0..r.random_range(0..3)).map(|_| r.random_range(0..32)).collect();
        let ours = close_low_degree_pair(&g, 32, threshold, &excluded);
        let want = bfs_close_pair(&to_dense(&g), 32, threshold, &excluded);
        assert_eq!(ours.is_some(), want);
        found += usize::from(want);
        if let Some((u, v)) = ours {
            assert!(u < v && !excluded.contains(&u) && !excluded.contains(&v));
        }
    }
    assert!(found > 0 && found < 1000);
}

#[test]
fn constructed_well_separated_instance() {
    // a directed 6-cycle with extra edges among 1, 2, 4, 5: only 0 and 3 have
    // out-degree 1, and they are three steps apart
    let n = 6;
    let mut g = ZeroOneMatrix::zeros(n);
    for i in 0..n {
        g.set(i, (i + 1) % n, true);
    }
    for (i, j) in [(1, 4), (1, 5), (2, 4), (2, 5), (4, 1), (4, 2), (5, 1), (5, 2)] {
        g.set(i, j, true);
    }
    let low = |s: &BTreeSet<usize>| close_low_degree_pair(&g, n, 1.0, s);
    assert_eq!(low(&BTreeSet::new()), None);
    assert!(!bfs_close_pair(&to_dense(&g), n, 1.0, &BTreeSet::new()));
    // rerouting 0 -> 2 and adding 2 -> 3 gives them a common neighbour
    g.set(2, 3, true);
    g.set(0, 2, true);
    g.set(0, 1, false);
    assert_eq!(close_low_degree_pair(&g, n, 1.0, &BTreeSet::new()), Some((0, 3)));
    assert_eq!(close_low_degree_pair(&g, n, 1.0, &BTreeSet::from([3])), None);
}

#[test]
fn well_separated_reports_first_minor() {
    let field = UniformField::new(60, Model::Asymmetric, 4).unwrap();
    let p = 0.05;
    let params = RobustParams::for_p(60, p);
    let v = is_well_separated(&field, p, &params, None);
    if let Some(w) = v.witness {
        assert!(!v.holds);
        assert!(w.m >= params.n_prime && w.m <= 60);
        let full = hitmat::process::matrix_at(&field, p, None).unwrap();
        let rows = to_dense(&full);
        assert!(bfs_close_pair(&rows, w.m, params.low_degree_threshold(), &BTreeSet::new()));
        if w.m > params.n_prime {
            assert!(!bfs_close_pair(&rows, w.m - 1, params.low_degree_threshold(), &BTreeSet::new()));
        }
    } else {
        assert!(v.holds);
    }
}

#[test]
fn robust_parameters() {
    for (c, alpha_c) in [(0.6, 0.55), (0.75, 0.625), (2.0, 0.625)] {
        let q = RobustParams::new(1000, 0.01, c);
        assert!((q.alpha * q.c - alpha_c).abs() < 1e-12);
        assert!(q.alpha < 1.0 && q.gamma > 0.0);
        assert_eq!(q.n_prime, (q.alpha * 1000.0).ceil() as usize);
    }
    let q = RobustParams::new(1000, 0.01, 0.75);
    assert_eq!(q.k, ((1000f64).ln().ln() / 0.02).floor() as usize);
}

#[test]
fn identity_is_robust_and_dense_needs_weight_two() {
    let id = ZeroOneMatrix::identity(12);
    assert!(!is_b_dense(&id, 1));
    let params = RobustParams::with_alpha(12, 0.3, 0.75, 0.8);
    let v = is_n_robust(&id, &params, CheckMode::Exact, &SampleConfig::default()).unwrap();
    assert_eq!(v.robust(), Some(false));
    assert_eq!(v.rows_blocked.holds, Some(true));
    let j = ZeroOneMatrix::all_ones_off_diagonal(12);
    let v = is_n_robust(&j, &params, CheckMode::Exact, &SampleConfig::default()).unwrap();
    assert!(v.rows_dense && v.cols_dense);
    // rows of J - I are pairwise distinct but any three share most columns
    assert_eq!(v.rows_blocked.holds, Some(brute_blocked(&to_dense(&j), params.k.min(12))));
}

#[test]
fn b_out_of_range_is_an_error() {
    let id = ZeroOneMatrix::identity(4);
    let cfg = SampleConfig::default();
    assert!(is_b_blocked(&id, 5, None, CheckMode::Exact, &cfg).is_err());
    assert!(is_b_blocked(&id, 1, None, CheckMode::Exact, &cfg).is_err());
    assert!(is_b_blocked(&ZeroOneMatrix::identity(40), 10, None, CheckMode::Exact, &cfg).is_err());
}
