mod common;

use std::collections::BTreeMap;

use common::binomial_mode_half;
use hitmat::lofford::{
    all_ones_atom_sup, bilinear_atom_sup, decay_profile, int_matrix, ints, linear_atom_sup,
    linear_atoms, loglog_slope, quadratic_atom_sup, ratio, FormKind, LINEAR_CAP,
};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn pow(x: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// Largest atom by enumerating every 0-1 assignment of `bits` variables.
fn brute_sup(bits: usize, p: &BigRational, value: impl Fn(u32) -> BigRational) -> BigRational {
    let q = BigRational::one() - p;
    let mut atoms: BTreeMap<BigRational, BigRational> = BTreeMap::new();
    for x in 0..(1u32 << bits) {
        let w = x.count_ones() as usize;
        let mass = pow(p, w) * pow(&q, bits - w);
        *atoms.entry(value(x)).or_insert_with(BigRational::zero) += mass;
    }
    let total: BigRational = atoms.values().cloned().sum();
    assert!(total.is_one());
    atoms.into_values().max().unwrap()
}

fn bit(x: u32, i: usize) -> bool {
    x >> i & 1 == 1
}

fn arb_p() -> impl Strategy<Value = BigRational> {
    (1i64..=8).prop_flat_map(|den| (1..=den).prop_map(move |num| ratio(num, 2 * den)))
}

fn nonzero() -> impl Strategy<Value = i64> {
    prop_oneof![-6i64..=-1, 1i64..=6]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn linear_matches_enumeration(c in proptest::collection::vec(nonzero(), 1..11), p in arb_p()) {
        let a = ints(&c);
        let got = linear_atom_sup(&a, &p).unwrap();
        let want = brute_sup(c.len(), &p, |x| {
            (0..c.len()).filter(|&i| bit(x, i)).map(|i| a[i].clone()).sum()
        });
        prop_assert_eq!(&got.sup_atom, &want);
        prop_assert!(got.total_mass.is_one());
        let atoms = linear_atoms(&a, &p).unwrap();
        prop_assert_eq!(atoms.len(), got.support_size);
        prop_assert!(atoms.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn bilinear_matches_enumeration(k in 1usize..4, cells in proptest::collection::vec(-3i64..=3, 16), p in arb_p()) {
        let rows: Vec<Vec<i64>> = (0..k).map(|i| cells[i * 4..i * 4 + k].to_vec()).collect();
        let a = int_matrix(&rows);
        let got = bilinear_atom_sup(&a, &p).unwrap();
        let want = brute_sup(2 * k, &p, |xy| {
            let mut s = BigRational::zero();
            for i in 0..k {
                for j in 0..k {
                    if bit(xy, i) && bit(xy, k + j) {
                        s += &a[i][j];
                    }
                }
            }
            s
        });
        prop_assert_eq!(&got.sup_atom, &want);
        prop_assert!(got.total_mass.is_one());
    }

    #[test]
    fn quadratic_matches_enumeration(k in 1usize..8, cells in proptest::collection::vec(-3i64..=3, 64), p in arb_p()) {
        let rows: Vec<Vec<i64>> = (0..k)
            .map(|i| (0..k).map(|j| cells[i.min(j) * 8 + i.max(j)]).collect())
            .collect();
        let a = int_matrix(&rows);
        let got = quadratic_atom_sup(&a, &p).unwrap();
        let want = brute_sup(k, &p, |x| {
            let mut s = BigRational::zero();
            for i in 0..k {
                for j in 0..k {
                    if bit(x, i) && bit(x, j) {
                        s += &a[i][j];
                    }
                }
            }
            s
        });
        prop_assert_eq!(&got.sup_atom, &want);
    }

    #[test]
    fn invariant_under_permutation_and_scaling(
        c in proptest::collection::vec(nonzero(), 2..12),
        shift in 0usize..12,
        num in nonzero(),
        den in 1i64..7,
        p in arb_p(),
    ) {
        let a = ints(&c);
        let base = linear_atom_sup(&a, &p).unwrap().sup_atom;
        let mut rotated = a.clone();
        rotated.rotate_left(shift % a.len());
        prop_assert_eq!(&linear_atom_sup(&rotated, &p).unwrap().sup_atom, &base);
        let s = ratio(num, den);
        let scaled: Vec<BigRational> = a.iter().map(|v| v * &s).collect();
        prop_assert_eq!(&linear_atom_sup(&scaled, &p).unwrap().sup_atom, &base);
    }

    #[test]
    fn quadratic_invariant_under_relabelling(k in 2usize..9, cells in proptest::collection::vec(-2i64..=2, 81), shift in 1usize..9) {
        let rows: Vec<Vec<i64>> = (0..k)
            .map(|i| (0..k).map(|j| cells[i.min(j) * 9 + i.max(j)]).collect())
            .collect();
        let perm: Vec<usize> = (0..k).map(|i| (i + shift) % k).collect();
        let permuted: Vec<Vec<i64>> = (0..k)
            .map(|i| (0..k).map(|j| rows[perm[i]][perm[j]]).collect())
            .collect();
        let half = ratio(1, 2);
        prop_assert_eq!(
            quadratic_atom_sup(&int_matrix(&rows), &half).unwrap().sup_atom,
            quadratic_atom_sup(&int_matrix(&permuted), &half).unwrap().sup_atom
        );
    }
}

#[test]
fn all_ones_linear_is_central_binomial() {
    let half = ratio(1, 2);
    for k in 1..=LINEAR_CAP {
        let r = all_ones_atom_sup(FormKind::Linear, k, &half).unwrap();
        assert_eq!(r.sup_atom, binomial_mode_half(k), "k = {k}");
        // sqrt(k) * sup stays bounded; its limit is sqrt(2 / pi)
        let scaled = (k as f64).sqrt() * r.sup_atom_f64();
        assert!(scaled >= 0.5 && scaled <= 1.0, "k = {k}: {scaled}");
    }
}

#[test]
fn known_values() {
    let half = ratio(1, 2);
    assert_eq!(linear_atom_sup(&ints(&[1]), &half).unwrap().sup_atom, ratio(1, 2));
    assert_eq!(linear_atom_sup(&ints(&[1, 2, 4]), &half).unwrap().sup_atom, ratio(1, 8));
    let id = int_matrix(&[vec![1, 0], vec![0, 1]]);
    assert_eq!(bilinear_atom_sup(&id, &half).unwrap().sup_atom, ratio(9, 16));
    let r = quadratic_atom_sup(&int_matrix(&[vec![1, 1], vec![1, 1]]), &half).unwrap();
    // (x1 + x2)^2 is 1 with probability 1/2
    assert_eq!(r.sup_atom, ratio(1, 2));
    assert_eq!(r.l, Some(2));
}

#[test]
fn all_ones_quadratic_is_never_steeper_than_linear() {
    let half = ratio(1, 2);
    let ks = [8, 12, 16, 20];
    let lin = loglog_slope(&decay_profile(FormKind::Linear, &ks, &half).unwrap());
    let quad = loglog_slope(&decay_profile(FormKind::Quadratic, &ks, &half).unwrap());
    assert!(quad >= lin - 1e-9, "quadratic {quad} linear {lin}");
    assert!((-0.6..=-0.4).contains(&lin));
}

#[test]
fn rejects_bad_input() {
    let half = ratio(1, 2);
    assert!(linear_atom_sup(&ints(&[1, 0]), &half).is_err());
    assert!(linear_atom_sup(&ints(&[]), &half).is_err());
    assert!(linear_atom_sup(&ints(&[1]), &ratio(3, 4)).is_err());
    assert!(linear_atom_sup(&ints(&[1]), &ratio(0, 1)).is_err());
    assert!(linear_atom_sup(&ints(&vec![1; LINEAR_CAP + 1]), &half).is_err());
    assert!(quadratic_atom_sup(&int_matrix(&[vec![1, 2], vec![0, 1]]), &half).is_err());
    assert!(bilinear_atom_sup(&int_matrix(&[vec![1, 2]]), &half).is_err());
}
