//! Exact largest atoms of linear, bilinear and quadratic forms in
//! independent Bernoulli(p) variables.
//!
//! Coefficients are rationals; they are scaled by the lcm of their
//! denominators so every outcome value is an `i64`. Outcomes are aggregated
//! by `(value, number of ones)`, and the probability of a value is
//! `sum count(w) * a^w (b - a)^(N - w) / b^N` for `p = a / b` and `N`
//! variables, computed in big integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LINEAR_CAP: usize = 24;
pub const BILINEAR_CAP: usize = 12;
pub const QUADRATIC_CAP: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoffordError {
    #[error("coefficient {index} is zero")]
    ZeroCoefficient { index: usize },
    #[error("{kind} forms are limited to k <= {cap}, got {k}")]
    TooLarge { kind: FormKind, k: usize, cap: usize },
    #[error("the form has no variables")]
    Empty,
    #[error("coefficient matrix is not square")]
    NotSquare,
    #[error("quadratic form is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("p = {0} is outside (0, 1/2]")]
    Probability(BigRational),
    #[error("scaled coefficients overflow 62 bits")]
    Overflow,
    #[error("cannot parse {0:?} as a rational")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Linear,
    Bilinear,
    Quadratic,
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormKind::Linear => "linear",
            FormKind::Bilinear => "bilinear",
            FormKind::Quadratic => "quadratic",
        })
    }
}

/// The largest atom of a form's distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomReport {
    pub form_kind: FormKind,
    pub k: usize,
    pub p: BigRational,
    pub sup_atom: BigRational,
    /// Every value attaining `sup_atom`, ascending.
    pub argmax_r: Vec<BigRational>,
    /// Number of distinct values.
    pub support_size: usize,
    /// Sum of all atoms; exactly one unless something is broken.
    pub total_mass: BigRational,
    /// Largest `l` such that at least `l` columns have `l` or more non-zero
    /// entries (matrix forms only).
    pub l: Option<usize>,
}

impl AtomReport {
    pub fn sup_atom_f64(&self) -> f64 {
        self.sup_atom.to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "form_kind": self.form_kind,
            "k": self.k,
            "p": self.p.to_string(),
            "sup_atom": self.sup_atom.to_string(),
            "sup_atom_f64": self.sup_atom_f64(),
            "argmax_r": self.argmax_r.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "support_size": self.support_size,
            "total_mass": self.total_mass.to_string(),
            "l": self.l,
        })
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, LoffordError> {
    let t = s.trim();
    let bad = || LoffordError::Parse(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(n, d))
    } else {
        BigInt::from_str(t).map(BigRational::from_integer).map_err(|_| bad())
    }
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn ints(xs: &[i64]) -> Vec<BigRational> {
    xs.iter().map(|&x| BigRational::from_integer(x.into())).collect()
}

pub fn int_matrix(rows: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    rows.iter().map(|r| ints(r)).collect()
}

/// `(value, ones, count)`, kept sorted by `(value, ones)` with unique keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    value: i64,
    ones: u32,
    count: u64,
}

fn compact(entries: &mut Vec<Entry>) {
    entries.sort_unstable_by_key(|e| (e.value, e.ones));
    let mut out: Vec<Entry> = Vec::with_capacity(entries.len());
    for e in entries.drain(..) {
        match out.last_mut() {
            Some(last) if last.value == e.value && last.ones == e.ones => last.count += e.count,
            _ => out.push(e),
        }
    }
    *entries = out;
}

/// Distribution of `sum c_i x_i` (zeros allowed) by merging shifted copies.
fn linear_entries(coeffs: &[i64]) -> Vec<Entry> {
    let mut cur = vec![Entry {
        value: 0,
        ones: 0,
        count: 1,
    }];
    for &c in coeffs {
        let shifted: Vec<Entry> = cur
            .iter()
            .map(|e| Entry {
                value: e.value + c,
                ones: e.ones + 1,
                count: e.count,
            })
            .collect();
        let mut merged: Vec<Entry> = Vec::with_capacity(cur.len() + shifted.len());
        let (mut a, mut b) = (cur.into_iter().peekable(), shifted.into_iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (Some(x), Some(y)) if (x.value, x.ones) <= (y.value, y.ones) => a.next(),
                (Some(_), Some(_)) => b.next(),
                (Some(_), None) => a.next(),
                (None, Some(_)) => b.next(),
                (None, None) => break,
            }
            .expect("peeked");
            match merged.last_mut() {
                Some(last) if (last.value, last.ones) == (next.value, next.ones) => {
                    last.count += next.count
                }
                _ => merged.push(next),
            }
        }
        cur = merged;
    }
    cur
}

/// Scales rationals to integers by the lcm of their denominators. Fails if
/// the sum of absolute scaled values reaches `2^62`.
fn integerize(xs: &[&BigRational]) -> Result<(Vec<i64>, BigInt), LoffordError> {
    let scale = xs
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut total = BigInt::zero();
    let mut out = Vec::with_capacity(xs.len());
    for x in xs {
        let v = x.numer() * (&scale / x.denom());
        total += v.abs();
        out.push(v.to_i64().ok_or(LoffordError::Overflow)?);
    }
    if total >= BigInt::from(1u64 << 62) {
        return Err(LoffordError::Overflow);
    }
    Ok((out, scale))
}

fn check_p(p: &BigRational) -> Result<(), LoffordError> {
    if p.is_positive() && *p <= ratio(1, 2) {
        Ok(())
    } else {
        Err(LoffordError::Probability(p.clone()))
    }
}

struct Aggregated {
    /// `(value, numerator)` with common denominator `b^N`.
    atoms: Vec<(i64, BigUint)>,
    denominator: BigUint,
}

fn aggregate(mut entries: Vec<Entry>, vars: usize, p: &BigRational) -> Aggregated {
    compact(&mut entries);
    let a = p.numer().to_biguint().expect("p > 0");
    let b = p.denom().to_biguint().expect("denominator > 0");
    let q = &b - &a;
    let weight: Vec<BigUint> = (0..=vars)
        .map(|w| a.pow(w as u32) * q.pow((vars - w) as u32))
        .collect();
    let mut atoms: Vec<(i64, BigUint)> = Vec::new();
    for e in entries {
        let mass = &weight[e.ones as usize] * e.count;
        match atoms.last_mut() {
            Some((v, m)) if *v == e.value => *m += mass,
            _ => atoms.push((e.value, mass)),
        }
    }
    Aggregated {
        atoms,
        denominator: b.pow(vars as u32),
    }
}

fn report(
    agg: Aggregated,
    scale: &BigInt,
    form_kind: FormKind,
    k: usize,
    p: &BigRational,
    l: Option<usize>,
) -> AtomReport {
    let den = BigInt::from(agg.denominator.clone());
    let best = agg.atoms.iter().map(|(_, m)| m).max().expect("non-empty").clone();
    let argmax_r = agg
        .atoms
        .iter()
        .filter(|(_, m)| *m == best)
        .map(|(v, _)| BigRational::new(BigInt::from(*v), scale.clone()))
        .collect();
    let total: BigUint = agg.atoms.iter().map(|(_, m)| m).sum();
    AtomReport {
        form_kind,
        k,
        p: p.clone(),
        sup_atom: BigRational::new(best.into(), den.clone()),
        argmax_r,
        support_size: agg.atoms.len(),
        total_mass: BigRational::new(total.into(), den),
        l,
    }
}

/// Largest `l` such that at least `l` columns have at least `l` non-zero
/// entries.
pub fn l_hypothesis(a: &[Vec<BigRational>]) -> usize {
    let k = a.len();
    let mut col_counts: Vec<usize> = (0..k)
        .map(|j| a.iter().filter(|row| !row[j].is_zero()).count())
        .collect();
    col_counts.sort_unstable_by(|x, y| y.cmp(x));
    col_counts
        .iter()
        .enumerate()
        .take_while(|(idx, &c)| c > *idx)
        .count()
}

fn check_square(a: &[Vec<BigRational>]) -> Result<usize, LoffordError> {
    let k = a.len();
    if k == 0 {
        return Err(LoffordError::Empty);
    }
    if a.iter().any(|row| row.len() != k) {
        return Err(LoffordError::NotSquare);
    }
    Ok(k)
}

fn flat_ints(a: &[Vec<BigRational>]) -> Result<(Vec<Vec<i64>>, BigInt), LoffordError> {
    let k = a.len();
    let refs: Vec<&BigRational> = a.iter().flatten().collect();
    let (flat, scale) = integerize(&refs)?;
    Ok((flat.chunks(k).map(<[i64]>::to_vec).collect(), scale))
}

/// `sup_r P(sum a_i x_i = r)` with every `a_i != 0`.
pub fn linear_atom_sup(a: &[BigRational], p: &BigRational) -> Result<AtomReport, LoffordError> {
    let agg = linear_distribution(a, p)?;
    let (_, scale) = integerize(&a.iter().collect::<Vec<_>>())?;
    Ok(report(agg, &scale, FormKind::Linear, a.len(), p, None))
}

fn linear_distribution(a: &[BigRational], p: &BigRational) -> Result<Aggregated, LoffordError> {
    check_p(p)?;
    if a.is_empty() {
        return Err(LoffordError::Empty);
    }
    if a.len() > LINEAR_CAP {
        return Err(LoffordError::TooLarge {
            kind: FormKind::Linear,
            k: a.len(),
            cap: LINEAR_CAP,
        });
    }
    if let Some(index) = a.iter().position(Zero::is_zero) {
        return Err(LoffordError::ZeroCoefficient { index });
    }
    let (c, _) = integerize(&a.iter().collect::<Vec<_>>())?;
    Ok(aggregate(linear_entries(&c), a.len(), p))
}

/// `sup_r P(sum a_ij x_i y_j = r)` over independent `x`, `y`.
pub fn bilinear_atom_sup(a: &[Vec<BigRational>], p: &BigRational) -> Result<AtomReport, LoffordError> {
    check_p(p)?;
    let k = check_square(a)?;
    if k > BILINEAR_CAP {
        return Err(LoffordError::TooLarge {
            kind: FormKind::Bilinear,
            k,
            cap: BILINEAR_CAP,
        });
    }
    let (m, scale) = flat_ints(a)?;
    // Walk x in Gray-code order, keeping the column sums c_j = sum_i a_ij x_i;
    // for each x the form is linear in y with coefficients c.
    let mut col = vec![0i64; k];
    let mut x_ones = 0u32;
    let mut x = 0u32;
    let mut entries = Vec::new();
    for step in 0..(1u32 << k) {
        if step > 0 {
            let t = step.trailing_zeros() as usize;
            x ^= 1 << t;
            let sign = if x >> t & 1 == 1 { 1 } else { -1 };
            x_ones = (x_ones as i32 + sign) as u32;
            for (cj, &a_tj) in col.iter_mut().zip(&m[t]) {
                *cj += sign as i64 * a_tj;
            }
        }
        entries.extend(linear_entries(&col).into_iter().map(|e| Entry {
            ones: e.ones + x_ones,
            ..e
        }));
        if entries.len() > 1 << 22 {
            compact(&mut entries);
        }
    }
    let agg = aggregate(entries, 2 * k, p);
    Ok(report(agg, &scale, FormKind::Bilinear, k, p, Some(l_hypothesis(a))))
}

/// `sup_r P(sum a_ij x_i x_j = r)` for symmetric `a`.
pub fn quadratic_atom_sup(a: &[Vec<BigRational>], p: &BigRational) -> Result<AtomReport, LoffordError> {
    check_p(p)?;
    let k = check_square(a)?;
    if k > QUADRATIC_CAP {
        return Err(LoffordError::TooLarge {
            kind: FormKind::Quadratic,
            k,
            cap: QUADRATIC_CAP,
        });
    }
    for i in 0..k {
        for j in i + 1..k {
            if a[i][j] != a[j][i] {
                return Err(LoffordError::NotSymmetric { i, j });
            }
        }
    }
    let (m, scale) = flat_ints(a)?;
    // Gray code again; s_t = sum_{j != t} a_tj x_j, so switching x_t on adds
    // a_tt + 2 s_t to the form.
    let mut s = vec![0i64; k];
    let (mut x, mut ones, mut value) = (0u32, 0u32, 0i64);
    let mut entries = Vec::with_capacity(1 << k);
    entries.push(Entry {
        value: 0,
        ones: 0,
        count: 1,
    });
    for step in 1..(1u32 << k) {
        let t = step.trailing_zeros() as usize;
        x ^= 1 << t;
        let delta = m[t][t] + 2 * s[t];
        if x >> t & 1 == 1 {
            value += delta;
            ones += 1;
            for (u, su) in s.iter_mut().enumerate() {
                if u != t {
                    *su += m[u][t];
                }
            }
        } else {
            value -= delta;
            ones -= 1;
            for (u, su) in s.iter_mut().enumerate() {
                if u != t {
                    *su -= m[u][t];
                }
            }
        }
        entries.push(Entry {
            value,
            ones,
            count: 1,
        });
    }
    let agg = aggregate(entries, k, p);
    Ok(report(agg, &scale, FormKind::Quadratic, k, p, Some(l_hypothesis(a))))
}

/// All atoms `(r, P(form = r))` of a linear form, ascending in `r`.
pub fn linear_atoms(a: &[BigRational], p: &BigRational) -> Result<Vec<(BigRational, BigRational)>, LoffordError> {
    let agg = linear_distribution(a, p)?;
    let (_, scale) = integerize(&a.iter().collect::<Vec<_>>())?;
    let den = BigInt::from(agg.denominator);
    Ok(agg
        .atoms
        .into_iter()
        .map(|(v, m)| {
            (
                BigRational::new(v.into(), scale.clone()),
                BigRational::new(m.into(), den.clone()),
            )
        })
        .collect())
}

/// The all-ones member of a family at size `k`.
pub fn all_ones_atom_sup(kind: FormKind, k: usize, p: &BigRational) -> Result<AtomReport, LoffordError> {
    let one = BigRational::one();
    match kind {
        FormKind::Linear => linear_atom_sup(&vec![one; k], p),
        FormKind::Bilinear => bilinear_atom_sup(&vec![vec![one; k]; k], p),
        FormKind::Quadratic => quadratic_atom_sup(&vec![vec![one; k]; k], p),
    }
}

/// `(k, sup atom)` for the all-ones family at each size. For the matrix
/// families `l = k`.
pub fn decay_profile(
    kind: FormKind,
    ks: &[usize],
    p: &BigRational,
) -> Result<Vec<(usize, BigRational)>, LoffordError> {
    ks.iter()
        .map(|&k| all_ones_atom_sup(kind, k, p).map(|r| (k, r.sup_atom)))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(usize, BigRational)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|(k, y)| ((*k as f64).ln(), y.to_f64().unwrap_or(f64::NAN).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// A form as read from JSON:
/// `{"kind": "linear", "p": "1/2", "coefficients": [1, "2/3"]}` or
/// `{"kind": "bilinear" | "quadratic", "p": "1/4", "matrix": [[...], ...]}`.
#[derive(Debug, Clone, Deserialize)]
pub struct FormSpec {
    pub kind: FormKind,
    pub p: Number,
    #[serde(default)]
    pub coefficients: Vec<Number>,
    #[serde(default)]
    pub matrix: Vec<Vec<Number>>,
}

/// A JSON integer or a string such as `"-3/7"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    pub fn to_rational(&self) -> Result<BigRational, LoffordError> {
        match self {
            Number::Int(v) => Ok(BigRational::from_integer((*v).into())),
            Number::Text(s) => parse_rational(s),
        }
    }
}

impl FormSpec {
    pub fn evaluate(&self) -> Result<AtomReport, LoffordError> {
        let p = self.p.to_rational()?;
        let matrix = || -> Result<Vec<Vec<BigRational>>, LoffordError> {
            self.matrix
                .iter()
                .map(|row| row.iter().map(Number::to_rational).collect())
                .collect()
        };
        match self.kind {
            FormKind::Linear => {
                let a: Vec<BigRational> = self
                    .coefficients
                    .iter()
                    .map(Number::to_rational)
                    .collect::<Result<_, _>>()?;
                linear_atom_sup(&a, &p)
            }
            FormKind::Bilinear => bilinear_atom_sup(&matrix()?, &p),
            FormKind::Quadratic => quadratic_atom_sup(&matrix()?, &p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> BigRational {
        ratio(1, 2)
    }

    #[test]
    fn linear_examples() {
        let r = linear_atom_sup(&ints(&[1]), &half()).unwrap();
        assert_eq!(r.sup_atom, half());
        let r = linear_atom_sup(&ints(&[1, 1]), &half()).unwrap();
        assert_eq!(r.sup_atom, half());
        assert_eq!(r.argmax_r, vec![ratio(1, 1)]);
        let p = ratio(1, 3);
        let r = linear_atom_sup(&ints(&[1, 2, 4, 8, 16, 32]), &p).unwrap();
        assert_eq!(r.sup_atom, ratio(64, 729));
        assert_eq!(r.argmax_r, vec![BigRational::zero()]);
        assert_eq!(r.support_size, 64);
        assert_eq!(r.total_mass, BigRational::one());
    }

    #[test]
    fn linear_errors() {
        assert_eq!(
            linear_atom_sup(&ints(&[1, 0]), &half()),
            Err(LoffordError::ZeroCoefficient { index: 1 })
        );
        assert!(matches!(
            linear_atom_sup(&ints(&[1; 25]), &half()),
            Err(LoffordError::TooLarge { .. })
        ));
        assert!(matches!(
            linear_atom_sup(&ints(&[1]), &ratio(3, 4)),
            Err(LoffordError::Probability(_))
        ));
    }

    #[test]
    fn rational_coefficients_relocate_atoms() {
        let r = linear_atom_sup(&[ratio(1, 3), ratio(1, 3)], &half()).unwrap();
        assert_eq!(r.argmax_r, vec![ratio(1, 3)]);
        assert_eq!(r.sup_atom, half());
    }

    #[test]
    fn bilinear_examples() {
        let r = bilinear_atom_sup(&int_matrix(&[vec![1]]), &half()).unwrap();
        assert_eq!((r.sup_atom.clone(), r.argmax_r.clone()), (ratio(3, 4), vec![ratio(0, 1)]));
        let r = bilinear_atom_sup(&int_matrix(&[vec![1, 0], vec![0, 1]]), &half()).unwrap();
        assert_eq!(r.sup_atom, ratio(9, 16));
        assert_eq!(r.l, Some(1));
        let r = bilinear_atom_sup(&int_matrix(&[vec![1, 1], vec![1, 1]]), &half()).unwrap();
        assert_eq!(r.sup_atom, ratio(7, 16));
        assert_eq!(r.l, Some(2));
        assert_eq!(r.total_mass, BigRational::one());
    }

    #[test]
    fn quadratic_examples() {
        let r = quadratic_atom_sup(&int_matrix(&[vec![1]]), &half()).unwrap();
        assert_eq!(r.sup_atom, half());
        let r = quadratic_atom_sup(&int_matrix(&[vec![1, 0], vec![0, 1]]), &half()).unwrap();
        assert_eq!(r.sup_atom, half());
        assert_eq!(
            quadratic_atom_sup(&int_matrix(&[vec![0, 1], vec![2, 0]]), &half()),
            Err(LoffordError::NotSymmetric { i: 0, j: 1 })
        );
    }

    #[test]
    fn l_hypothesis_counts() {
        assert_eq!(l_hypothesis(&int_matrix(&[vec![0, 0], vec![0, 0]])), 0);
        assert_eq!(l_hypothesis(&int_matrix(&vec![vec![1; 5]; 5])), 5);
        // three columns with 3, 3, 1 non-zeros
        let a = int_matrix(&[vec![1, 1, 0], vec![1, 1, 0], vec![1, 1, 1]]);
        assert_eq!(l_hypothesis(&a), 2);
    }

    #[test]
    fn form_spec_json() {
        let spec: FormSpec =
            serde_json::from_str(r#"{"kind":"bilinear","p":"1/2","matrix":[[1,0],[0,"1"]]}"#).unwrap();
        assert_eq!(spec.evaluate().unwrap().sup_atom, ratio(9, 16));
        let spec: FormSpec =
            serde_json::from_str(r#"{"kind":"linear","p":"1/2","coefficients":[1,"-1/2"]}"#).unwrap();
        let r = spec.evaluate().unwrap();
        assert_eq!(r.support_size, 4);
        assert_eq!(r.to_json()["sup_atom"], "1/4");
        assert!(parse_rational("1/0").is_err());
    }
}
