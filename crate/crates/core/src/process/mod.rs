//! The coupled matrix processes: thresholded uniform clocks, template
//! overrides, the hitting time of "no zero row and no zero column", and the
//! per-trial observables built on them.

mod field;
mod template;
mod trial;

use thiserror::Error;

pub use field::{Level, Model, UniformField, LEVEL_DENOMINATOR};
pub use template::{random_template, Side, Template, TemplateJson, TemplateViolation};
pub use trial::{
    hitting_trial, rank_equals_n_minus_z_trial, DkProbe, Probes, TrialResult,
};

use crate::matrix::{MatrixError, ZeroOneMatrix};

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("expected {expected} clocks, found {found}")]
    ClockCount { expected: usize, found: usize },
    #[error("unknown model {0:?} (expected \"asymmetric\" or \"symmetric\")")]
    UnknownModel(String),
    #[error("invalid template: {0}")]
    InvalidTemplate(TemplateViolation),
    #[error("the symmetric model requires a symmetric template")]
    AsymmetricTemplate,
    #[error("template is not permissible: its support is not inside the first {n_prime} indices")]
    NotPermissible { n_prime: usize },
    #[error("malformed template JSON: {0}")]
    TemplateJson(String),
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub(crate) fn check_template(
    template: Option<&Template>,
    n: usize,
    model: Model,
) -> Result<(), ProcessError> {
    match template.map(|t| t.validate(n, model)) {
        None | Some(Ok(())) => Ok(()),
        Some(Err(TemplateViolation::NotSymmetric)) => Err(ProcessError::AsymmetricTemplate),
        Some(Err(v)) => Err(ProcessError::InvalidTemplate(v)),
    }
}

pub(crate) fn check_probability(p: f64) -> Result<Level, ProcessError> {
    if (0.0..=1.0).contains(&p) {
        Ok(Level::from_prob(p))
    } else {
        Err(ProcessError::Probability(p))
    }
}

fn overlay(m: &mut ZeroOneMatrix, template: &Template) {
    let n = m.n();
    for (&i, set) in &template.plus {
        for j in 0..n {
            m.set(i, j, set.contains(&j));
        }
    }
    for (&j, set) in &template.minus {
        for i in 0..n {
            m.set(i, j, set.contains(&i));
        }
    }
}

/// The thresholded matrix at `level`, with the template's rows and columns
/// written over the random ones. Assumes the template was validated.
pub fn matrix_at_level(field: &UniformField, level: Level, template: Option<&Template>) -> ZeroOneMatrix {
    let n = field.n();
    let mut m = ZeroOneMatrix::zeros(n);
    match field.model() {
        Model::Asymmetric => {
            for i in 0..n {
                for j in 0..n {
                    if i != j && level.admits(field.clock(i, j)) {
                        m.set(i, j, true);
                    }
                }
            }
        }
        Model::Symmetric => {
            for i in 0..n {
                for j in i + 1..n {
                    if level.admits(field.clock(i, j)) {
                        m.set(i, j, true);
                        m.set(j, i, true);
                    }
                }
            }
        }
    }
    if let Some(t) = template {
        overlay(&mut m, t);
    }
    m
}

/// `R_{n,p}` / `Q_{n,p}` (optionally with a template) from the shared clocks.
pub fn matrix_at(
    field: &UniformField,
    p: f64,
    template: Option<&Template>,
) -> Result<ZeroOneMatrix, ProcessError> {
    let level = check_probability(p)?;
    check_template(template, field.n(), field.model())?;
    Ok(matrix_at_level(field, level, template))
}

/// `τ = inf{p : z(M_p) = 0}` as an exact level.
///
/// Each row outside `I^+` that no `S_j^-` covers becomes non-empty at its
/// smallest remaining clock; columns likewise. `τ` is the largest of those
/// arrival levels, `Level::ONE` if such a line has no random entries at all,
/// and `Level::ZERO` if the template fixes every line.
pub fn tau_zero(field: &UniformField, template: Option<&Template>) -> Level {
    let n = field.n();
    let empty = Template::default();
    let t = template.unwrap_or(&empty);
    let covered_rows = t.union_minus();
    let covered_cols = t.union_plus();
    let mut tau = Level::ZERO;

    for i in 0..n {
        if t.plus.contains_key(&i) || covered_rows.contains(&i) {
            continue;
        }
        let first = (0..n)
            .filter(|&j| j != i && !t.minus.contains_key(&j))
            .map(|j| field.clock(i, j))
            .min();
        match first {
            Some(c) => tau = tau.max(Level::of_clock(c)),
            None => return Level::ONE,
        }
    }
    for j in 0..n {
        if t.minus.contains_key(&j) || covered_cols.contains(&j) {
            continue;
        }
        let first = (0..n)
            .filter(|&i| i != j && !t.plus.contains_key(&i))
            .map(|i| field.clock(i, j))
            .min();
        match first {
            Some(c) => tau = tau.max(Level::of_clock(c)),
            None => return Level::ONE,
        }
    }
    tau
}

/// The event `D_K(p1, p_query)`: the rows that are zero at `p1` take their
/// out-neighbourhoods at `p_query`, the zero columns their in-neighbourhoods,
/// and the result is returned if it is a non-degenerate template of size at
/// most `k`.
pub fn extract_template_at(
    field: &UniformField,
    p1: Level,
    p_query: Level,
    k: usize,
) -> Option<Template> {
    let early = matrix_at_level(field, p1, None);
    let zero_rows = early.zero_rows();
    let zero_cols = early.zero_cols();
    if zero_rows.is_empty() && zero_cols.is_empty() {
        return None;
    }
    let late = matrix_at_level(field, p_query, None);
    let mut t = Template::default();
    for i in zero_rows {
        t.plus.insert(i, late.out_neighbours(i).into_iter().collect());
    }
    for j in zero_cols {
        t.minus.insert(j, late.in_neighbours(j).into_iter().collect());
    }
    if t.size() > k || t.validate(field.n(), Model::Asymmetric).is_err() {
        return None;
    }
    Some(t)
}

/// `c ln n / n`.
pub fn p_from_c(c: f64, n: usize) -> f64 {
    c * (n as f64).ln() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    const U: f64 = LEVEL_DENOMINATOR as f64;

    fn clock(x: f64) -> u64 {
        (x * U) as u64 - 1
    }

    #[test]
    fn degenerate_template_changes_nothing() {
        let f = UniformField::new(12, Model::Asymmetric, 3).unwrap();
        let t = Template::degenerate();
        assert_eq!(
            matrix_at(&f, 0.3, Some(&t)).unwrap(),
            matrix_at(&f, 0.3, None).unwrap()
        );
        assert_eq!(tau_zero(&f, Some(&t)), tau_zero(&f, None));
    }

    #[test]
    fn row_override_is_fixed_for_every_p() {
        let f = UniformField::new(3, Model::Asymmetric, 9).unwrap();
        let mut t = Template::default();
        t.plus.insert(0, BTreeSet::from([1]));
        for p in [0.0, 0.2, 0.7, 1.0] {
            let m = matrix_at(&f, p, Some(&t)).unwrap();
            assert_eq!(m.out_neighbours(0), vec![1]);
        }
    }

    #[test]
    fn full_probability_gives_j_minus_i() {
        for model in [Model::Asymmetric, Model::Symmetric] {
            let f = UniformField::new(6, model, 1).unwrap();
            assert_eq!(matrix_at(&f, 1.0, None).unwrap(), ZeroOneMatrix::all_ones_off_diagonal(6));
            assert_eq!(matrix_at(&f, 0.0, None).unwrap(), ZeroOneMatrix::zeros(6));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = UniformField::new(4, Model::Symmetric, 1).unwrap();
        let mut t = Template::default();
        t.plus.insert(0, BTreeSet::from([1]));
        assert!(matches!(matrix_at(&f, 0.5, Some(&t)), Err(ProcessError::AsymmetricTemplate)));
        assert!(matches!(matrix_at(&f, 1.5, None), Err(ProcessError::Probability(_))));
        let mut bad = Template::default();
        bad.plus.insert(0, BTreeSet::new());
        assert!(matches!(
            matrix_at(&f, 0.5, Some(&bad)),
            Err(ProcessError::InvalidTemplate(_))
        ));
    }

    #[test]
    fn tau_two_by_two() {
        let f = UniformField::from_clocks(2, Model::Asymmetric, vec![clock(0.3), clock(0.7)]).unwrap();
        assert_eq!(tau_zero(&f, None), Level::of_clock(clock(0.7)));
        assert!((tau_zero(&f, None).as_f64() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn tau_symmetric_three() {
        // pairs 12, 13, 23; per-vertex minima 0.2, 0.2, 0.5
        let clocks = vec![clock(0.2), clock(0.5), clock(0.9)];
        let f = UniformField::from_clocks(3, Model::Symmetric, clocks.clone()).unwrap();
        let tau = tau_zero(&f, None);
        assert_eq!(tau, Level::of_clock(clocks[1]));
        // brute force over candidate thresholds
        let mut candidates: Vec<Level> = clocks.iter().map(|&c| Level::of_clock(c)).collect();
        candidates.sort();
        let first = candidates
            .into_iter()
            .find(|&l| matrix_at_level(&f, l, None).z_value() == 0)
            .unwrap();
        assert_eq!(first, tau);
    }

    #[test]
    fn template_fixing_everything_gives_zero() {
        // n = 2: row 0 -> {1}, column 0 <- {1}
        let f = UniformField::new(2, Model::Asymmetric, 5).unwrap();
        let mut t = Template::default();
        t.plus.insert(0, BTreeSet::from([1]));
        t.minus.insert(0, BTreeSet::from([1]));
        assert_eq!(t.validate(2, Model::Asymmetric), Ok(()));
        assert_eq!(tau_zero(&f, Some(&t)), Level::ZERO);
    }

    #[test]
    fn line_that_can_never_fill_gives_one() {
        // Columns 0 and 1 are pinned to {1} and {0}; row 2's only random
        // entries lie in those columns, so row 2 is zero at every p.
        let f = UniformField::new(3, Model::Asymmetric, 5).unwrap();
        let mut t = Template::default();
        t.minus.insert(0, BTreeSet::from([1]));
        t.minus.insert(1, BTreeSet::from([0]));
        assert_eq!(t.validate(3, Model::Asymmetric), Ok(()));
        assert_eq!(tau_zero(&f, Some(&t)), Level::ONE);
        assert_eq!(matrix_at(&f, 1.0, Some(&t)).unwrap().zero_rows(), vec![2]);
    }

    #[test]
    fn extract_single_zero_row() {
        // n = 3 asymmetric, row 0 is empty at p1, gains {1} by p_query.
        // pair order: (0,1) (0,2) (1,0) (1,2) (2,0) (2,1)
        let clocks = vec![clock(0.6), clock(0.95), clock(0.1), clock(0.2), clock(0.3), clock(0.15)];
        let f = UniformField::from_clocks(3, Model::Asymmetric, clocks).unwrap();
        let p1 = Level::from_prob(0.5);
        let pq = Level::from_prob(0.7);
        let t = extract_template_at(&f, p1, pq, 3).unwrap();
        assert_eq!(t.plus.len(), 1);
        assert_eq!(t.plus[&0], BTreeSet::from([1]));
        assert!(t.minus.is_empty());
        assert_eq!(t.size(), 1);
        assert!(extract_template_at(&f, Level::from_prob(0.8), Level::from_prob(0.9), 3).is_none());
    }

    #[test]
    fn extract_rejects_intersecting_neighbourhoods() {
        // rows 0 and 1 both empty at p1, both point at column 2 by p_query
        // pair order: (0,1) (0,2) (1,0) (1,2) (2,0) (2,1)
        let clocks = vec![clock(0.9), clock(0.6), clock(0.9), clock(0.6), clock(0.1), clock(0.1)];
        let f = UniformField::from_clocks(3, Model::Asymmetric, clocks).unwrap();
        assert!(extract_template_at(&f, Level::from_prob(0.5), Level::from_prob(0.7), 5).is_none());
    }
}
