use std::time::Instant;

use serde::Serialize;

use super::{
    check_probability, check_template, extract_template_at, matrix_at_level, tau_zero, Level,
    Model, ProcessError, Template, UniformField,
};
use crate::matrix::{deficiency_from_parts, rank_exact, rank_exact_with, RankOptions};

/// Optional, more expensive observables of a hitting trial.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Probes {
    /// Record whether `D_K(p1, τ)` holds.
    pub dk: Option<DkProbe>,
    /// Scan arrivals from `τ` onward and record the first level at which the
    /// matrix is non-singular.
    pub first_invertible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DkProbe {
    pub p1: f64,
    pub k: usize,
}

/// Observables of one sample of the process at its hitting time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialResult {
    pub seed: u64,
    pub n: usize,
    pub model: Model,
    /// `τ` as `tau.numerator() / 2^64`.
    pub tau: Level,
    /// `z` one level before `τ`, i.e. just before the last line fills.
    pub z_before_tau: usize,
    pub singular_at_tau: bool,
    pub y_at_tau: usize,
    pub rank_at_tau: usize,
    pub template_event_dk: Option<bool>,
    pub tau_invertible: Option<Level>,
    pub runtime_ms: u64,
}

impl TrialResult {
    /// The result with timing cleared, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            runtime_ms: 0,
            ..self.clone()
        }
    }
}

/// Samples the process, stops it at `τ` (inclusive: the arriving entry is
/// present) and measures rank and deficiency there.
pub fn hitting_trial(
    n: usize,
    model: Model,
    seed: u64,
    template: Option<&Template>,
    probes: Probes,
) -> Result<TrialResult, ProcessError> {
    let start = Instant::now();
    check_template(template, n, model)?;
    let field = UniformField::new(n, model, seed)?;
    let tau = tau_zero(&field, template);
    let at_tau = matrix_at_level(&field, tau, template);
    let rank = rank_exact(&at_tau).rank;
    let y = deficiency_from_parts(n, rank, at_tau.z_value())?;
    let z_before_tau = if tau > Level::ZERO {
        matrix_at_level(&field, tau.predecessor(), template).z_value()
    } else {
        0
    };

    let template_event_dk = probes.dk.map(|dk| {
        extract_template_at(&field, Level::from_prob(dk.p1), tau, dk.k).is_some()
    });
    let tau_invertible = if probes.first_invertible {
        first_invertible(&field, tau, template, rank == n)
    } else {
        None
    };

    Ok(TrialResult {
        seed,
        n,
        model,
        tau,
        z_before_tau,
        singular_at_tau: rank < n,
        y_at_tau: y,
        rank_at_tau: rank,
        template_event_dk,
        tau_invertible,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Non-singularity is not monotone in `p`, so this walks the arrivals in
/// clock order from `τ` and re-checks the rank after each distinct clock
/// value. Nothing below `τ` can be non-singular (a zero line remains).
fn first_invertible(
    field: &UniformField,
    tau: Level,
    template: Option<&Template>,
    invertible_at_tau: bool,
) -> Option<Level> {
    if invertible_at_tau {
        return Some(tau);
    }
    let n = field.n();
    let opts = RankOptions {
        oracle_max_n: 0,
        ..RankOptions::default()
    };
    let arrivals = field.arrivals();
    let mut idx = arrivals.partition_point(|&(c, _, _)| tau.admits(c));
    while idx < arrivals.len() {
        let level = Level::of_clock(arrivals[idx].0);
        while idx < arrivals.len() && level.admits(arrivals[idx].0) {
            idx += 1;
        }
        let m = matrix_at_level(field, level, template);
        if rank_exact_with(&m, &opts).rank == n {
            return Some(level);
        }
    }
    None
}

/// Whether `rank = n - z` (equivalently `Y = 0`) for the matrix at `p`.
pub fn rank_equals_n_minus_z_trial(
    n: usize,
    p: f64,
    model: Model,
    seed: u64,
    template: Option<&Template>,
) -> Result<bool, ProcessError> {
    let level = check_probability(p)?;
    check_template(template, n, model)?;
    let field = UniformField::new(n, model, seed)?;
    let m = matrix_at_level(&field, level, template);
    let y = deficiency_from_parts(n, rank_exact(&m).rank, m.z_value())?;
    Ok(y == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ZeroOneMatrix;

    #[test]
    fn hitting_trial_is_deterministic() {
        let probes = Probes {
            dk: Some(DkProbe { p1: 0.02, k: 4 }),
            first_invertible: true,
        };
        let a = hitting_trial(40, Model::Asymmetric, 17, None, probes).unwrap();
        let b = hitting_trial(40, Model::Asymmetric, 17, None, probes).unwrap();
        assert_eq!(a.without_timing(), b.without_timing());
        assert_eq!(a.singular_at_tau, a.rank_at_tau < a.n);
        assert!(a.tau > Level::ZERO && a.tau <= Level::ONE);
        assert!(a.z_before_tau >= 1);
        if let Some(inv) = a.tau_invertible {
            assert!(inv >= a.tau);
        }
    }

    #[test]
    fn first_invertible_is_exact() {
        for seed in 0..30 {
            let r = hitting_trial(
                8,
                Model::Symmetric,
                seed,
                None,
                Probes {
                    first_invertible: true,
                    ..Probes::default()
                },
            )
            .unwrap();
            let inv = r.tau_invertible.expect("J - I is invertible for n = 8");
            let field = UniformField::new(8, Model::Symmetric, seed).unwrap();
            let full = |l: Level| crate::matrix::bareiss_rank(&matrix_at_level(&field, l, None)) == 8;
            assert!(full(inv));
            for (c, _, _) in field.arrivals() {
                let l = Level::of_clock(c);
                if l < inv {
                    assert!(!full(l));
                }
            }
        }
    }

    #[test]
    fn all_ones_and_all_zero_extremes() {
        for n in 2..=8 {
            assert!(rank_equals_n_minus_z_trial(n, 1.0, Model::Asymmetric, 1, None).unwrap());
            assert!(rank_equals_n_minus_z_trial(n, 0.0, Model::Asymmetric, 1, None).unwrap());
            assert_eq!(
                crate::matrix::bareiss_rank(&ZeroOneMatrix::all_ones_off_diagonal(n)),
                n
            );
        }
    }
}
