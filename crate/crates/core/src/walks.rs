//! Biased simple random walks, and the deficiency sequence along the leading
//! minors `R[n'], ..., R[n]` of a single sample.

use std::io::Write;

use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{deficiency_from_parts, rank_exact, MatrixError};
use crate::process::{
    matrix_at_level, Level, Model, ProcessError, Template, UniformField,
};
use crate::rng::{derive_key, draw, mix64, probability_threshold};
use crate::stats::{MeanEstimate, Proportion};
use crate::structure::RobustParams;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("beta = {0} is outside [0, 1]")]
    BetaRange(f64),
    #[error("E H is infinite for beta = {0} >= 1/2")]
    InfiniteMean(Rational64),
    #[error("beta = {0} is negative")]
    NegativeBeta(Rational64),
    #[error("deficiency identity fails between m = {m} and m + 1")]
    Identity { m: usize },
    #[error("rank increment {delta} at m = {m} is outside 0..=2")]
    RankStep { m: usize, delta: i64 },
    #[error("|dY| = {dy} > 1 at m = {m} although z dropped by {dz} <= 1")]
    StepBound { m: usize, dy: i64, dz: i64 },
    #[error("no traces given")]
    Empty,
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub beta: f64,
    pub length: usize,
    pub seed: u64,
}

impl WalkParams {
    pub fn new(beta: f64, length: usize, seed: u64) -> Result<Self, WalkError> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(WalkError::BetaRange(beta));
        }
        Ok(Self { beta, length, seed })
    }
}

/// Step `k` (0-based) of the walk keyed by `key`: `+1` with probability `beta`.
#[inline]
fn step(key: u64, k: u64, threshold: Option<u64>) -> i64 {
    match threshold {
        None => 1,
        Some(t) if draw(key, k) < t => 1,
        Some(_) => -1,
    }
}

/// `S_0 = 0, S_1, ..., S_length`.
pub fn srw_trace(params: &WalkParams) -> Vec<i64> {
    let key = mix64(params.seed);
    let t = probability_threshold(params.beta);
    let mut out = Vec::with_capacity(params.length + 1);
    let mut s = 0i64;
    out.push(s);
    for k in 0..params.length as u64 {
        s += step(key, k, t);
        out.push(s);
    }
    out
}

/// `H = |{k : S_k >= 1}|` over the indices present in the trace.
pub fn h_statistic(trace: &[i64]) -> usize {
    trace.iter().filter(|&&s| s >= 1).count()
}

/// `D_k = S_k - min_{i <= k} S_i`.
pub fn reflected_gap(trace: &[i64]) -> Vec<i64> {
    let mut min = i64::MAX;
    trace
        .iter()
        .map(|&s| {
            min = min.min(s);
            s - min
        })
        .collect()
}

/// The closed form `beta / (1 - beta)^2`, refused for `beta >= 1/2`.
///
/// This is an upper bound for `P(D_k > 0)` (the stationary value is
/// `beta / (1 - beta)`), but it is not the mean of `H`: summing the Green's
/// function over the positive half-line gives [`mean_h`] instead, which
/// exceeds it by the factor `(1 - beta)^2 / (1 - 2 beta)^2`.
pub fn expected_h(beta: Rational64) -> Result<Rational64, WalkError> {
    if beta < Rational64::from_integer(0) {
        return Err(WalkError::NegativeBeta(beta));
    }
    if beta >= Rational64::new(1, 2) {
        return Err(WalkError::InfiniteMean(beta));
    }
    let q = Rational64::from_integer(1) - beta;
    Ok(beta / (q * q))
}

pub fn expected_h_f64(beta: f64) -> f64 {
    beta / ((1.0 - beta) * (1.0 - beta))
}

/// `E H = beta / (1 - 2 beta)^2` for `beta < 1/2`: the walk reaches level
/// `j >= 1` with probability `(beta / (1 - beta))^j` and then spends
/// `1 / (1 - 2 beta)` steps there on average.
pub fn mean_h(beta: Rational64) -> Result<Rational64, WalkError> {
    expected_h(beta)?;
    let q = Rational64::from_integer(1) - beta * 2;
    Ok(beta / (q * q))
}

pub fn mean_h_f64(beta: f64) -> f64 {
    beta / ((1.0 - 2.0 * beta) * (1.0 - 2.0 * beta))
}

/// What a streamed walk reports without storing its path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkSummary {
    pub h: u64,
    pub final_position: i64,
    /// `D_length`.
    pub final_gap: i64,
}

/// The same walk as [`srw_trace`], summarized in constant memory.
pub fn walk_summary(params: &WalkParams) -> WalkSummary {
    let key = mix64(params.seed);
    let t = probability_threshold(params.beta);
    let (mut s, mut min, mut h) = (0i64, 0i64, 0u64);
    for k in 0..params.length as u64 {
        s += step(key, k, t);
        min = min.min(s);
        h += (s >= 1) as u64;
    }
    WalkSummary {
        h,
        final_position: s,
        final_gap: s - min,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HEstimate {
    pub beta: f64,
    pub length: usize,
    pub h: MeanEstimate,
    /// Fraction of walks with `D_length > 0`.
    pub gap_positive: Proportion,
}

/// Monte Carlo over `walks` independent walks; walk `i` uses seed
/// `derive_key(seed, i)`. The result does not depend on the thread count.
///
/// Truncation at `length` under-counts `H` by at most the expected number of
/// visits to `[1, inf)` after `length`, which for `beta <= 1/3` and
/// `length = 10^4` is far below `10^-6` (the walk has drift `2 beta - 1`).
pub fn h_monte_carlo(beta: f64, length: usize, walks: usize, seed: u64) -> Result<HEstimate, WalkError> {
    WalkParams::new(beta, length, seed)?;
    let summaries: Vec<WalkSummary> = (0..walks as u64)
        .into_par_iter()
        .map(|i| walk_summary(&WalkParams { beta, length, seed: derive_key(seed, i) }))
        .collect();
    let hs: Vec<f64> = summaries.iter().map(|s| s.h as f64).collect();
    Ok(HEstimate {
        beta,
        length,
        h: MeanEstimate::from_samples(&hs),
        gap_positive: Proportion::from_flags(summaries.iter().map(|s| s.final_gap > 0)),
    })
}

/// `Y`, `z` and rank of the leading minors `R[m]`, `m = n'..=n`, of one
/// sample at one `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyTrace {
    pub n: usize,
    pub p: f64,
    pub model: Model,
    pub seed: u64,
    pub template: Option<Template>,
    pub n_prime: usize,
    pub rank: Vec<usize>,
    pub z: Vec<usize>,
    pub y: Vec<usize>,
}

impl DeficiencyTrace {
    pub fn minor_sizes(&self) -> std::ops::RangeInclusive<usize> {
        self.n_prime..=self.n
    }

    /// `Y[m+1] - Y[m]`.
    pub fn delta_y(&self) -> Vec<i64> {
        diffs(&self.y)
    }

    /// `z[m] - z[m+1]`, the drop in `z`.
    pub fn z_drop(&self) -> Vec<i64> {
        diffs(&self.z).into_iter().map(|d| -d).collect()
    }

    /// `rank[m+1] - rank[m]`.
    pub fn delta_rank(&self) -> Vec<i64> {
        diffs(&self.rank)
    }

    /// Checks the step identity, the rank increment range and the step bound.
    pub fn validate(&self) -> Result<(), WalkError> {
        let (dy, dz, dr) = (self.delta_y(), self.z_drop(), self.delta_rank());
        for (k, ((&dy, &dz), &dr)) in dy.iter().zip(&dz).zip(&dr).enumerate() {
            let m = self.n_prime + k;
            if dy != 1 + dz - dr {
                return Err(WalkError::Identity { m });
            }
            if !(0..=2).contains(&dr) {
                return Err(WalkError::RankStep { m, delta: dr });
            }
            if dz <= 1 && dy.abs() > 1 {
                return Err(WalkError::StepBound { m, dy, dz });
            }
        }
        Ok(())
    }

    /// CSV with header `m,rank,z,Y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), WalkError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "rank", "z", "Y"])?;
        for (k, m) in self.minor_sizes().enumerate() {
            w.write_record([m, self.rank[k], self.z[k], self.y[k]].map(|v| v.to_string()))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn diffs(xs: &[usize]) -> Vec<i64> {
    xs.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect()
}

/// The trace of the sample `(n, model, seed)` at `p`, from `n'` given by
/// [`RobustParams::for_p`]. The template must be permissible for that `n'`.
pub fn deficiency_trace(
    n: usize,
    p: f64,
    model: Model,
    seed: u64,
    template: Option<&Template>,
) -> Result<DeficiencyTrace, WalkError> {
    let field = UniformField::new(n, model, seed)?;
    let n_prime = RobustParams::for_p(n, p).n_prime;
    deficiency_trace_in(&field, p, template, n_prime)
}

/// As [`deficiency_trace`], on an existing field and with an explicit `n'`.
pub fn deficiency_trace_in(
    field: &UniformField,
    p: f64,
    template: Option<&Template>,
    n_prime: usize,
) -> Result<DeficiencyTrace, WalkError> {
    let n = field.n();
    if !(0.0..=1.0).contains(&p) {
        return Err(ProcessError::Probability(p).into());
    }
    if let Some(t) = template {
        crate::process::check_template(Some(t), n, field.model())?;
        if !t.is_permissible(n_prime) {
            return Err(ProcessError::NotPermissible { n_prime }.into());
        }
    }
    let n_prime = n_prime.clamp(1, n);
    let full = matrix_at_level(field, Level::from_prob(p), template);
    let len = n - n_prime + 1;
    let (mut rank, mut z, mut y) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
    for m in n_prime..=n {
        let minor = full.leading_minor(m);
        let r = rank_exact(&minor).rank;
        let zm = minor.z_value();
        y.push(deficiency_from_parts(m, r, zm)?);
        rank.push(r);
        z.push(zm);
    }
    let trace = DeficiencyTrace {
        n,
        p,
        model: field.model(),
        seed: field.seed(),
        template: template.cloned(),
        n_prime,
        rank,
        z,
        y,
    };
    trace.validate()?;
    Ok(trace)
}

/// Step frequencies pooled over a collection of traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingSummary {
    pub traces: usize,
    pub steps: u64,
    /// `dY = +1` among steps with `Y > 0`.
    pub up_given_positive: Proportion,
    /// `dY >= +1` among steps with `Y = 0`.
    pub up_given_zero: Proportion,
    /// `z` drops by two or more.
    pub z_drop_ge2: Proportion,
    /// `Y(R[n]) = 0`.
    pub final_y_zero: Proportion,
}

/// How the up-step frequencies compare with a reference `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaComparison {
    pub beta: f64,
    /// Both up-step frequencies have a Wilson lower bound at most `beta`.
    pub consistent: bool,
    pub up_given_positive_lower: f64,
    pub up_given_zero_lower: f64,
}

impl CouplingSummary {
    pub fn compare_beta(&self, beta: f64) -> BetaComparison {
        let a = self.up_given_positive.wilson95().0;
        let b = self.up_given_zero.wilson95().0;
        BetaComparison {
            beta,
            consistent: a <= beta && b <= beta,
            up_given_positive_lower: a,
            up_given_zero_lower: b,
        }
    }
}

pub fn coupling_statistics(traces: &[DeficiencyTrace]) -> Result<CouplingSummary, WalkError> {
    if traces.is_empty() {
        return Err(WalkError::Empty);
    }
    let (mut pos, mut pos_up, mut zero, mut zero_up, mut steps, mut big_drop) = (0, 0, 0, 0, 0, 0);
    for t in traces {
        for ((&y, &dy), &dz) in t.y.iter().zip(&t.delta_y()).zip(&t.z_drop()) {
            steps += 1;
            big_drop += (dz >= 2) as u64;
            if y > 0 {
                pos += 1;
                pos_up += (dy == 1) as u64;
            } else {
                zero += 1;
                zero_up += (dy >= 1) as u64;
            }
        }
    }
    Ok(CouplingSummary {
        traces: traces.len(),
        steps,
        up_given_positive: Proportion::new(pos_up, pos),
        up_given_zero: Proportion::new(zero_up, zero),
        z_drop_ge2: Proportion::new(big_drop, steps),
        final_y_zero: Proportion::from_flags(traces.iter().map(|t| t.y.last() == Some(&0))),
    })
}
