//! Structural predicates on 0-1 matrices: `S`-selectors, `b`-blocked (plain
//! and template-relative), `b`-dense, `n`-robust and well-separated.
//!
//! Exact blocked checking enumerates every candidate row set and is
//! exponential in `b`; it is only attempted when `m <= 24` or `b <= 6`.
//! Sampled checking can only refute, so a sampled verdict without a witness
//! is `holds: None` rather than `Some(true)`.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::bits::ones_of;
use crate::matrix::{BitMatrix, ZeroOneMatrix};
use crate::process::{matrix_at_level, Level, Template, UniformField};
use crate::rng::CounterRng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("b = {b} exceeds the matrix dimension {m}")]
    BTooLarge { b: usize, m: usize },
    #[error("b = {b} is below 2")]
    BTooSmall { b: usize },
    #[error("exact mode needs m <= 24 or b <= 6 (m = {m}, b = {b})")]
    ExactTooExpensive { m: usize, b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Exact,
    Sampled,
}

/// Budget for sampled blocked checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    /// Enumerate every eligible set up to this size (capped at 6) as long as
    /// the total count of such sets stays within `exhaustive_budget`.
    pub exhaustive_cap: usize,
    pub exhaustive_budget: u64,
    /// Uniformly random sets, of uniformly random size in `2..=b`.
    pub random_subsets: usize,
    /// All subsets of this many lowest-out-degree rows ...
    pub low_degree_rows: usize,
    /// ... up to this size (and at most `b`).
    pub low_degree_max_size: usize,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            exhaustive_cap: 6,
            exhaustive_budget: 30_000_000,
            random_subsets: 100_000,
            low_degree_rows: 20,
            low_degree_max_size: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockedVerdict {
    /// `Some(false)` comes with a witness; `None` means a sampled check found
    /// nothing but proved nothing.
    pub holds: Option<bool>,
    pub witness: Option<Vec<usize>>,
    /// For template-relative checks: whether the witness is a set of rows of
    /// `Q^T` (the column condition) rather than of `Q`.
    pub transposed: bool,
    pub mode: CheckMode,
    pub subsets_checked: u64,
}

/// Columns (from `pool`, default all) with exactly one non-zero entry among
/// the rows in `set`.
pub fn selectors(m: &ZeroOneMatrix, set: &[usize], pool: Option<&[usize]>) -> Vec<usize> {
    let all = ones_of(&selector_words(m.bits(), set));
    match pool {
        None => all,
        Some(p) => all.into_iter().filter(|j| p.contains(j)).collect(),
    }
}

fn selector_words(m: &BitMatrix, set: &[usize]) -> Vec<u64> {
    let mut once = vec![0u64; m.stride()];
    let mut twice = vec![0u64; m.stride()];
    for &i in set {
        for ((o, t), &r) in once.iter_mut().zip(twice.iter_mut()).zip(m.row(i)) {
            *t |= *o & r;
            *o |= r;
        }
    }
    once.iter().zip(&twice).map(|(o, t)| o & !t).collect()
}

/// Fast test: does `set` have at least two selectors inside `pool_mask`?
fn has_two_selectors(m: &BitMatrix, set: &[usize], pool_mask: &[u64]) -> bool {
    let mut count = 0u32;
    let stride = m.stride();
    for w in 0..stride {
        let mut once = 0u64;
        let mut twice = 0u64;
        for &i in set {
            let r = m.row(i)[w];
            twice |= once & r;
            once |= r;
        }
        count += (once & !twice & pool_mask[w]).count_ones();
        if count >= 2 {
            return true;
        }
    }
    false
}

/// One side of a blocked check: rows `eligible` may form `S`, selectors are
/// counted in `pool`.
struct Side<'a> {
    m: &'a BitMatrix,
    eligible: Vec<usize>,
    pool_mask: Vec<u64>,
}

impl Side<'_> {
    fn new<'a>(m: &'a BitMatrix, excluded_rows: &BTreeSet<usize>, excluded_cols: &BTreeSet<usize>) -> Side<'a> {
        let eligible = (0..m.rows())
            .filter(|&i| !excluded_rows.contains(&i) && m.row_weight(i) > 0)
            .collect();
        let mut pool_mask = vec![0u64; m.stride()];
        for j in 0..m.cols() {
            if !excluded_cols.contains(&j) {
                pool_mask[j / 64] |= 1 << (j % 64);
            }
        }
        Side { m, eligible, pool_mask }
    }

    fn blocked(&self, set: &[usize]) -> bool {
        has_two_selectors(self.m, set, &self.pool_mask)
    }

    /// Size-ascending, then lexicographic, enumeration of subsets of
    /// `universe` with sizes in `2..=max`. Returns the first failing set.
    fn enumerate(&self, universe: &[usize], max: usize, checked: &mut u64) -> Option<Vec<usize>> {
        for size in 2..=max.min(universe.len()) {
            let mut idx: Vec<usize> = (0..size).collect();
            let mut set = vec![0; size];
            loop {
                for (s, &k) in set.iter_mut().zip(&idx) {
                    *s = universe[k];
                }
                *checked += 1;
                if !self.blocked(&set) {
                    return Some(set);
                }
                // next combination
                let mut pos = size;
                while pos > 0 && idx[pos - 1] == universe.len() - size + pos - 1 {
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
                idx[pos - 1] += 1;
                for q in pos..size {
                    idx[q] = idx[q - 1] + 1;
                }
            }
        }
        None
    }

    fn exact(&self, b: usize) -> (Option<Vec<usize>>, u64) {
        let mut checked = 0;
        let w = self.enumerate(&self.eligible, b, &mut checked);
        (w, checked)
    }

    fn sampled(&self, b: usize, cfg: &SampleConfig) -> (Option<Vec<usize>>, u64) {
        let mut checked = 0u64;
        let e = self.eligible.len();

        // (i) exhaustive over small sizes, as far as the budget allows
        let mut cap = 1;
        let mut total = 0u64;
        for s in 2..=cfg.exhaustive_cap.min(6).min(b) {
            total = total.saturating_add(binomial(e as u64, s as u64));
            if total > cfg.exhaustive_budget {
                break;
            }
            cap = s;
        }
        if cap >= 2 {
            if let Some(w) = self.enumerate(&self.eligible, cap, &mut checked) {
                return (Some(w), checked);
            }
        }

        // (ii) low-out-degree rows
        let mut by_degree: Vec<(usize, usize)> =
            self.eligible.iter().map(|&i| (self.m.row_weight(i), i)).collect();
        by_degree.sort_unstable();
        let mut low: Vec<usize> = by_degree
            .iter()
            .take(cfg.low_degree_rows)
            .map(|&(_, i)| i)
            .collect();
        low.sort_unstable();
        if let Some(w) = self.enumerate(&low, b.min(cfg.low_degree_max_size), &mut checked) {
            return (Some(w), checked);
        }

        // (iii) random sets
        if e >= 2 {
            let mut rng = CounterRng::new(cfg.seed);
            for _ in 0..cfg.random_subsets {
                let size = rng.random_range(2..=b.min(e));
                let mut set: Vec<usize> = sample(&mut rng, e, size)
                    .into_iter()
                    .map(|k| self.eligible[k])
                    .collect();
                set.sort_unstable();
                checked += 1;
                if !self.blocked(&set) {
                    return (Some(set), checked);
                }
            }
        }
        (None, checked)
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u64::MAX,
        };
    }
    acc
}

fn exact_allowed(m: usize, b: usize) -> bool {
    m <= 24 || b <= 6
}

fn run_side(side: &Side<'_>, b: usize, mode: CheckMode, cfg: &SampleConfig) -> (Option<Vec<usize>>, u64) {
    match mode {
        CheckMode::Exact => side.exact(b),
        CheckMode::Sampled => side.sampled(b, cfg),
    }
}

/// Whether every set `S` of non-zero rows with `2 <= |S| <= b` has at least
/// two `S`-selectors.
///
/// With a template this is the template-relative variant: `S` avoids
/// `Z^row ∪ I^+` and selectors come from `[m] \ (I^- ∪ ⋃S_i^+)`; and the same
/// condition must hold for `Q^T` with the roles of the two halves swapped.
/// Template indices outside `[m]` are ignored.
pub fn is_b_blocked(
    m: &ZeroOneMatrix,
    b: usize,
    template: Option<&Template>,
    mode: CheckMode,
    cfg: &SampleConfig,
) -> Result<BlockedVerdict, StructureError> {
    let n = m.n();
    if b > n {
        return Err(StructureError::BTooLarge { b, m: n });
    }
    if b < 2 {
        return Err(StructureError::BTooSmall { b });
    }
    if mode == CheckMode::Exact && !exact_allowed(n, b) {
        return Err(StructureError::ExactTooExpensive { m: n, b });
    }
    let empty = BTreeSet::new();
    let verdict = |witness: Option<Vec<usize>>, transposed: bool, checked: u64| BlockedVerdict {
        holds: match (&witness, mode) {
            (Some(_), _) => Some(false),
            (None, CheckMode::Exact) => Some(true),
            (None, CheckMode::Sampled) => None,
        },
        witness,
        transposed,
        mode,
        subsets_checked: checked,
    };

    match template {
        None => {
            let side = Side::new(m.bits(), &empty, &empty);
            let (w, checked) = run_side(&side, b, mode, cfg);
            Ok(verdict(w, false, checked))
        }
        Some(t) => {
            let t = t.restrict(n);
            let mut excl_cols = t.i_minus();
            excl_cols.extend(t.union_plus());
            let side = Side::new(m.bits(), &t.i_plus(), &excl_cols);
            let (w, c1) = run_side(&side, b, mode, cfg);
            if w.is_some() {
                return Ok(verdict(w, false, c1));
            }
            let mt = m.bits().transpose();
            let mut excl_rows_t = t.i_plus();
            excl_rows_t.extend(t.union_minus());
            let side_t = Side::new(&mt, &t.i_minus(), &excl_rows_t);
            let (w, c2) = run_side(&side_t, b, mode, cfg);
            Ok(verdict(w.clone(), w.is_some(), c1 + c2))
        }
    }
}

/// At least `b` rows have two or more non-zero entries.
pub fn is_b_dense(m: &ZeroOneMatrix, b: usize) -> bool {
    (0..m.n()).filter(|&i| m.row_weight(i) >= 2).count() >= b
}

/// Parameters tying `k`, `n'` and the constants together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustParams {
    pub n: usize,
    pub p: f64,
    /// `floor(ln ln n / (2p))`.
    pub k: usize,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// `ceil(alpha n)`.
    pub n_prime: usize,
}

impl RobustParams {
    /// Picks `alpha` with `alpha * c` in `(1/2, 3/4)` and `alpha < 1`.
    ///
    /// `c` is first clamped to at most `0.9`: any `p >= c ln n / n` with a
    /// larger `c` also satisfies the bound with `c = 0.9`. The product is
    /// then `5/8`, or the midpoint of `(1/2, c)` when `c < 5/8`. For
    /// `c <= 1/2` (outside the regime where the constants mean anything)
    /// `c = 3/4` is used so that `n'` stays a usable split point.
    pub fn new(n: usize, p: f64, c: f64) -> Self {
        let c_eff = if c.is_finite() && c > 0.5 { c.min(0.9) } else { 0.75 };
        let product = if c_eff > 0.75 { 0.625 } else { (0.5 + c_eff) / 2.0 };
        Self::with_alpha(n, p, c_eff, product / c_eff)
    }

    /// Parameters for `p`, with `c = p n / ln n`.
    pub fn for_p(n: usize, p: f64) -> Self {
        Self::new(n, p, p * n as f64 / (n as f64).ln())
    }

    pub fn with_alpha(n: usize, p: f64, c: f64, alpha: f64) -> Self {
        let lnln = (n as f64).ln().ln();
        let k = if p > 0.0 { (lnln / (2.0 * p)).floor().max(0.0) as usize } else { n };
        Self {
            n,
            p,
            k,
            c,
            alpha,
            gamma: alpha * c - 0.5,
            n_prime: ((alpha * n as f64).ceil() as usize).min(n),
        }
    }

    /// The out-degree threshold `ln ln n` of the well-separated property.
    pub fn low_degree_threshold(&self) -> f64 {
        (self.n as f64).ln().ln()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RobustVerdict {
    pub b: usize,
    pub rows_blocked: BlockedVerdict,
    pub cols_blocked: BlockedVerdict,
    pub rows_dense: bool,
    pub cols_dense: bool,
}

impl RobustVerdict {
    /// `Some(false)` if any part is refuted, `Some(true)` if every part is
    /// proved, `None` otherwise.
    pub fn robust(&self) -> Option<bool> {
        if !self.rows_dense || !self.cols_dense {
            return Some(false);
        }
        match (self.rows_blocked.holds, self.cols_blocked.holds) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        }
    }
}

/// Both `Q` and `Q^T` are `k`-blocked and `k`-dense. `k` is capped at `m`;
/// for `k < 2` the blocked condition is vacuous.
pub fn is_n_robust(
    m: &ZeroOneMatrix,
    params: &RobustParams,
    mode: CheckMode,
    cfg: &SampleConfig,
) -> Result<RobustVerdict, StructureError> {
    let b = params.k.min(m.n());
    let mt = m.transpose();
    let blocked = |q: &ZeroOneMatrix| -> Result<BlockedVerdict, StructureError> {
        if b < 2 {
            return Ok(BlockedVerdict {
                holds: Some(true),
                witness: None,
                transposed: false,
                mode,
                subsets_checked: 0,
            });
        }
        let mode = if mode == CheckMode::Exact && !exact_allowed(q.n(), b) {
            CheckMode::Sampled
        } else {
            mode
        };
        is_b_blocked(q, b, None, mode, cfg)
    };
    let cols_blocked = {
        let mut v = blocked(&mt)?;
        v.transposed = true;
        v
    };
    Ok(RobustVerdict {
        b: params.k,
        rows_blocked: blocked(m)?,
        cols_blocked,
        rows_dense: is_b_dense(m, params.k),
        cols_dense: is_b_dense(&mt, params.k),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeparationWitness {
    /// Minor size in which the violation occurs.
    pub m: usize,
    pub u: usize,
    pub v: usize,
}

/// First pair `u < v` in `[m] \ excluded`, both with out-degree at most
/// `threshold` in the leading `m x m` minor, joined by a path of at most two
/// edges of any orientation inside that minor.
pub fn close_low_degree_pair(
    adj: &ZeroOneMatrix,
    m: usize,
    threshold: f64,
    excluded: &BTreeSet<usize>,
) -> Option<(usize, usize)> {
    let minor = adj.leading_minor(m);
    let und = {
        let t = minor.transpose();
        let mut u = minor.clone();
        for i in 0..m {
            for j in t.out_neighbours(i) {
                u.set(i, j, true);
            }
        }
        u
    };
    let low: Vec<usize> = (0..m)
        .filter(|i| !excluded.contains(i) && minor.row_weight(*i) as f64 <= threshold)
        .collect();
    for (a, &u) in low.iter().enumerate() {
        let ru = und.row_words(u);
        for &v in &low[a + 1..] {
            let adjacent = und.get(u, v);
            let common = ru.iter().zip(und.row_words(v)).any(|(x, y)| x & y != 0);
            if adjacent || common {
                return Some((u, v));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationVerdict {
    pub holds: bool,
    pub witness: Option<SeparationWitness>,
}

/// For every `m` in `[n', n]`: no two distinct low-out-degree vertices of
/// `H_m` outside `I^+` are joined by a path of at most two edges (adjacency
/// counts as a violation).
pub fn is_well_separated(
    field: &UniformField,
    p: f64,
    params: &RobustParams,
    template: Option<&Template>,
) -> SeparationVerdict {
    let full = matrix_at_level(field, Level::from_prob(p), template);
    let excluded = template.map(Template::i_plus).unwrap_or_default();
    let threshold = params.low_degree_threshold();
    for m in params.n_prime.max(1)..=field.n() {
        if let Some((u, v)) = close_low_degree_pair(&full, m, threshold, &excluded) {
            return SeparationVerdict {
                holds: false,
                witness: Some(SeparationWitness { m, u, v }),
            };
        }
    }
    SeparationVerdict {
        holds: true,
        witness: None,
    }
}
