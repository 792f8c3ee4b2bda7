//! Aggregation of per-trial rows. The same code runs at the end of a
//! campaign and when re-reading its CSV, so the two summaries agree.

use serde::{Deserialize, Serialize};

use super::config::{CampaignConfig, Experiment};
use super::experiments::columns;
use super::CampaignError;
use num_bigint::BigInt;
use num_rational::BigRational;
use crate::stats::{MeanEstimate, Proportion, Z95};
use crate::walks::{expected_h_f64, mean_h_f64};

pub const SCHEMA_VERSION: u32 = 1;

/// Per-trial rows as strings, with their header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn col(&self, name: &str) -> Result<usize, CampaignError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CampaignError::Malformed(format!("missing column {name:?}")))
    }

    fn get<T: std::str::FromStr>(&self, row: usize, col: usize) -> Result<T, CampaignError> {
        let raw = &self.rows[row][col];
        raw.parse().map_err(|_| {
            CampaignError::Malformed(format!(
                "row {}: cannot parse {raw:?} in column {:?}",
                row + 1,
                self.columns[col]
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub c: Option<f64>,
    pub beta: Option<f64>,
    pub k: Option<usize>,
    pub metric: String,
    pub trials: u64,
    pub successes: Option<u64>,
    pub estimate: f64,
    pub std_err: Option<f64>,
    /// Wilson 95% interval for proportions, `estimate ± 1.96 std_err` for
    /// means, and the point itself for exact values.
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_ms: f64,
    /// A value the estimate can be compared with, when one exists.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub schema: u32,
    pub experiment: Experiment,
    pub config_hash: String,
    pub version: String,
    pub master_seed: u64,
    pub rows: Vec<SummaryRow>,
}

impl CampaignSummary {
    pub fn row(&self, metric: &str, n: Option<usize>) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && (n.is_none() || r.n == n))
    }
}

#[derive(Default, Clone, Copy)]
struct Key {
    n: Option<usize>,
    p: Option<f64>,
    c: Option<f64>,
    beta: Option<f64>,
    k: Option<usize>,
}

impl Key {
    fn same(&self, o: &Key) -> bool {
        self.n == o.n
            && self.p.map(f64::to_bits) == o.p.map(f64::to_bits)
            && self.beta.map(f64::to_bits) == o.beta.map(f64::to_bits)
            && self.k == o.k
    }
}

/// Row indices grouped by key, groups in order of first appearance.
fn groups(table: &Table, key: impl Fn(usize) -> Result<Key, CampaignError>) -> Result<Vec<(Key, Vec<usize>)>, CampaignError> {
    let mut out: Vec<(Key, Vec<usize>)> = Vec::new();
    for r in 0..table.rows.len() {
        let k = key(r)?;
        match out.iter_mut().find(|(g, _)| g.same(&k)) {
            Some((_, rows)) => rows.push(r),
            None => out.push((k, vec![r])),
        }
    }
    Ok(out)
}

fn proportion_row(key: &Key, metric: &str, p: Proportion, mean_ms: f64, reference: Option<f64>) -> SummaryRow {
    let (ci_low, ci_high) = p.wilson95();
    SummaryRow {
        n: key.n,
        p: key.p,
        c: key.c,
        beta: key.beta,
        k: key.k,
        metric: metric.to_string(),
        trials: p.trials,
        successes: Some(p.successes),
        estimate: p.estimate(),
        std_err: None,
        ci_low,
        ci_high,
        mean_ms,
        reference,
    }
}

fn exact_row(key: &Key, metric: &str, value: f64, mean_ms: f64) -> SummaryRow {
    SummaryRow {
        n: key.n,
        p: key.p,
        c: key.c,
        beta: key.beta,
        k: key.k,
        metric: metric.to_string(),
        trials: 1,
        successes: None,
        estimate: value,
        std_err: None,
        ci_low: value,
        ci_high: value,
        mean_ms,
        reference: None,
    }
}

pub fn summarize_table(cfg: &CampaignConfig, table: &Table) -> Result<Vec<SummaryRow>, CampaignError> {
    if table.rows.is_empty() {
        return Err(CampaignError::EmptyResults);
    }
    let expected = columns(cfg.experiment);
    if table.columns.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(CampaignError::Malformed(format!(
            "header {:?} does not match the {} columns {:?}",
            table.columns,
            cfg.experiment.as_str(),
            expected
        )));
    }
    if let Some((i, r)) = table.rows.iter().enumerate().find(|(_, r)| r.len() != expected.len()) {
        return Err(CampaignError::Malformed(format!(
            "row {} has {} fields, expected {}",
            i + 1,
            r.len(),
            expected.len()
        )));
    }
    let ms_col = table.col("ms")?;
    let mean_ms = |rows: &[usize]| -> Result<f64, CampaignError> {
        let mut total = 0u64;
        for &r in rows {
            total += table.get::<u64>(r, ms_col)?;
        }
        Ok(total as f64 / rows.len() as f64)
    };
    let flag = |rows: &[usize], col: usize, want: &str| -> Result<Proportion, CampaignError> {
        let mut hits = 0;
        for &r in rows {
            let v = table.rows[r][col].as_str();
            if !matches!(v, "true" | "false" | "unknown") {
                return Err(CampaignError::Malformed(format!("row {}: {v:?} is not a verdict", r + 1)));
            }
            hits += (v == want) as u64;
        }
        Ok(Proportion::new(hits, rows.len() as u64))
    };
    let sum = |rows: &[usize], col: usize| -> Result<u64, CampaignError> {
        rows.iter().map(|&r| table.get::<u64>(r, col)).sum()
    };

    let mut out = Vec::new();
    match cfg.experiment {
        Experiment::Hitting => {
            let (n, s) = (table.col("n")?, table.col("singular_at_tau")?);
            for (key, rows) in groups(table, |r| Ok(Key { n: Some(table.get(r, n)?), ..Key::default() }))? {
                out.push(proportion_row(&key, "singular_at_tau", flag(&rows, s, "true")?, mean_ms(&rows)?, None));
            }
        }
        Experiment::RankVsZ | Experiment::RobustFrequency | Experiment::DeficiencyTraces => {
            let (n, p, c) = (table.col("n")?, table.col("p")?, table.col("c")?);
            let point = |r| -> Result<Key, CampaignError> {
                Ok(Key {
                    n: Some(table.get(r, n)?),
                    p: Some(table.get(r, p)?),
                    c: Some(table.get(r, c)?),
                    ..Key::default()
                })
            };
            for (key, rows) in groups(table, point)? {
                let ms = mean_ms(&rows)?;
                match cfg.experiment {
                    Experiment::RankVsZ => {
                        let col = table.col("rank_eq_n_minus_z")?;
                        out.push(proportion_row(&key, "rank_eq_n_minus_z", flag(&rows, col, "true")?, ms, None));
                    }
                    Experiment::RobustFrequency => {
                        let robust = table.col("robust")?;
                        let refuted = flag(&rows, robust, "false")?;
                        let not_refuted = Proportion::new(refuted.trials - refuted.successes, refuted.trials);
                        out.push(proportion_row(&key, "robust_not_refuted", not_refuted, ms, None));
                        out.push(proportion_row(&key, "robust_proved", flag(&rows, robust, "true")?, ms, None));
                        let ws = table.col("well_separated")?;
                        out.push(proportion_row(&key, "well_separated", flag(&rows, ws, "true")?, ms, None));
                    }
                    _ => {
                        let final_y = table.col("final_Y")?;
                        let zero_final = rows
                            .iter()
                            .map(|&r| table.get::<u64>(r, final_y).map(|y| y == 0))
                            .collect::<Result<Vec<_>, _>>()?;
                        out.push(proportion_row(&key, "final_Y_zero", Proportion::from_flags(zero_final), ms, None));
                        let pooled = |num: &str, den: &str| -> Result<Proportion, CampaignError> {
                            Ok(Proportion::new(sum(&rows, table.col(num)?)?, sum(&rows, table.col(den)?)?))
                        };
                        out.push(proportion_row(&key, "up_given_positive", pooled("up_pos", "pos_steps")?, ms, cfg.beta));
                        out.push(proportion_row(&key, "up_given_zero", pooled("up_zero", "zero_steps")?, ms, cfg.beta));
                        out.push(proportion_row(&key, "z_drop_ge2", pooled("z_drop_ge2", "steps")?, ms, None));
                    }
                }
            }
        }
        Experiment::WalkH => {
            let (b, h, gap) = (table.col("beta")?, table.col("H")?, table.col("final_gap")?);
            for (key, rows) in groups(table, |r| Ok(Key { beta: Some(table.get(r, b)?), ..Key::default() }))? {
                let beta = key.beta.expect("keyed by beta");
                let hs = rows
                    .iter()
                    .map(|&r| table.get::<u64>(r, h).map(|v| v as f64))
                    .collect::<Result<Vec<_>, _>>()?;
                let est = MeanEstimate::from_samples(&hs);
                let (ci_low, ci_high) = est.interval(Z95);
                let (mean, bound) = if beta < 0.5 {
                    (Some(mean_h_f64(beta)), Some(expected_h_f64(beta)))
                } else {
                    (None, None)
                };
                let ms = mean_ms(&rows)?;
                out.push(SummaryRow {
                    n: None,
                    p: None,
                    c: None,
                    beta: Some(beta),
                    k: None,
                    metric: "mean_H".into(),
                    trials: est.count,
                    successes: None,
                    estimate: est.mean,
                    std_err: Some(est.std_err),
                    ci_low,
                    ci_high,
                    mean_ms: ms,
                    reference: mean,
                });
                let gaps = rows
                    .iter()
                    .map(|&r| table.get::<i64>(r, gap).map(|g| g > 0))
                    .collect::<Result<Vec<_>, _>>()?;
                out.push(proportion_row(&key, "gap_positive", Proportion::from_flags(gaps), ms, bound));
            }
        }
        Experiment::LoffordProfile => {
            let (k, num, den) = (table.col("k")?, table.col("sup_atom_num")?, table.col("sup_atom_den")?);
            let mut points = Vec::new();
            for r in 0..table.rows.len() {
                let key = Key { k: Some(table.get(r, k)?), ..Key::default() };
                let a = BigRational::new(table.get::<BigInt>(r, num)?, table.get::<BigInt>(r, den)?);
                out.push(exact_row(&key, "sup_atom", num_traits::ToPrimitive::to_f64(&a).unwrap_or(f64::NAN), mean_ms(&[r])?));
                points.push((key.k.expect("set"), a));
            }
            let slope = crate::lofford::loglog_slope(&points);
            out.push(exact_row(&Key::default(), "loglog_slope", slope, mean_ms(&(0..table.rows.len()).collect::<Vec<_>>())?));
        }
    }
    Ok(out)
}
