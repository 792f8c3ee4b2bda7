//! Per-trial work for each experiment type and the frozen CSV columns.

use std::time::Instant;

use super::config::{CampaignConfig, Experiment, Point};
use super::{seed_stream, CampaignError};
use crate::lofford::{all_ones_atom_sup, parse_rational};
use crate::matrix::{deficiency_from_parts, rank_exact};
use crate::process::{
    hitting_trial, matrix_at, random_template, Model, Probes, Template, UniformField,
    LEVEL_DENOMINATOR,
};
use crate::rng::CounterRng;
use crate::structure::{is_n_robust, is_well_separated, RobustParams, SampleConfig};
use crate::walks::{coupling_statistics, deficiency_trace, walk_summary, WalkParams};

pub const HITTING_COLUMNS: &[&str] = &[
    "trial", "seed", "n", "model", "tau_num", "tau_den", "z_before", "singular_at_tau",
    "rank_at_tau", "Y_at_tau", "ms",
];
pub const RANK_VS_Z_COLUMNS: &[&str] = &[
    "trial", "seed", "n", "model", "p", "c", "template", "rank", "z", "Y",
    "rank_eq_n_minus_z", "ms",
];
pub const ROBUST_COLUMNS: &[&str] = &[
    "trial", "seed", "n", "model", "p", "c", "k", "rows_blocked", "cols_blocked",
    "rows_dense", "cols_dense", "robust", "well_separated", "ms",
];
pub const DEFICIENCY_COLUMNS: &[&str] = &[
    "trial", "seed", "n", "model", "p", "c", "n_prime", "final_Y", "max_Y", "pos_steps",
    "up_pos", "zero_steps", "up_zero", "z_drop_ge2", "steps", "ms",
];
pub const WALK_COLUMNS: &[&str] = &["trial", "seed", "beta", "length", "H", "final_gap", "ms"];
pub const LOFFORD_COLUMNS: &[&str] = &[
    "trial", "kind", "k", "p", "sup_atom_num", "sup_atom_den", "sup_atom", "argmax_r", "l",
    "support_size", "ms",
];

pub fn columns(experiment: Experiment) -> &'static [&'static str] {
    match experiment {
        Experiment::Hitting => HITTING_COLUMNS,
        Experiment::RankVsZ => RANK_VS_Z_COLUMNS,
        Experiment::RobustFrequency => ROBUST_COLUMNS,
        Experiment::DeficiencyTraces => DEFICIENCY_COLUMNS,
        Experiment::WalkH => WALK_COLUMNS,
        Experiment::LoffordProfile => LOFFORD_COLUMNS,
    }
}

/// Stream used for generating random templates, kept apart from trial seeds.
const TEMPLATE_STREAM: u64 = 0x7465_6d70_6c61_7465;

/// Everything a worker needs for one trial; built once per campaign.
pub(crate) struct Plan {
    pub experiment: Experiment,
    pub model: Model,
    pub master_seed: u64,
    pub timing: bool,
    /// Grid points; for `walk_h` and `lofford_profile` only the index is used.
    pub points: Vec<Point>,
    pub betas: Vec<f64>,
    pub walk_length: usize,
    pub lofford: Option<(crate::lofford::FormKind, Vec<usize>, num_rational::BigRational)>,
    /// Per point, the templates trials cycle through (empty: none).
    pub templates: Vec<Vec<Template>>,
    pub sample: SampleConfig,
    pub mode: crate::structure::CheckMode,
    pub trials: usize,
}

impl Plan {
    pub fn new(cfg: &CampaignConfig) -> Result<Self, CampaignError> {
        let points = match cfg.experiment {
            Experiment::Hitting => cfg
                .n_list
                .iter()
                .map(|&n| Point { n, p: f64::NAN, c: f64::NAN })
                .collect(),
            Experiment::WalkH | Experiment::LoffordProfile => Vec::new(),
            _ => cfg.points()?,
        };
        let templates = points
            .iter()
            .enumerate()
            .map(|(idx, pt)| {
                if let Some(t) = &cfg.template {
                    return vec![t.clone()];
                }
                let Some(r) = &cfg.random_templates else {
                    return Vec::new();
                };
                let n_prime = RobustParams::for_p(pt.n, pt.p).n_prime;
                let mut rng = CounterRng::new(cfg.master_seed)
                    .split(TEMPLATE_STREAM)
                    .split(idx as u64);
                let mut out = Vec::with_capacity(r.count);
                while out.len() < r.count {
                    if let Some(t) = random_template(
                        &mut rng,
                        n_prime,
                        r.max_size,
                        cfg.model == Model::Symmetric,
                    ) {
                        out.push(t);
                    }
                }
                out
            })
            .collect();
        let (betas, walk_length) = match &cfg.walk {
            Some(w) => (w.betas.clone(), w.length),
            None => (Vec::new(), 0),
        };
        let lofford = match &cfg.lofford {
            Some(l) => Some((
                l.kind,
                l.k_list.clone(),
                parse_rational(&l.p).map_err(|e| CampaignError::Invalid {
                    field: "lofford.p".into(),
                    reason: e.to_string(),
                })?,
            )),
            None => None,
        };
        let st = cfg.structure_settings();
        Ok(Self {
            experiment: cfg.experiment,
            model: cfg.model,
            master_seed: cfg.master_seed,
            timing: cfg.timing,
            points,
            betas,
            walk_length,
            lofford,
            templates,
            sample: SampleConfig {
                random_subsets: st.random_subsets,
                exhaustive_budget: st.exhaustive_budget,
                ..SampleConfig::default()
            },
            mode: st.mode,
            trials: cfg.trials,
        })
    }

    /// `(group, trial)` pairs in output order.
    pub fn units(&self) -> Vec<(usize, usize)> {
        let groups = match self.experiment {
            Experiment::WalkH => self.betas.len(),
            Experiment::LoffordProfile => {
                return (0..self.lofford.as_ref().map_or(0, |l| l.1.len()))
                    .map(|g| (g, 0))
                    .collect()
            }
            _ => self.points.len(),
        };
        (0..groups)
            .flat_map(|g| (0..self.trials).map(move |t| (g, t)))
            .collect()
    }

    pub fn run_unit(&self, group: usize, trial: usize) -> Result<Vec<String>, CampaignError> {
        let start = Instant::now();
        let seed = seed_stream(self.master_seed, trial as u64);
        let wrap = |e: String| CampaignError::Trial { trial, reason: e };
        let mut row = match self.experiment {
            Experiment::Hitting => self.hitting(group, trial, seed).map_err(wrap)?,
            Experiment::RankVsZ => self.rank_vs_z(group, trial, seed).map_err(wrap)?,
            Experiment::RobustFrequency => self.robust(group, trial, seed).map_err(wrap)?,
            Experiment::DeficiencyTraces => self.deficiency(group, trial, seed).map_err(wrap)?,
            Experiment::WalkH => self.walk(group, trial, seed),
            Experiment::LoffordProfile => self.lofford(group).map_err(wrap)?,
        };
        let ms = if self.timing { start.elapsed().as_millis() as u64 } else { 0 };
        row.push(ms.to_string());
        Ok(row)
    }

    fn template(&self, group: usize, trial: usize) -> Option<(usize, &Template)> {
        let ts = self.templates.get(group)?;
        if ts.is_empty() {
            None
        } else {
            let id = trial % ts.len();
            Some((id, &ts[id]))
        }
    }

    fn head(&self, trial: usize, seed: u64, pt: &Point) -> Vec<String> {
        vec![
            trial.to_string(),
            seed.to_string(),
            pt.n.to_string(),
            self.model.to_string(),
        ]
    }

    fn hitting(&self, group: usize, trial: usize, seed: u64) -> Result<Vec<String>, String> {
        let pt = self.points[group];
        let t = self.template(group, trial).map(|x| x.1);
        let r = hitting_trial(pt.n, self.model, seed, t, Probes::default()).map_err(|e| e.to_string())?;
        let mut row = self.head(trial, seed, &pt);
        row.extend([
            r.tau.numerator().to_string(),
            LEVEL_DENOMINATOR.to_string(),
            r.z_before_tau.to_string(),
            r.singular_at_tau.to_string(),
            r.rank_at_tau.to_string(),
            r.y_at_tau.to_string(),
        ]);
        Ok(row)
    }

    fn rank_vs_z(&self, group: usize, trial: usize, seed: u64) -> Result<Vec<String>, String> {
        let pt = self.points[group];
        let t = self.template(group, trial);
        let field = UniformField::new(pt.n, self.model, seed).map_err(|e| e.to_string())?;
        let m = matrix_at(&field, pt.p, t.map(|x| x.1)).map_err(|e| e.to_string())?;
        let rank = rank_exact(&m).rank;
        let z = m.z_value();
        let y = deficiency_from_parts(pt.n, rank, z).map_err(|e| e.to_string())?;
        let mut row = self.head(trial, seed, &pt);
        row.extend([
            pt.p.to_string(),
            pt.c.to_string(),
            t.map_or(String::new(), |x| x.0.to_string()),
            rank.to_string(),
            z.to_string(),
            y.to_string(),
            (y == 0).to_string(),
        ]);
        Ok(row)
    }

    fn robust(&self, group: usize, trial: usize, seed: u64) -> Result<Vec<String>, String> {
        let pt = self.points[group];
        let t = self.template(group, trial).map(|x| x.1);
        let field = UniformField::new(pt.n, self.model, seed).map_err(|e| e.to_string())?;
        let m = matrix_at(&field, pt.p, t).map_err(|e| e.to_string())?;
        let params = RobustParams::new(pt.n, pt.p, pt.c);
        let sample = SampleConfig { seed, ..self.sample };
        let v = is_n_robust(&m, &params, self.mode, &sample).map_err(|e| e.to_string())?;
        let ws = is_well_separated(&field, pt.p, &params, t);
        let mut row = self.head(trial, seed, &pt);
        row.extend([
            pt.p.to_string(),
            pt.c.to_string(),
            params.k.to_string(),
            verdict(v.rows_blocked.holds),
            verdict(v.cols_blocked.holds),
            v.rows_dense.to_string(),
            v.cols_dense.to_string(),
            verdict(v.robust()),
            ws.holds.to_string(),
        ]);
        Ok(row)
    }

    fn deficiency(&self, group: usize, trial: usize, seed: u64) -> Result<Vec<String>, String> {
        let pt = self.points[group];
        let t = self.template(group, trial).map(|x| x.1);
        let trace = deficiency_trace(pt.n, pt.p, self.model, seed, t).map_err(|e| e.to_string())?;
        let s = coupling_statistics(std::slice::from_ref(&trace)).map_err(|e| e.to_string())?;
        let mut row = self.head(trial, seed, &pt);
        row.extend([
            pt.p.to_string(),
            pt.c.to_string(),
            trace.n_prime.to_string(),
            trace.y.last().copied().unwrap_or(0).to_string(),
            trace.y.iter().max().copied().unwrap_or(0).to_string(),
            s.up_given_positive.trials.to_string(),
            s.up_given_positive.successes.to_string(),
            s.up_given_zero.trials.to_string(),
            s.up_given_zero.successes.to_string(),
            s.z_drop_ge2.successes.to_string(),
            s.steps.to_string(),
        ]);
        Ok(row)
    }

    fn walk(&self, group: usize, trial: usize, seed: u64) -> Vec<String> {
        let beta = self.betas[group];
        let s = walk_summary(&WalkParams {
            beta,
            length: self.walk_length,
            seed,
        });
        vec![
            trial.to_string(),
            seed.to_string(),
            beta.to_string(),
            self.walk_length.to_string(),
            s.h.to_string(),
            s.final_gap.to_string(),
        ]
    }

    fn lofford(&self, group: usize) -> Result<Vec<String>, String> {
        let (kind, ks, p) = self.lofford.as_ref().expect("validated");
        let k = ks[group];
        let r = all_ones_atom_sup(*kind, k, p).map_err(|e| e.to_string())?;
        Ok(vec![
            "0".into(),
            kind.to_string(),
            k.to_string(),
            p.to_string(),
            r.sup_atom.numer().to_string(),
            r.sup_atom.denom().to_string(),
            r.sup_atom_f64().to_string(),
            r.argmax_r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
            r.l.map_or(String::new(), |l| l.to_string()),
            r.support_size.to_string(),
        ])
    }
}

fn verdict(v: Option<bool>) -> String {
    match v {
        Some(b) => b.to_string(),
        None => "unknown".into(),
    }
}
