use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CampaignError;
use crate::lofford::FormKind;
use crate::process::{p_from_c, Model, Template};
use crate::structure::CheckMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Hitting,
    RankVsZ,
    RobustFrequency,
    DeficiencyTraces,
    WalkH,
    LoffordProfile,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Hitting => "hitting",
            Experiment::RankVsZ => "rank_vs_z",
            Experiment::RobustFrequency => "robust_frequency",
            Experiment::DeficiencyTraces => "deficiency_traces",
            Experiment::WalkH => "walk_h",
            Experiment::LoffordProfile => "lofford_profile",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Experiment::Hitting,
            Experiment::RankVsZ,
            Experiment::RobustFrequency,
            Experiment::DeficiencyTraces,
            Experiment::WalkH,
            Experiment::LoffordProfile,
        ]
        .into_iter()
        .find(|e| e.as_str() == s)
    }
}

/// Either absolute probabilities or multiples `c` of `ln n / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PSpec {
    Absolute(Vec<f64>),
    C(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomTemplates {
    /// Number of distinct templates; trial `t` uses template `t % count`.
    pub count: usize,
    pub max_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSettings {
    pub betas: Vec<f64>,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoffordSettings {
    pub kind: FormKind,
    pub k_list: Vec<usize>,
    /// A rational such as `"1/2"`.
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSettings {
    #[serde(default = "default_mode")]
    pub mode: CheckMode,
    #[serde(default = "default_random_subsets")]
    pub random_subsets: usize,
    #[serde(default = "default_budget")]
    pub exhaustive_budget: u64,
}

fn default_mode() -> CheckMode {
    CheckMode::Sampled
}

fn default_random_subsets() -> usize {
    20_000
}

fn default_budget() -> u64 {
    3_000_000
}

impl Default for StructureSettings {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            random_subsets: default_random_subsets(),
            exhaustive_budget: default_budget(),
        }
    }
}

fn default_model() -> Model {
    Model::Asymmetric
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default = "default_model")]
    pub model: Model,
    #[serde(default)]
    pub p_spec: Option<PSpec>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub template: Option<Template>,
    #[serde(default)]
    pub random_templates: Option<RandomTemplates>,
    /// Reference `beta` for the deficiency-trace up-step comparison.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub walk: Option<WalkSettings>,
    #[serde(default)]
    pub lofford: Option<LoffordSettings>,
    #[serde(default)]
    pub structure: Option<StructureSettings>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Record wall-clock milliseconds in the `ms` column. Off by default so
    /// that reruns produce byte-identical files.
    #[serde(default)]
    pub timing: bool,
}

/// One point of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub n: usize,
    pub p: f64,
    /// The `c` with `p = c ln n / n` (given or back-computed).
    pub c: f64,
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self, CampaignError> {
        serde_json::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    fn invalid(field: &str, reason: impl Into<String>) -> CampaignError {
        CampaignError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// The `(n, p)` grid, with `c`-multiples resolved.
    pub fn points(&self) -> Result<Vec<Point>, CampaignError> {
        let spec = self
            .p_spec
            .as_ref()
            .ok_or_else(|| Self::invalid("p_spec", "required for this experiment"))?;
        let mut out = Vec::new();
        for &n in &self.n_list {
            let ln_n = (n as f64).ln();
            match spec {
                PSpec::Absolute(ps) => {
                    for &p in ps {
                        out.push(Point { n, p, c: p * n as f64 / ln_n });
                    }
                }
                PSpec::C(cs) => {
                    for &c in cs {
                        out.push(Point { n, p: p_from_c(c, n), c });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.trials == 0 {
            return Err(Self::invalid("trials", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Self::invalid("workers", "must be at least 1"));
        }
        let needs_n = !matches!(self.experiment, Experiment::WalkH | Experiment::LoffordProfile);
        if needs_n {
            if self.n_list.is_empty() {
                return Err(Self::invalid("n_list", "must not be empty"));
            }
            if let Some(&n) = self.n_list.iter().find(|&&n| n < 2) {
                return Err(Self::invalid("n_list", format!("n = {n} is below 2")));
            }
        }
        if let Some(t) = &self.template {
            if self.random_templates.is_some() {
                return Err(Self::invalid("template", "cannot be combined with random_templates"));
            }
            for &n in &self.n_list {
                crate::process::check_template(Some(t), n, self.model)
                    .map_err(|e| Self::invalid("template", format!("n = {n}: {e}")))?;
            }
        }
        if let Some(r) = &self.random_templates {
            if r.count == 0 || r.max_size == 0 {
                return Err(Self::invalid("random_templates", "count and max_size must be positive"));
            }
        }
        match self.experiment {
            Experiment::Hitting => {}
            Experiment::RankVsZ | Experiment::RobustFrequency | Experiment::DeficiencyTraces => {
                for pt in self.points()? {
                    if !(pt.p > 0.0 && pt.p < 1.0) {
                        return Err(Self::invalid(
                            "p_spec",
                            format!("p = {} at n = {} is outside (0, 1)", pt.p, pt.n),
                        ));
                    }
                }
            }
            Experiment::WalkH => {
                let w = self
                    .walk
                    .as_ref()
                    .ok_or_else(|| Self::invalid("walk", "required for walk_h"))?;
                if w.betas.is_empty() {
                    return Err(Self::invalid("walk.betas", "must not be empty"));
                }
                if let Some(b) = w.betas.iter().find(|b| !(0.0..=1.0).contains(*b)) {
                    return Err(Self::invalid("walk.betas", format!("{b} is outside [0, 1]")));
                }
            }
            Experiment::LoffordProfile => {
                let l = self
                    .lofford
                    .as_ref()
                    .ok_or_else(|| Self::invalid("lofford", "required for lofford_profile"))?;
                if l.k_list.len() < 2 {
                    return Err(Self::invalid("lofford.k_list", "needs at least two sizes"));
                }
                crate::lofford::parse_rational(&l.p)
                    .map_err(|e| Self::invalid("lofford.p", e.to_string()))?;
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of every field that affects results
    /// (everything except `output_path`, `workers` and `timing`).
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = value.as_object_mut() {
            for key in ["output_path", "workers", "timing"] {
                obj.remove(key);
            }
        }
        let canonical = serde_json::to_string(&value).expect("value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn structure_settings(&self) -> StructureSettings {
        self.structure.clone().unwrap_or_default()
    }
}
