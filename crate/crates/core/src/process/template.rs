//! Templates: deterministic out-neighbourhoods for some rows and
//! in-neighbourhoods for some columns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Model, ProcessError};

/// `L = ((S_i^+)_{i in I^+}, (S_j^-)_{j in I^-})`, 0-based.
///
/// `plus[i]` is the exact set of non-zero columns of row `i`; `minus[j]` is
/// the exact set of non-zero rows of column `j`. The index sets `I^+`, `I^-`
/// are the key sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "TemplateJson", try_from = "TemplateJson")]
pub struct Template {
    pub plus: BTreeMap<usize, BTreeSet<usize>>,
    pub minus: BTreeMap<usize, BTreeSet<usize>>,
}

/// Why a template fails the definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum TemplateViolation {
    IndexOutOfRange { index: usize, n: usize },
    EmptyNeighbourhood { side: Side, index: usize },
    /// Two sets on the same side intersect ("pairwise disjoint").
    NotPairwiseDisjoint { side: Side, first: usize, second: usize, shared: usize },
    /// `S_i^+` meets `I^-` or `S_j^-` meets `I^+`.
    Containment { side: Side, index: usize, offending: usize },
    /// `S_i^+` contains `i` itself, which would put a one on the diagonal.
    Diagonal { side: Side, index: usize },
    NotSymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl fmt::Display for TemplateViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateViolation::IndexOutOfRange { index, n } => {
                write!(f, "index {} outside [1, {n}]", index + 1)
            }
            TemplateViolation::EmptyNeighbourhood { side, index } => {
                write!(f, "S_{}^{} is empty", index + 1, side.sign())
            }
            TemplateViolation::NotPairwiseDisjoint {
                side,
                first,
                second,
                shared,
            } => write!(
                f,
                "sets are not pairwise disjoint: S_{}^{s} and S_{}^{s} share {}",
                first + 1,
                second + 1,
                shared + 1,
                s = side.sign()
            ),
            TemplateViolation::Containment {
                side,
                index,
                offending,
            } => write!(
                f,
                "S_{}^{} contains {}, which lies in I^{}",
                index + 1,
                side.sign(),
                offending + 1,
                side.other().sign()
            ),
            TemplateViolation::Diagonal { side, index } => {
                write!(f, "S_{i}^{} contains its own index {i}", side.sign(), i = index + 1)
            }
            TemplateViolation::NotSymmetric => {
                f.write_str("the symmetric model requires L^+ = L^-")
            }
        }
    }
}

impl Side {
    fn sign(self) -> char {
        match self {
            Side::Plus => '+',
            Side::Minus => '-',
        }
    }

    fn other(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

impl Template {
    pub fn degenerate() -> Self {
        Self::default()
    }

    pub fn is_degenerate(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.plus == self.minus
    }

    pub fn i_plus(&self) -> BTreeSet<usize> {
        self.plus.keys().copied().collect()
    }

    pub fn i_minus(&self) -> BTreeSet<usize> {
        self.minus.keys().copied().collect()
    }

    /// `max(|I^+|, |I^-|, max |S_i^+|, max |S_j^-|)`.
    pub fn size(&self) -> usize {
        let sets = self.plus.values().chain(self.minus.values()).map(BTreeSet::len);
        sets.chain([self.plus.len(), self.minus.len()])
            .max()
            .unwrap_or(0)
    }

    /// `I^+ ∪ I^- ∪ ⋃S_i^+ ∪ ⋃S_j^-`.
    pub fn support(&self) -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = self.plus.keys().chain(self.minus.keys()).copied().collect();
        for set in self.plus.values().chain(self.minus.values()) {
            s.extend(set);
        }
        s
    }

    pub fn union_plus(&self) -> BTreeSet<usize> {
        self.plus.values().flatten().copied().collect()
    }

    pub fn union_minus(&self) -> BTreeSet<usize> {
        self.minus.values().flatten().copied().collect()
    }

    /// Support inside the first `n_prime` indices.
    pub fn is_permissible(&self, n_prime: usize) -> bool {
        self.support().iter().all(|&i| i < n_prime)
    }

    /// Relabels every index through `perm` (index `i` becomes `perm[i]`).
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let map = |side: &BTreeMap<usize, BTreeSet<usize>>| {
            side.iter()
                .map(|(&i, set)| (perm[i], set.iter().map(|&j| perm[j]).collect()))
                .collect()
        };
        Self {
            plus: map(&self.plus),
            minus: map(&self.minus),
        }
    }

    /// A permutation of `0..n` sending the support onto the smallest indices,
    /// keeping relative order on both the support and its complement. The
    /// relabelled template is permissible when the support has at most
    /// `n_prime` elements; returns `None` otherwise.
    pub fn permissible_relabelling(&self, n: usize, n_prime: usize) -> Option<Vec<usize>> {
        let support = self.support();
        if support.len() > n_prime || support.iter().any(|&i| i >= n) {
            return None;
        }
        let mut perm = vec![0; n];
        let mut next = 0;
        for &i in &support {
            perm[i] = next;
            next += 1;
        }
        for (i, slot) in perm.iter_mut().enumerate() {
            if !support.contains(&i) {
                *slot = next;
                next += 1;
            }
        }
        Some(perm)
    }

    /// Restriction to the leading `m x m` minor: indices `>= m` are dropped
    /// from every set and key.
    pub fn restrict(&self, m: usize) -> Self {
        let cut = |side: &BTreeMap<usize, BTreeSet<usize>>| {
            side.iter()
                .filter(|(&i, _)| i < m)
                .map(|(&i, set)| (i, set.iter().copied().filter(|&j| j < m).collect()))
                .collect()
        };
        Self {
            plus: cut(&self.plus),
            minus: cut(&self.minus),
        }
    }

    /// Checks the template against the definition for dimension `n`, plus
    /// `L^+ = L^-` when `model` is symmetric.
    pub fn validate(&self, n: usize, model: Model) -> Result<(), TemplateViolation> {
        for (side, map, opposite) in [
            (Side::Plus, &self.plus, &self.minus),
            (Side::Minus, &self.minus, &self.plus),
        ] {
            let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
            for (&i, set) in map {
                if i >= n {
                    return Err(TemplateViolation::IndexOutOfRange { index: i, n });
                }
                if set.is_empty() {
                    return Err(TemplateViolation::EmptyNeighbourhood { side, index: i });
                }
                for &j in set {
                    if j >= n {
                        return Err(TemplateViolation::IndexOutOfRange { index: j, n });
                    }
                    if j == i {
                        return Err(TemplateViolation::Diagonal { side, index: i });
                    }
                    if opposite.contains_key(&j) {
                        return Err(TemplateViolation::Containment {
                            side,
                            index: i,
                            offending: j,
                        });
                    }
                    if let Some(&first) = owner.get(&j) {
                        return Err(TemplateViolation::NotPairwiseDisjoint {
                            side,
                            first,
                            second: i,
                            shared: j,
                        });
                    }
                    owner.insert(j, i);
                }
            }
        }
        if model == Model::Symmetric && !self.is_symmetric() {
            return Err(TemplateViolation::NotSymmetric);
        }
        Ok(())
    }

    pub fn to_json(&self) -> TemplateJson {
        let side = |m: &BTreeMap<usize, BTreeSet<usize>>| {
            (
                m.keys().map(|&i| i + 1).collect(),
                m.iter()
                    .map(|(&i, s)| ((i + 1).to_string(), s.iter().map(|&j| j + 1).collect()))
                    .collect(),
            )
        };
        let (i_plus, s_plus) = side(&self.plus);
        let (i_minus, s_minus) = side(&self.minus);
        TemplateJson {
            i_plus,
            s_plus,
            i_minus,
            s_minus,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("template serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self, ProcessError> {
        let raw: TemplateJson =
            serde_json::from_str(s).map_err(|e| ProcessError::TemplateJson(e.to_string()))?;
        Self::try_from(raw)
    }
}

/// Wire form: 1-based indices, set keys as strings.
///
/// `{"I_plus":[...], "S_plus":{"i":[...]}, "I_minus":[...], "S_minus":{"j":[...]}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateJson {
    #[serde(rename = "I_plus", default)]
    pub i_plus: Vec<usize>,
    #[serde(rename = "S_plus", default)]
    pub s_plus: BTreeMap<String, Vec<usize>>,
    #[serde(rename = "I_minus", default)]
    pub i_minus: Vec<usize>,
    #[serde(rename = "S_minus", default)]
    pub s_minus: BTreeMap<String, Vec<usize>>,
}

impl From<Template> for TemplateJson {
    fn from(t: Template) -> Self {
        t.to_json()
    }
}

impl TryFrom<TemplateJson> for Template {
    type Error = ProcessError;

    fn try_from(raw: TemplateJson) -> Result<Self, Self::Error> {
        fn side(
            name: &str,
            index: &[usize],
            sets: &BTreeMap<String, Vec<usize>>,
        ) -> Result<BTreeMap<usize, BTreeSet<usize>>, ProcessError> {
            let bad = |msg: String| ProcessError::TemplateJson(format!("{name}: {msg}"));
            let mut out = BTreeMap::new();
            for (key, members) in sets {
                let i: usize = key
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("key {key:?} is not an index")))?;
                if i == 0 || members.contains(&0) {
                    return Err(bad("indices are 1-based".into()));
                }
                let set: BTreeSet<usize> = members.iter().map(|&j| j - 1).collect();
                if set.len() != members.len() {
                    return Err(bad(format!("set for {i} repeats an index")));
                }
                out.insert(i - 1, set);
            }
            let keys: BTreeSet<usize> = index.iter().copied().collect();
            if keys.len() != index.len() {
                return Err(bad("index list repeats an entry".into()));
            }
            let declared: BTreeSet<usize> = out.keys().map(|&i| i + 1).collect();
            if keys != declared {
                return Err(bad(format!(
                    "index list {keys:?} does not match set keys {declared:?}"
                )));
            }
            Ok(out)
        }
        Ok(Template {
            plus: side("I_plus/S_plus", &raw.i_plus, &raw.s_plus)?,
            minus: side("I_minus/S_minus", &raw.i_minus, &raw.s_minus)?,
        })
    }
}

/// A uniformly relabelled valid template of size at most `max_size`, with
/// support inside `0..n_prime` and at least one line fixed.
///
/// The shape is drawn first: `|I^+|` and `|I^-|` in `0..=max_size` (not
/// both zero; `I^- = I^+` when `symmetric`), and each set size in
/// `1..=max_size`. Indices are then assigned from a shuffled pool so that
/// all disjointness and containment conditions hold. Returns `None` if the
/// pool is too small for the drawn shape.
pub fn random_template<R: Rng + ?Sized>(
    rng: &mut R,
    n_prime: usize,
    max_size: usize,
    symmetric: bool,
) -> Option<Template> {
    assert!(max_size >= 1);
    let (np, nm) = loop {
        let np = rng.random_range(0..=max_size);
        let nm = if symmetric { np } else { rng.random_range(0..=max_size) };
        if np + nm > 0 {
            break (np, nm);
        }
    };
    let mut pool: Vec<usize> = (0..n_prime).collect();
    pool.shuffle(rng);
    let mut take = |k: usize| -> Option<Vec<usize>> {
        if pool.len() < k {
            return None;
        }
        Some(pool.split_off(pool.len() - k))
    };
    // I^+ and I^- are disjoint from every S on the opposite side; the S sets
    // on one side are disjoint from each other. Drawing everything from one
    // pool without replacement satisfies both, at the cost of also keeping
    // I^+ and I^- apart (except in the symmetric case, where they coincide).
    let i_plus = take(np)?;
    let i_minus = if symmetric { i_plus.clone() } else { take(nm)? };
    let mut t = Template::default();
    for &i in &i_plus {
        let k = rng.random_range(1..=max_size);
        t.plus.insert(i, take(k)?.into_iter().collect());
    }
    if symmetric {
        t.minus = t.plus.clone();
    } else {
        for &j in &i_minus {
            let k = rng.random_range(1..=max_size);
            t.minus.insert(j, take(k)?.into_iter().collect());
        }
    }
    Some(t)
}
