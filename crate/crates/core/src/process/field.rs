//! The coupling layer: one uniform clock per off-diagonal entry.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ProcessError;
use crate::rng;

/// `2^64`, the denominator of every clock value and level.
pub const LEVEL_DENOMINATOR: u128 = 1 << 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// One clock per ordered pair `i != j`: the Bernoulli process.
    Asymmetric,
    /// One clock per unordered pair: the symmetric Bernoulli process.
    Symmetric,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Asymmetric => "asymmetric",
            Model::Symmetric => "symmetric",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = ProcessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asymmetric" => Ok(Model::Asymmetric),
            "symmetric" => Ok(Model::Symmetric),
            other => Err(ProcessError::UnknownModel(other.to_string())),
        }
    }
}

/// An exact probability `level / 2^64`, with `level` in `0..=2^64`.
///
/// Clock `c` stands for the uniform value `(c + 1) / 2^64`, so an entry is
/// present at level `L` iff `c < L`. Level `c + 1` is therefore the first
/// level at which the entry with clock `c` is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Level(pub u128);

impl Level {
    pub const ZERO: Level = Level(0);
    pub const ONE: Level = Level(LEVEL_DENOMINATOR);

    /// The largest level not exceeding `p`.
    pub fn from_prob(p: f64) -> Self {
        if p.is_nan() || p <= 0.0 {
            Level::ZERO
        } else if p >= 1.0 {
            Level::ONE
        } else {
            Level((p * LEVEL_DENOMINATOR as f64) as u128)
        }
    }

    /// The level at which a clock's entry arrives.
    #[inline]
    pub fn of_clock(clock: u64) -> Self {
        Level(clock as u128 + 1)
    }

    #[inline]
    pub fn admits(self, clock: u64) -> bool {
        (clock as u128) < self.0
    }

    pub fn numerator(self) -> u128 {
        self.0
    }

    pub fn denominator(self) -> u128 {
        LEVEL_DENOMINATOR
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / LEVEL_DENOMINATOR as f64
    }

    /// The level just before this one (no entry arrives strictly between).
    pub fn predecessor(self) -> Self {
        Level(self.0.saturating_sub(1))
    }
}

/// One 64-bit uniform clock per off-diagonal entry, generated from a seed by
/// a counter-based stream indexed by the pair.
#[derive(Clone, PartialEq, Eq)]
pub struct UniformField {
    n: usize,
    model: Model,
    seed: u64,
    clocks: Vec<u64>,
}

impl UniformField {
    pub fn new(n: usize, model: Model, seed: u64) -> Result<Self, ProcessError> {
        if n < 2 {
            return Err(ProcessError::DimensionTooSmall(n));
        }
        let pairs = match model {
            Model::Asymmetric => n * (n - 1),
            Model::Symmetric => n * (n - 1) / 2,
        };
        let key = rng::derive_key(rng::mix64(seed), model as u64);
        let clocks = (0..pairs as u64).map(|k| rng::draw(key, k)).collect();
        Ok(Self {
            n,
            model,
            seed,
            clocks,
        })
    }

    /// Builds a field from explicit clocks, laid out in pair-index order:
    /// row-major over `j != i` for the asymmetric model, and row-major over
    /// `i < j` for the symmetric model.
    pub fn from_clocks(n: usize, model: Model, clocks: Vec<u64>) -> Result<Self, ProcessError> {
        if n < 2 {
            return Err(ProcessError::DimensionTooSmall(n));
        }
        let expected = match model {
            Model::Asymmetric => n * (n - 1),
            Model::Symmetric => n * (n - 1) / 2,
        };
        if clocks.len() != expected {
            return Err(ProcessError::ClockCount {
                expected,
                found: clocks.len(),
            });
        }
        Ok(Self {
            n,
            model,
            seed: 0,
            clocks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn clocks(&self) -> &[u64] {
        &self.clocks
    }

    pub fn pair_count(&self) -> usize {
        self.clocks.len()
    }

    #[inline]
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i < self.n && j < self.n);
        match self.model {
            Model::Asymmetric => i * (self.n - 1) + if j > i { j - 1 } else { j },
            Model::Symmetric => {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                a * (2 * self.n - a - 1) / 2 + (b - a - 1)
            }
        }
    }

    /// The clock of entry `(i, j)`. Panics on the diagonal.
    #[inline]
    pub fn clock(&self, i: usize, j: usize) -> u64 {
        assert!(i != j, "diagonal entries carry no clock");
        self.clocks[self.pair_index(i, j)]
    }

    /// All entries `(i, j)` (with `i < j` for the symmetric model) sorted by
    /// arrival; ties fall back to lexicographic pair order.
    pub fn arrivals(&self) -> Vec<(u64, usize, usize)> {
        let mut out = Vec::with_capacity(self.clocks.len());
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j || (self.model == Model::Symmetric && j < i) {
                    continue;
                }
                out.push((self.clock(i, j), i, j));
            }
        }
        out.sort_unstable();
        out
    }
}

impl fmt::Debug for UniformField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UniformField")
            .field("n", &self.n)
            .field("model", &self.model)
            .field("seed", &self.seed)
            .field("pairs", &self.clocks.len())
            .finish()
    }
}
