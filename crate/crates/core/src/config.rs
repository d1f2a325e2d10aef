//! Run configuration: one struct holding every knob of an experiment, plus
//! the validation that names each violated invariant individually.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::arena::ArenaConfig;
use crate::competence::CompetenceMeasure;
use crate::interest::SplitStrategy;
use crate::types::{MotorBounds, SensingMode};

/// The four experiment setups, named after what they change.
///
/// Each mode fixes the sensing mode and supplies defaults for the competence
/// measure and the split strategy; a config may override the latter two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Binary object presence, Euclidean competence, best-interest split.
    Baseline,
    /// Embedding sensing with bounded-cosine competence, best-interest split.
    EuclideanEmbedding,
    /// Embedding-plus-position sensing, bounded-cosine competence,
    /// cosine-variance split.
    CosineSplitEmbedding,
    /// Plain embedding sensing (no positional features, noisier views),
    /// bounded-cosine competence, cosine-variance split.
    CosineSplitDino,
}

impl Mode {
    pub fn sensing(&self) -> SensingMode {
        match self {
            Mode::Baseline => SensingMode::BinaryPresence,
            Mode::EuclideanEmbedding => SensingMode::Embedding,
            Mode::CosineSplitEmbedding => SensingMode::EmbeddingPlusPosition,
            Mode::CosineSplitDino => SensingMode::Embedding,
        }
    }

    pub fn default_competence(&self) -> CompetenceMeasure {
        match self {
            Mode::Baseline => CompetenceMeasure::Euclidean,
            _ => CompetenceMeasure::BoundedCosine,
        }
    }

    pub fn default_split(&self) -> SplitStrategy {
        match self {
            Mode::Baseline | Mode::EuclideanEmbedding => SplitStrategy::BestInterest,
            Mode::CosineSplitEmbedding | Mode::CosineSplitDino => SplitStrategy::CosineVariance,
        }
    }

    /// Per-coordinate view noise. The Dino-like mode models the noisier
    /// segmentation pipeline with 4x the default sigma.
    pub fn default_view_noise_sigma(&self) -> f64 {
        match self {
            Mode::CosineSplitDino => 0.04,
            _ => 0.01,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::EuclideanEmbedding => "euclidean-embedding",
            Mode::CosineSplitEmbedding => "cosine-split-embedding",
            Mode::CosineSplitDino => "cosine-split-dino",
        }
    }

    pub const ALL: [Mode; 4] = [
        Mode::Baseline,
        Mode::EuclideanEmbedding,
        Mode::CosineSplitEmbedding,
        Mode::CosineSplitDino,
    ];
}

impl core::str::FromStr for Mode {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "euclidean-embedding" => Ok(Mode::EuclideanEmbedding),
            "cosine-split-embedding" => Ok(Mode::CosineSplitEmbedding),
            "cosine-split-dino" => Ok(Mode::CosineSplitDino),
            _ => Err("expected one of: baseline, euclidean-embedding, \
                      cosine-split-embedding, cosine-split-dino"),
        }
    }
}

/// Hyperparameters of the words-as-classifiers evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundingConfig {
    /// Fraction of each category used for training.
    pub train_ratio: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Negative budget per classifier as a multiple of its positive count,
    /// capped by what the other categories hold. 1.0 reproduces equal-count
    /// sampling; infinity uses every other category's training vectors,
    /// which keeps each classifier exposed to the whole sensory space.
    pub negative_ratio: f64,
    /// Fraction of each classifier's negative budget reserved for adjacent
    /// categories; the rest is drawn uniformly from all other categories.
    /// 1.0 gives adjacent categories first claim on the whole budget.
    pub neighbor_negative_share: f64,
    /// Categories with fewer total samples than this are still trained but
    /// flagged low-support in the report.
    pub low_support_threshold: usize,
}

impl Default for GroundingConfig {
    fn default() -> Self {
        Self {
            train_ratio: 0.8,
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-3,
            negative_ratio: f64::INFINITY,
            neighbor_negative_share: 0.5,
            low_support_threshold: 5,
        }
    }
}

/// Full configuration of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Number of action/perception turns.
    pub turns: usize,
    /// Likelihood of sampling a motor goal uniformly at random.
    pub epsilon: f64,
    /// Lookback window for the learning-progress estimate.
    pub lp_window: usize,
    /// A region splits when its record count would exceed this.
    pub max_region_size: usize,
    /// Minimum records a split must leave on each side.
    pub min_leaf_size: usize,
    /// Neighbors used by the forward model's local regression.
    pub knn_k: usize,
    /// Optional distance kernel on the local regression (off by default).
    pub lwlr_distance_weighting: bool,
    pub seed: u64,
    pub mode: Mode,
    pub split_strategy: SplitStrategy,
    pub competence_measure: CompetenceMeasure,
    pub motor_bounds: MotorBounds,
    pub arena: ArenaConfig,
    pub grounding: GroundingConfig,
}

impl RunConfig {
    /// Paper-default parameters with the sensing/measure/split combination
    /// implied by `mode`.
    pub fn for_mode(mode: Mode) -> Self {
        let mut arena = ArenaConfig::default();
        arena.view_noise_sigma = mode.default_view_noise_sigma();
        Self {
            turns: 300,
            epsilon: 0.1,
            lp_window: 10,
            max_region_size: 30,
            min_leaf_size: 4,
            knn_k: 5,
            lwlr_distance_weighting: false,
            seed: 0,
            mode,
            split_strategy: mode.default_split(),
            competence_measure: mode.default_competence(),
            motor_bounds: MotorBounds::default(),
            arena,
            grounding: GroundingConfig::default(),
        }
    }

    pub fn sensing(&self) -> SensingMode {
        self.mode.sensing()
    }

    /// Sensory vector length implied by mode and arena embedding size.
    pub fn sensory_dim(&self) -> usize {
        self.sensing().dimension(self.arena.embed_dim)
    }

    /// Checks every config invariant, collecting one named violation per
    /// failed field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut v: Vec<String> = Vec::new();
        if self.turns < 1 {
            v.push(format!("turns must be >= 1 (got {})", self.turns));
        }
        if !(0.0..=1.0).contains(&self.epsilon) || !self.epsilon.is_finite() {
            v.push(format!("epsilon must be within [0, 1] (got {})", self.epsilon));
        }
        if self.lp_window < 2 {
            v.push(format!("lp_window must be >= 2 (got {})", self.lp_window));
        }
        if self.min_leaf_size < 1 {
            v.push(format!("min_leaf_size must be >= 1 (got {})", self.min_leaf_size));
        }
        if self.max_region_size < 2 * self.min_leaf_size {
            v.push(format!(
                "max_region_size must be >= 2 * min_leaf_size (got {} < {})",
                self.max_region_size,
                2 * self.min_leaf_size
            ));
        }
        if self.knn_k < 1 {
            v.push(format!("knn_k must be >= 1 (got {})", self.knn_k));
        }
        let (rl, rh) = self.motor_bounds.rotation;
        let (tl, th) = self.motor_bounds.travel;
        if !(rl.is_finite() && rh.is_finite() && rl < rh) {
            v.push(format!("motor_bounds.rotation must be a finite low < high pair (got {rl}..{rh})"));
        }
        if !(tl.is_finite() && th.is_finite() && tl < th) {
            v.push(format!("motor_bounds.travel must be a finite low < high pair (got {tl}..{th})"));
        }
        self.arena.collect_violations(&mut v);
        let g = &self.grounding;
        if !(g.train_ratio > 0.0 && g.train_ratio < 1.0) {
            v.push(format!("grounding.train_ratio must be within (0, 1) (got {})", g.train_ratio));
        }
        if !(g.learning_rate > 0.0) {
            v.push(format!("grounding.learning_rate must be > 0 (got {})", g.learning_rate));
        }
        if g.epochs < 1 {
            v.push(format!("grounding.epochs must be >= 1 (got {})", g.epochs));
        }
        if g.l2 < 0.0 {
            v.push(format!("grounding.l2 must be >= 0 (got {})", g.l2));
        }
        if !(g.negative_ratio > 0.0) {
            v.push(format!("grounding.negative_ratio must be > 0 (got {})", g.negative_ratio));
        }
        if !(0.0..=1.0).contains(&g.neighbor_negative_share) {
            v.push(format!(
                "grounding.neighbor_negative_share must be within [0, 1] (got {})",
                g.neighbor_negative_share
            ));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations: v })
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::for_mode(Mode::CosineSplitEmbedding)
    }
}

/// One entry per violated invariant, each naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: ")?;
        for (i, violation) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{violation}")?;
        }
        Ok(())
    }
}
