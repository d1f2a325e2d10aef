//! Scalar measures of prediction quality between a target (predicted) and a
//! reached (actual) sensory vector.
//!
//! Both measures are negated distances, so competence is always `<= 0` and a
//! perfect prediction scores exactly `0`. Learning progress is then
//! "competence moving toward zero" regardless of which measure a run uses.

use core::fmt;

use crate::mathf;
use crate::types::SensoryVector;
use crate::vecmath;

/// A prediction-quality score, dimensionless, `<= 0` (higher is better).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Competence(f64);

impl Competence {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Wrap a stored competence value (used when replaying a run log).
    pub fn from_value(value: f64) -> Self {
        Self(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureError {
    DimensionMismatch { target: usize, effect: usize },
    /// Cosine measures are undefined for zero-norm vectors. The arena never
    /// emits one (the whitespace sentinel has norm sqrt(D)), so this is an
    /// error rather than a silent epsilon fix.
    ZeroNorm,
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::DimensionMismatch { target, effect } => write!(
                f,
                "sensory dimension mismatch: target has {target}, effect has {effect}"
            ),
            MeasureError::ZeroNorm => write!(f, "cosine measure undefined for zero-norm vector"),
        }
    }
}

fn check_dims(t: &SensoryVector, e: &SensoryVector) -> Result<(), MeasureError> {
    if t.dim() != e.dim() {
        return Err(MeasureError::DimensionMismatch {
            target: t.dim(),
            effect: e.dim(),
        });
    }
    Ok(())
}

/// Negated Euclidean distance: `-(||t - e||)`.
pub fn euclidean_competence(
    t: &SensoryVector,
    e: &SensoryVector,
) -> Result<Competence, MeasureError> {
    check_dims(t, e)?;
    let sq: f64 = t
        .values()
        .iter()
        .zip(e.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(Competence(-mathf::sqrt(sq)))
}

/// Cosine distance `1 - cos(t, e)`, in `[0, 2]`.
///
/// The similarity is clamped to `[-1, 1]` so float round-off on collinear
/// vectors cannot push the distance outside its range (which would flip the
/// competence sign).
pub fn cosine_distance(t: &SensoryVector, e: &SensoryVector) -> Result<f64, MeasureError> {
    check_dims(t, e)?;
    let sim =
        vecmath::cosine_similarity(t.values(), e.values()).ok_or(MeasureError::ZeroNorm)?;
    Ok(1.0 - sim.clamp(-1.0, 1.0))
}

/// Bounded cosine competence: `-(1 - e^(-2 d))` with `d = 1 - cos(t, e)`.
///
/// The magnitude stays below 1 for every input pair (the supremum over
/// `d in [0, 2]` is `1 - e^-4 ~= 0.9817`), and the value is 0 exactly when
/// the vectors point the same way — making the measure scale-invariant and
/// usable across embedding dimensions.
pub fn bounded_cosine_competence(
    t: &SensoryVector,
    e: &SensoryVector,
) -> Result<Competence, MeasureError> {
    let d = cosine_distance(t, e)?;
    Ok(Competence(-(1.0 - mathf::exp(-2.0 * d))))
}

/// Which competence measure a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompetenceMeasure {
    Euclidean,
    BoundedCosine,
}

impl CompetenceMeasure {
    pub fn score(
        &self,
        t: &SensoryVector,
        e: &SensoryVector,
    ) -> Result<Competence, MeasureError> {
        match self {
            CompetenceMeasure::Euclidean => euclidean_competence(t, e),
            CompetenceMeasure::BoundedCosine => bounded_cosine_competence(t, e),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CompetenceMeasure::Euclidean => "euclidean",
            CompetenceMeasure::BoundedCosine => "bounded-cosine",
        }
    }
}

impl core::str::FromStr for CompetenceMeasure {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(CompetenceMeasure::Euclidean),
            "bounded-cosine" => Ok(CompetenceMeasure::BoundedCosine),
            _ => Err("expected one of: euclidean, bounded-cosine"),
        }
    }
}
