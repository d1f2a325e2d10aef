//! Domain types shared by every module: motor commands, sensory vectors,
//! and the per-turn record the run loop appends to.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::competence::Competence;

/// Number of positional features appended in
/// [`SensingMode::EmbeddingPlusPosition`].
pub const POSITION_FEATURES: usize = 4;

/// A point in the 2D interest space: a single rotation followed by a single
/// linear movement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorCommand {
    /// Rotation in degrees, positive counter-clockwise from the initial facing.
    pub rotation_deg: f64,
    /// Linear travel in millimeters along the new heading; negative is backward.
    pub travel_mm: f64,
}

impl MotorCommand {
    pub fn new(rotation_deg: f64, travel_mm: f64) -> Self {
        Self {
            rotation_deg,
            travel_mm,
        }
    }
}

/// Rectangular bounds of the motor interest space.
///
/// Fixed at rotation `[-180, 180]` degrees and travel `[-80, 80]` mm by
/// default (the robot's physical limits), but carried in the run config so
/// tests can shrink the space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorBounds {
    pub rotation: (f64, f64),
    pub travel: (f64, f64),
}

impl MotorBounds {
    /// Both endpoints inclusive; this is the root region's containment rule.
    pub fn contains(&self, m: &MotorCommand) -> bool {
        m.rotation_deg >= self.rotation.0
            && m.rotation_deg <= self.rotation.1
            && m.travel_mm >= self.travel.0
            && m.travel_mm <= self.travel.1
    }
}

impl Default for MotorBounds {
    fn default() -> Self {
        Self {
            rotation: (-180.0, 180.0),
            travel: (-80.0, 80.0),
        }
    }
}

/// How the environment reports what the robot sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingMode {
    /// Scalar `+1` when an object is detected, `-1` otherwise.
    BinaryPresence,
    /// A D-dimensional embedding-like vector for the object in view.
    Embedding,
    /// The embedding vector with four appended positional features
    /// (apparent width, apparent height, horizontal offset, vertical proxy).
    EmbeddingPlusPosition,
}

impl SensingMode {
    /// Total sensory dimension for this mode given the configured embedding
    /// size. Constant for an entire run.
    pub fn dimension(&self, embed_dim: usize) -> usize {
        match self {
            SensingMode::BinaryPresence => 1,
            SensingMode::Embedding => embed_dim,
            SensingMode::EmbeddingPlusPosition => embed_dim + POSITION_FEATURES,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SensingMode::BinaryPresence => "binary-presence",
            SensingMode::Embedding => "embedding",
            SensingMode::EmbeddingPlusPosition => "embedding-plus-position",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SensoryVectorError {
    /// A `BinaryPresence` vector must be exactly `[+1]` or `[-1]`.
    NotBinary,
    Empty,
}

impl fmt::Display for SensoryVectorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensoryVectorError::NotBinary => {
                write!(f, "binary-presence vectors must be exactly [+1] or [-1]")
            }
            SensoryVectorError::Empty => write!(f, "sensory vectors must be non-empty"),
        }
    }
}

/// The sensory effect of an action: a scalar in baseline mode, an
/// embedding-like vector otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SensoryVector {
    mode: SensingMode,
    values: Vec<f64>,
}

impl SensoryVector {
    /// An observed (environment-emitted) vector; enforces the mode's shape
    /// invariants.
    pub fn new(mode: SensingMode, values: Vec<f64>) -> Result<Self, SensoryVectorError> {
        if values.is_empty() {
            return Err(SensoryVectorError::Empty);
        }
        if mode == SensingMode::BinaryPresence
            && (values.len() != 1 || (values[0] != 1.0 && values[0] != -1.0))
        {
            return Err(SensoryVectorError::NotBinary);
        }
        Ok(Self { mode, values })
    }

    /// A model *estimate* of a sensory effect. Estimates share the mode and
    /// dimension of observations but are unconstrained reals — a regression
    /// over binary outputs legitimately predicts values between -1 and +1.
    pub fn estimate(mode: SensingMode, values: Vec<f64>) -> Self {
        Self { mode, values }
    }

    pub fn binary(present: bool) -> Self {
        Self {
            mode: SensingMode::BinaryPresence,
            values: vec![if present { 1.0 } else { -1.0 }],
        }
    }

    /// The constant "nothing in view" vector: `[-1]` repeated across the
    /// mode's full dimension. Emitted exactly (no noise) for every failed
    /// observation, and used as the bootstrap prediction before the forward
    /// model has data.
    pub fn sentinel(mode: SensingMode, dim: usize) -> Self {
        let dim = match mode {
            SensingMode::BinaryPresence => 1,
            _ => dim,
        };
        Self {
            mode,
            values: vec![-1.0; dim],
        }
    }

    pub fn mode(&self) -> SensingMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// One entry of the run log: everything the loop knew about a single
/// action/perception turn.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnRecord {
    pub turn_index: usize,
    pub motor_goal: MotorCommand,
    pub predicted: SensoryVector,
    pub actual: SensoryVector,
    pub competence: Competence,
    /// Leaf that contained `motor_goal` at the time of the turn (before any
    /// split this turn triggered).
    pub region_id: u32,
    pub was_random_sample: bool,
}

/// Normalize an angle to the half-open interval `(-180, 180]`.
///
/// Panics on non-finite input.
pub fn wrap_angle(deg: f64) -> f64 {
    assert!(deg.is_finite(), "wrap_angle requires a finite angle");
    let mut r = deg % 360.0;
    if r <= -180.0 {
        r += 360.0;
    } else if r > 180.0 {
        r -= 360.0;
    }
    r
}
