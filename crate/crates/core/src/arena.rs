//! Deterministic simulated arena standing in for the physical robot and its
//! vision stack.
//!
//! The robot executes a motor command from the center of a small rectangular
//! space: it rotates (with a bounded drift that resets on the periodic
//! re-centering), travels along the new heading, and then reports what it
//! sees. At most one object is reported per turn — the one closest to the
//! heading within the field of view. Visible objects produce an
//! embedding-like unit vector perturbed along two fixed per-object view
//! directions (angular offset and range), plus per-coordinate Gaussian
//! noise; everything else produces the exact whitespace sentinel.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::mathf;
use crate::types::{wrap_angle, MotorBounds, MotorCommand, SensingMode, SensoryVector};
use crate::vecmath;

/// An object placed in the arena. The name is an opaque label for plots and
/// manifests only; it never reaches the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub name: String,
    pub angle_deg: f64,
    pub distance_mm: f64,
    /// Seed of the object's synthetic embedding basis.
    pub embedding_seed: u64,
}

/// Arena geometry, scene, and sensing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ArenaConfig {
    pub width_mm: f64,
    pub height_mm: f64,
    pub objects: Vec<SceneObject>,
    /// Half-aperture of the field of view.
    pub half_fov_deg: f64,
    /// Per-turn rotation drift is uniform in `[-drift_deg, +drift_deg]` and
    /// accumulates until the next re-centering.
    pub drift_deg: f64,
    /// Drift resets at the start of every n-th turn.
    pub recenter_every: usize,
    pub embed_dim: usize,
    /// Sigma of the per-coordinate Gaussian noise on visible embeddings.
    pub view_noise_sigma: f64,
    /// Weight of the angular-offset view perturbation.
    pub angle_sensitivity: f64,
    /// Weight of the range view perturbation.
    pub distance_sensitivity: f64,
}

impl Default for ArenaConfig {
    fn default() -> Self {
        Self {
            width_mm: 762.0,
            height_mm: 508.0,
            objects: vec![
                SceneObject {
                    name: String::from("cat"),
                    angle_deg: 55.0,
                    distance_mm: 250.0,
                    embedding_seed: 11,
                },
                SceneObject {
                    name: String::from("elephant"),
                    angle_deg: 180.0,
                    distance_mm: 250.0,
                    embedding_seed: 23,
                },
            ],
            half_fov_deg: 15.0,
            drift_deg: 2.0,
            recenter_every: 5,
            embed_dim: 384,
            view_noise_sigma: 0.01,
            angle_sensitivity: 0.5,
            distance_sensitivity: 0.5,
        }
    }
}

impl ArenaConfig {
    pub(crate) fn collect_violations(&self, v: &mut alloc::vec::Vec<String>) {
        use alloc::format;
        if !(self.width_mm > 0.0 && self.height_mm > 0.0) {
            v.push(format!(
                "arena.width_mm/height_mm must be > 0 (got {}x{})",
                self.width_mm, self.height_mm
            ));
        }
        if !(self.half_fov_deg > 0.0) {
            v.push(format!("arena.half_fov_deg must be > 0 (got {})", self.half_fov_deg));
        }
        if !(self.drift_deg >= 0.0) {
            v.push(format!("arena.drift_deg must be >= 0 (got {})", self.drift_deg));
        }
        if self.recenter_every < 1 {
            v.push(format!("arena.recenter_every must be >= 1 (got {})", self.recenter_every));
        }
        if self.embed_dim < 2 {
            v.push(format!("arena.embed_dim must be >= 2 (got {})", self.embed_dim));
        }
        if !(self.view_noise_sigma >= 0.0) {
            v.push(format!("arena.view_noise_sigma must be >= 0 (got {})", self.view_noise_sigma));
        }
        let reach = mathf::hypot(self.width_mm / 2.0, self.height_mm / 2.0);
        for (i, o) in self.objects.iter().enumerate() {
            if !(o.angle_deg > -180.0 && o.angle_deg <= 180.0) {
                v.push(format!(
                    "arena.objects[{i}].angle_deg must be within (-180, 180] (got {})",
                    o.angle_deg
                ));
            }
            if !(o.distance_mm > 0.0 && o.distance_mm <= reach) {
                v.push(format!(
                    "arena.objects[{i}].distance_mm must be within (0, {reach:.1}] (got {})",
                    o.distance_mm
                ));
            }
        }
    }

    /// Geometry that two runs must share to be comparable.
    pub fn scene_signature(&self) -> Vec<(f64, f64)> {
        self.objects.iter().map(|o| (o.angle_deg, o.distance_mm)).collect()
    }
}

/// What the perception proxy reported for one turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percept {
    pub visible: bool,
    /// Index into the scene's object list, present iff visible.
    pub object_index: Option<usize>,
    /// Signed angular offset of the nearest-by-angle object from the heading.
    pub offset_deg: f64,
    /// Distance from the robot (after travel) to that object.
    pub range_mm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArenaError {
    MotorOutOfBounds { rotation_deg: f64, travel_mm: f64 },
    /// Default-seeded object embeddings were not separated enough even after
    /// reseeding attempts (only reachable with tiny embedding dimensions).
    IndistinctObjects,
}

impl fmt::Display for ArenaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArenaError::MotorOutOfBounds { rotation_deg, travel_mm } => write!(
                f,
                "motor command ({rotation_deg} deg, {travel_mm} mm) exceeds the motor bounds"
            ),
            ArenaError::IndistinctObjects => {
                write!(f, "could not derive sufficiently separated object embeddings")
            }
        }
    }
}

/// Deterministic basis of an object's synthetic appearance: a base unit
/// vector plus two unit directions (orthogonalized against the base) along
/// which the view changes with angular offset and range.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewBasis {
    pub base: Vec<f64>,
    pub angle_dir: Vec<f64>,
    pub range_dir: Vec<f64>,
}

/// Pseudo-random unit vector derived from the object's embedding seed alone;
/// the same seed and dimension always produce the same vector.
pub fn base_embedding(object: &SceneObject, dim: usize) -> Vec<f64> {
    object_view_basis_salted(object, dim, 0).base
}

/// The object's full view basis (base + two orthogonalized directions).
pub fn object_view_basis(object: &SceneObject, dim: usize) -> ViewBasis {
    object_view_basis_salted(object, dim, 0)
}

fn object_view_basis_salted(object: &SceneObject, dim: usize, salt: u64) -> ViewBasis {
    let seed = object.embedding_seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let base = random_unit(&mut rng, dim);
    let angle_dir = orthonormal_to(&mut rng, dim, &[&base]);
    let range_dir = orthonormal_to(&mut rng, dim, &[&base, &angle_dir]);
    ViewBasis { base, angle_dir, range_dir }
}

fn random_unit(rng: &mut ChaCha12Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let n = vecmath::norm(&v);
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn orthonormal_to(rng: &mut ChaCha12Rng, dim: usize, against: &[&[f64]]) -> Vec<f64> {
    loop {
        let mut v = random_unit(rng, dim);
        for basis in against {
            let proj = vecmath::dot(&v, basis);
            for (x, b) in v.iter_mut().zip(basis.iter()) {
                *x -= proj * b;
            }
        }
        let n = vecmath::norm(&v);
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Box-Muller standard normal. Hand-rolled so the draw sequence is pinned by
/// this crate rather than by a distribution crate's internals.
pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    mathf::sqrt(-2.0 * mathf::ln(u1)) * mathf::cos(core::f64::consts::TAU * u2)
}

/// The sequential arena state machine: owns the drift accumulator and the
/// arena's RNG stream.
#[derive(Debug, Clone)]
pub struct Arena {
    config: ArenaConfig,
    mode: SensingMode,
    motor_bounds: MotorBounds,
    bases: Vec<ViewBasis>,
    drift_accum_deg: f64,
    rng: ChaCha12Rng,
}

impl Arena {
    /// Builds the per-object view bases and verifies cross-object separation
    /// (cosine distance between base embeddings > 0.5), reseeding
    /// deterministically if the check fails.
    pub fn new(
        config: ArenaConfig,
        mode: SensingMode,
        motor_bounds: MotorBounds,
        rng: ChaCha12Rng,
    ) -> Result<Self, ArenaError> {
        let mut bases = Vec::new();
        if mode == SensingMode::BinaryPresence {
            // No embeddings needed.
        } else {
            let mut ok = false;
            for salt in 0..32u64 {
                bases = config
                    .objects
                    .iter()
                    .map(|o| object_view_basis_salted(o, config.embed_dim, salt))
                    .collect();
                ok = separated(&bases);
                if ok {
                    break;
                }
            }
            if !ok {
                return Err(ArenaError::IndistinctObjects);
            }
        }
        Ok(Self { config, mode, motor_bounds, bases, drift_accum_deg: 0.0, rng })
    }

    pub fn config(&self) -> &ArenaConfig {
        &self.config
    }

    pub fn mode(&self) -> SensingMode {
        self.mode
    }

    pub fn sensory_dim(&self) -> usize {
        self.mode.dimension(self.config.embed_dim)
    }

    /// Current accumulated rotation drift.
    pub fn drift_deg(&self) -> f64 {
        self.drift_accum_deg
    }

    /// Execute one motor command: apply drift, rotate, travel, perceive.
    pub fn execute(
        &mut self,
        m: &MotorCommand,
        turn: usize,
    ) -> Result<(Percept, SensoryVector), ArenaError> {
        if !self.motor_bounds.contains(m) {
            return Err(ArenaError::MotorOutOfBounds {
                rotation_deg: m.rotation_deg,
                travel_mm: m.travel_mm,
            });
        }
        if turn % self.config.recenter_every == 0 {
            self.drift_accum_deg = 0.0;
        }
        if self.config.drift_deg > 0.0 {
            self.drift_accum_deg +=
                self.rng.gen_range(-self.config.drift_deg..=self.config.drift_deg);
        }
        let heading = wrap_angle(m.rotation_deg + self.drift_accum_deg);
        let heading_rad = mathf::to_radians(heading);
        let position = (
            m.travel_mm * mathf::cos(heading_rad),
            m.travel_mm * mathf::sin(heading_rad),
        );

        let percept = self.perceive(heading, position);
        let sensory = self.synthesize(&percept);
        Ok((percept, sensory))
    }

    fn perceive(&self, heading: f64, position: (f64, f64)) -> Percept {
        let mut nearest: Option<(usize, f64)> = None; // (index, offset)
        for (i, o) in self.config.objects.iter().enumerate() {
            let offset = wrap_angle(o.angle_deg - heading);
            let better = match nearest {
                None => true,
                Some((_, best)) => mathf::abs(offset) < mathf::abs(best),
            };
            if better {
                nearest = Some((i, offset));
            }
        }
        let Some((index, offset)) = nearest else {
            // Empty scene: nothing is ever visible.
            return Percept {
                visible: false,
                object_index: None,
                offset_deg: 180.0,
                range_mm: mathf::hypot(self.config.width_mm, self.config.height_mm),
            };
        };
        let o = &self.config.objects[index];
        let angle_rad = mathf::to_radians(o.angle_deg);
        let obj_pos = (o.distance_mm * mathf::cos(angle_rad), o.distance_mm * mathf::sin(angle_rad));
        let range = mathf::hypot(obj_pos.0 - position.0, obj_pos.1 - position.1);
        let visible = mathf::abs(offset) <= self.config.half_fov_deg;
        Percept {
            visible,
            object_index: visible.then_some(index),
            offset_deg: offset,
            range_mm: range,
        }
    }

    fn synthesize(&mut self, percept: &Percept) -> SensoryVector {
        let dim = self.sensory_dim();
        match self.mode {
            SensingMode::BinaryPresence => SensoryVector::binary(percept.visible),
            SensingMode::Embedding | SensingMode::EmbeddingPlusPosition => {
                if !percept.visible {
                    return SensoryVector::sentinel(self.mode, dim);
                }
                let index = percept.object_index.expect("visible percept names an object");
                let object = &self.config.objects[index];
                let basis = &self.bases[index];
                let cfg = &self.config;

                let angle_coeff =
                    cfg.angle_sensitivity * (percept.offset_deg / cfg.half_fov_deg);
                let range_coeff = cfg.distance_sensitivity
                    * ((percept.range_mm - object.distance_mm) / object.distance_mm);
                let mut v: Vec<f64> = basis
                    .base
                    .iter()
                    .zip(&basis.angle_dir)
                    .zip(&basis.range_dir)
                    .map(|((b, a), r)| b + angle_coeff * a + range_coeff * r)
                    .collect();
                let n = vecmath::norm(&v);
                if n > 1e-9 {
                    for x in v.iter_mut() {
                        *x /= n;
                    }
                } else {
                    v.copy_from_slice(&basis.base);
                }
                if cfg.view_noise_sigma > 0.0 {
                    for x in v.iter_mut() {
                        *x += cfg.view_noise_sigma * standard_normal(&mut self.rng);
                    }
                }
                if self.mode == SensingMode::EmbeddingPlusPosition {
                    let range = percept.range_mm.max(1.0);
                    let apparent = object.distance_mm / range;
                    v.push(apparent); // apparent width
                    v.push(0.75 * apparent); // apparent height
                    v.push(percept.offset_deg / cfg.half_fov_deg); // horizontal offset
                    v.push(0.0); // vertical proxy (flat floor)
                }
                SensoryVector::estimate(self.mode, v)
            }
        }
    }
}

fn separated(bases: &[ViewBasis]) -> bool {
    for i in 0..bases.len() {
        for j in i + 1..bases.len() {
            let sim = vecmath::cosine_similarity(&bases[i].base, &bases[j].base)
                .expect("unit vectors have norm 1");
            if 1.0 - sim <= 0.5 {
                return false;
            }
        }
    }
    true
}
