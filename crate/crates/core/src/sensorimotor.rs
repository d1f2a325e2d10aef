//! The forward model: full sensorimotor history plus prediction of the
//! sensory effect of a motor command via linear regression over the k
//! nearest stored motor commands.
//!
//! Exactness is a requirement here, not an aspiration: the k-NN index must
//! agree with a brute-force scan (including tie order), and on noise-free
//! affine environments the regression must interpolate to within the ridge
//! bias. Datasets stay small (a few hundred points per run), so the index is
//! rebuilt from scratch on each insertion.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::mathf;
use crate::types::{MotorCommand, SensingMode, SensoryVector};

/// Ridge term on the affine fit; keeps the normal equations solvable when
/// neighbors are collinear or duplicated (the robot revisits similar motors).
const RIDGE_LAMBDA: f64 = 1e-6;

/// Points per KD leaf before splitting stops.
const KD_LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetError {
    Empty,
    DimensionMismatch { expected: usize, got: usize },
    ModeMismatch,
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::Empty => write!(f, "sensorimotor dataset is empty"),
            DatasetError::DimensionMismatch { expected, got } => {
                write!(f, "sensory dimension mismatch: dataset holds {expected}, got {got}")
            }
            DatasetError::ModeMismatch => write!(f, "sensing mode differs from the dataset's"),
        }
    }
}

/// Paired motor/sensory history with an exact nearest-neighbor index over
/// the motor coordinates.
#[derive(Debug, Clone)]
pub struct SensorimotorDataset {
    motors: Vec<MotorCommand>,
    sensors: Vec<SensoryVector>,
    index: KdTree,
    distance_weighting: bool,
}

impl Default for SensorimotorDataset {
    fn default() -> Self {
        Self::new()
    }
}

impl SensorimotorDataset {
    pub fn new() -> Self {
        Self {
            motors: Vec::new(),
            sensors: Vec::new(),
            index: KdTree::empty(),
            distance_weighting: false,
        }
    }

    /// Enable the (off-by-default) Gaussian distance kernel on the local
    /// regression.
    pub fn with_distance_weighting(mut self) -> Self {
        self.distance_weighting = true;
        self
    }

    pub fn len(&self) -> usize {
        self.motors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motors.is_empty()
    }

    /// Sensory dimension, fixed by the first insertion.
    pub fn dimension(&self) -> Option<usize> {
        self.sensors.first().map(|s| s.dim())
    }

    pub fn mode(&self) -> Option<SensingMode> {
        self.sensors.first().map(|s| s.mode())
    }

    pub fn motor(&self, i: usize) -> &MotorCommand {
        &self.motors[i]
    }

    pub fn sensor(&self, i: usize) -> &SensoryVector {
        &self.sensors[i]
    }

    /// Append one observation. The first insertion fixes the sensory
    /// dimension and mode for the rest of the run.
    pub fn add_observation(
        &mut self,
        m: MotorCommand,
        s: SensoryVector,
    ) -> Result<(), DatasetError> {
        if let Some(expected) = self.dimension() {
            if s.dim() != expected {
                return Err(DatasetError::DimensionMismatch { expected, got: s.dim() });
            }
            if Some(s.mode()) != self.mode() {
                return Err(DatasetError::ModeMismatch);
            }
        }
        self.motors.push(m);
        self.sensors.push(s);
        self.index = KdTree::build(&self.motors);
        Ok(())
    }

    /// Indices of the `k` nearest stored motors, ordered by (distance,
    /// insertion index); ties in distance are broken toward earlier
    /// insertions.
    pub fn nearest(&self, m: &MotorCommand, k: usize) -> Vec<usize> {
        self.index.nearest(&self.motors, m, k)
    }

    /// Predict the sensory effect of `m` with an affine fit over its `k`
    /// nearest neighbors (ridge-regularized least squares). With a single
    /// neighbor the stored sensory vector is returned exactly.
    ///
    /// The fit is centered: the ridge term shrinks only the two slope
    /// coefficients, while the intercept stays the (weighted) neighbor mean.
    /// Collinear or fully duplicated neighbors therefore degrade gracefully
    /// toward a local mean instead of producing a singular system.
    pub fn predict(&self, m: &MotorCommand, k: usize) -> Result<SensoryVector, DatasetError> {
        if self.is_empty() {
            return Err(DatasetError::Empty);
        }
        let k = k.max(1).min(self.len());
        let neighbors = self.nearest(m, k);
        if neighbors.len() == 1 {
            return Ok(self.sensors[neighbors[0]].clone());
        }

        let weights = self.neighbor_weights(m, &neighbors);
        let dim = self.dimension().expect("nonempty dataset has a dimension");

        let weight_sum: f64 = weights.iter().sum();
        let mut mean_x = [0.0f64; 2];
        let mut mean_y = vec![0.0f64; dim];
        for (&i, &w) in neighbors.iter().zip(&weights) {
            mean_x[0] += w * self.motors[i].rotation_deg;
            mean_x[1] += w * self.motors[i].travel_mm;
            for (my, y) in mean_y.iter_mut().zip(self.sensors[i].values()) {
                *my += w * y;
            }
        }
        mean_x[0] /= weight_sum;
        mean_x[1] /= weight_sum;
        for my in mean_y.iter_mut() {
            *my /= weight_sum;
        }

        // Normal equations on centered coordinates, shared across all
        // sensory dimensions.
        let mut g = [[RIDGE_LAMBDA, 0.0], [0.0, RIDGE_LAMBDA]];
        let mut rhs = vec![[0.0f64; 2]; dim];
        for (&i, &w) in neighbors.iter().zip(&weights) {
            let cx = [
                self.motors[i].rotation_deg - mean_x[0],
                self.motors[i].travel_mm - mean_x[1],
            ];
            g[0][0] += w * cx[0] * cx[0];
            g[0][1] += w * cx[0] * cx[1];
            g[1][0] += w * cx[1] * cx[0];
            g[1][1] += w * cx[1] * cx[1];
            let y = self.sensors[i].values();
            for ((rj, yv), my) in rhs.iter_mut().zip(y).zip(&mean_y) {
                let cy = yv - my;
                rj[0] += w * cx[0] * cy;
                rj[1] += w * cx[1] * cy;
            }
        }
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0]; // > 0: SPD plus ridge
        let qx = [m.rotation_deg - mean_x[0], m.travel_mm - mean_x[1]];
        let values = rhs
            .iter()
            .zip(&mean_y)
            .map(|(rj, my)| {
                let s0 = (g[1][1] * rj[0] - g[0][1] * rj[1]) / det;
                let s1 = (g[0][0] * rj[1] - g[1][0] * rj[0]) / det;
                my + s0 * qx[0] + s1 * qx[1]
            })
            .collect();
        Ok(SensoryVector::estimate(
            self.mode().expect("nonempty dataset has a mode"),
            values,
        ))
    }

    fn neighbor_weights(&self, m: &MotorCommand, neighbors: &[usize]) -> Vec<f64> {
        if !self.distance_weighting {
            return vec![1.0; neighbors.len()];
        }
        let dists: Vec<f64> = neighbors
            .iter()
            .map(|&i| mathf::sqrt(squared_distance(&self.motors[i], m)))
            .collect();
        let bandwidth = dists.iter().cloned().fold(0.0f64, f64::max);
        if bandwidth == 0.0 {
            return vec![1.0; neighbors.len()];
        }
        dists
            .iter()
            .map(|d| mathf::exp(-(d / bandwidth) * (d / bandwidth)))
            .collect()
    }
}

fn squared_distance(a: &MotorCommand, b: &MotorCommand) -> f64 {
    let dr = a.rotation_deg - b.rotation_deg;
    let dt = a.travel_mm - b.travel_mm;
    dr * dr + dt * dt
}

/// Static KD tree over 2D motor coordinates, rebuilt per insertion.
/// Candidates are ordered by (squared distance, insertion index) so query
/// results are exact and tie-stable.
#[derive(Debug, Clone)]
struct KdTree {
    nodes: Vec<KdNode>,
    root: Option<usize>,
}

#[derive(Debug, Clone)]
enum KdNode {
    Split { axis: usize, value: f64, left: usize, right: usize },
    Leaf { points: Vec<u32> },
}

impl KdTree {
    fn empty() -> Self {
        Self { nodes: Vec::new(), root: None }
    }

    fn build(motors: &[MotorCommand]) -> Self {
        if motors.is_empty() {
            return Self::empty();
        }
        let mut tree = Self { nodes: Vec::new(), root: None };
        let idx: Vec<u32> = (0..motors.len() as u32).collect();
        let root = tree.build_node(motors, idx, 0);
        tree.root = Some(root);
        tree
    }

    fn build_node(&mut self, motors: &[MotorCommand], mut idx: Vec<u32>, depth: usize) -> usize {
        if idx.len() <= KD_LEAF_SIZE {
            self.nodes.push(KdNode::Leaf { points: idx });
            return self.nodes.len() - 1;
        }
        let axis = depth % 2;
        idx.sort_by(|&a, &b| {
            let ca = coord(&motors[a as usize], axis);
            let cb = coord(&motors[b as usize], axis);
            ca.partial_cmp(&cb).expect("finite motor coordinates").then(a.cmp(&b))
        });
        let value = coord(&motors[idx[idx.len() / 2] as usize], axis);
        let split_pos = idx.partition_point(|&i| coord(&motors[i as usize], axis) < value);
        if split_pos == 0 || split_pos == idx.len() {
            // All coordinates equal on this axis; a larger leaf is exact too.
            self.nodes.push(KdNode::Leaf { points: idx });
            return self.nodes.len() - 1;
        }
        let right_idx = idx.split_off(split_pos);
        let left = self.build_node(motors, idx, depth + 1);
        let right = self.build_node(motors, right_idx, depth + 1);
        self.nodes.push(KdNode::Split { axis, value, left, right });
        self.nodes.len() - 1
    }

    fn nearest(&self, motors: &[MotorCommand], q: &MotorCommand, k: usize) -> Vec<usize> {
        let Some(root) = self.root else {
            return Vec::new();
        };
        if k == 0 {
            return Vec::new();
        }
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        self.search(root, motors, q, k, &mut best);
        best.into_iter().map(|(_, i)| i as usize).collect()
    }

    fn search(
        &self,
        node: usize,
        motors: &[MotorCommand],
        q: &MotorCommand,
        k: usize,
        best: &mut Vec<(f64, u32)>,
    ) {
        match &self.nodes[node] {
            KdNode::Leaf { points } => {
                for &i in points {
                    let d2 = squared_distance(&motors[i as usize], q);
                    let cand = (d2, i);
                    if best.len() < k || cand < *best.last().expect("nonempty") {
                        let pos = best.partition_point(|x| *x < cand);
                        best.insert(pos, cand);
                        best.truncate(k);
                    }
                }
            }
            KdNode::Split { axis, value, left, right } => {
                let diff = coord(q, *axis) - value;
                let (near, far) = if diff < 0.0 { (*left, *right) } else { (*right, *left) };
                self.search(near, motors, q, k, best);
                // The far side can still hold an equally distant point with a
                // smaller insertion index, so prune on <= rather than <.
                if best.len() < k || diff * diff <= best.last().expect("nonempty").0 {
                    self.search(far, motors, q, k, best);
                }
            }
        }
    }
}

fn coord(m: &MotorCommand, axis: usize) -> f64 {
    if axis == 0 {
        m.rotation_deg
    } else {
        m.travel_mm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn emb(values: Vec<f64>) -> SensoryVector {
        SensoryVector::estimate(SensingMode::Embedding, values)
    }

    /// Independent neighbor oracle: full scan sorted by (distance, index).
    fn brute_force_knn(motors: &[MotorCommand], q: &MotorCommand, k: usize) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> = motors
            .iter()
            .enumerate()
            .map(|(i, m)| (squared_distance(m, q), i))
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.into_iter().take(k).map(|(_, i)| i).collect()
    }

    fn random_motor(rng: &mut ChaCha12Rng) -> MotorCommand {
        MotorCommand::new(rng.gen_range(-180.0..180.0), rng.gen_range(-80.0..80.0))
    }

    #[test]
    fn observations_grow_and_fix_dimension() {
        let mut ds = SensorimotorDataset::new();
        assert!(ds.is_empty());
        ds.add_observation(MotorCommand::new(0.0, 0.0), emb(vec![1.0, 2.0])).unwrap();
        assert_eq!(ds.len(), 1);
        let err = ds
            .add_observation(MotorCommand::new(1.0, 1.0), emb(vec![1.0]))
            .unwrap_err();
        assert_eq!(err, DatasetError::DimensionMismatch { expected: 2, got: 1 });
        ds.add_observation(MotorCommand::new(1.0, 1.0), emb(vec![0.0, 0.0])).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.nearest(&MotorCommand::new(0.9, 0.9), 1), vec![1]);
    }

    #[test]
    fn knn_matches_brute_force_on_random_points() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let mut ds = SensorimotorDataset::new();
        for _ in 0..100 {
            ds.add_observation(random_motor(&mut rng), emb(vec![rng.gen()])).unwrap();
        }
        let motors: Vec<MotorCommand> = (0..ds.len()).map(|i| *ds.motor(i)).collect();
        for _ in 0..20 {
            let q = random_motor(&mut rng);
            for k in [1, 3, 5, 17, 100] {
                assert_eq!(ds.nearest(&q, k), brute_force_knn(&motors, &q, k));
            }
        }
    }

    #[test]
    fn knn_breaks_distance_ties_by_insertion_order() {
        let mut ds = SensorimotorDataset::new();
        // Four points all at distance 10 from the origin query.
        for (r, t) in [(10.0, 0.0), (0.0, 10.0), (-10.0, 0.0), (0.0, -10.0)] {
            ds.add_observation(MotorCommand::new(r, t), emb(vec![0.0])).unwrap();
        }
        assert_eq!(ds.nearest(&MotorCommand::new(0.0, 0.0), 2), vec![0, 1]);
        // Duplicated coordinates: earlier index wins.
        let mut dup = SensorimotorDataset::new();
        for _ in 0..3 {
            dup.add_observation(MotorCommand::new(5.0, 5.0), emb(vec![0.0])).unwrap();
        }
        assert_eq!(dup.nearest(&MotorCommand::new(0.0, 0.0), 2), vec![0, 1]);
    }

    #[test]
    fn single_point_fallback_returns_stored_sensor() {
        let mut ds = SensorimotorDataset::new();
        ds.add_observation(MotorCommand::new(0.0, 0.0), emb(vec![0.25])).unwrap();
        let p = ds.predict(&MotorCommand::new(123.0, -45.0), 5).unwrap();
        assert_eq!(p.values(), &[0.25]);
    }

    #[test]
    fn k1_returns_nearest_sensor_exactly() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut ds = SensorimotorDataset::new();
        for i in 0..40 {
            ds.add_observation(random_motor(&mut rng), emb(vec![i as f64])).unwrap();
        }
        for _ in 0..10 {
            let q = random_motor(&mut rng);
            let nearest = ds.nearest(&q, 1)[0];
            assert_eq!(ds.predict(&q, 1).unwrap(), *ds.sensor(nearest));
        }
    }

    /// Independent least-squares oracle for the three-point affine fixture:
    /// the exact interpolant of ((0,0)->0, (10,0)->1, (0,10)->2) is
    /// s = 0.1*rot + 0.2*trav, so s(10,10) = 3.
    #[test]
    fn affine_fixture_matches_least_squares_oracle() {
        let mut ds = SensorimotorDataset::new();
        ds.add_observation(MotorCommand::new(0.0, 0.0), emb(vec![0.0])).unwrap();
        ds.add_observation(MotorCommand::new(10.0, 0.0), emb(vec![1.0])).unwrap();
        ds.add_observation(MotorCommand::new(0.0, 10.0), emb(vec![2.0])).unwrap();
        let p = ds.predict(&MotorCommand::new(10.0, 10.0), 3).unwrap();
        let oracle = 0.1 * 10.0 + 0.2 * 10.0;
        assert!((p.values()[0] - oracle).abs() < 1e-6, "got {}", p.values()[0]);
    }

    #[test]
    fn noise_free_linear_environment_interpolates() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut ds = SensorimotorDataset::new();
        let truth = |m: &MotorCommand| 2.0 * m.rotation_deg + 3.0 * m.travel_mm;
        for _ in 0..50 {
            let m = random_motor(&mut rng);
            ds.add_observation(m, emb(vec![truth(&m)])).unwrap();
        }
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let q = random_motor(&mut rng);
            let p = ds.predict(&q, 5).unwrap();
            worst = worst.max((p.values()[0] - truth(&q)).abs());
        }
        assert!(worst < 1e-6, "max held-out error {worst}");
    }

    #[test]
    fn multi_dimensional_affine_environment_interpolates() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let mut ds = SensorimotorDataset::new();
        let truth = |m: &MotorCommand| {
            vec![
                0.5 * m.rotation_deg - 1.0 * m.travel_mm + 4.0,
                -0.25 * m.rotation_deg + 0.125 * m.travel_mm,
            ]
        };
        for _ in 0..60 {
            let m = random_motor(&mut rng);
            ds.add_observation(m, emb(truth(&m))).unwrap();
        }
        for _ in 0..20 {
            let q = random_motor(&mut rng);
            let p = ds.predict(&q, 5).unwrap();
            let want = truth(&q);
            for (got, want) in p.values().iter().zip(&want) {
                assert!((got - want).abs() < 1e-6, "got {got}, want {want}");
            }
        }
    }

    #[test]
    fn prediction_depends_only_on_neighbors() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let mut ds = SensorimotorDataset::new();
        // A tight cluster near the origin and one far-away point.
        for _ in 0..6 {
            let m = MotorCommand::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            ds.add_observation(m, emb(vec![rng.gen()])).unwrap();
        }
        ds.add_observation(MotorCommand::new(170.0, 70.0), emb(vec![1234.0])).unwrap();

        let q = MotorCommand::new(0.0, 0.0);
        let before = ds.predict(&q, 5).unwrap();

        // Replace the non-neighbor datum and re-insert the cluster in the
        // same order: the prediction must be bit-identical.
        let mut other = SensorimotorDataset::new();
        for i in 0..6 {
            other.add_observation(*ds.motor(i), ds.sensor(i).clone()).unwrap();
        }
        other.add_observation(MotorCommand::new(150.0, -60.0), emb(vec![-9.0])).unwrap();
        let after = other.predict(&q, 5).unwrap();
        assert_eq!(before.values(), after.values());
    }

    #[test]
    fn identical_insertions_give_identical_predictions() {
        let build = || {
            let mut rng = ChaCha12Rng::seed_from_u64(23);
            let mut ds = SensorimotorDataset::new();
            for _ in 0..30 {
                let m = random_motor(&mut rng);
                ds.add_observation(m, emb(vec![rng.gen(), rng.gen()])).unwrap();
            }
            ds
        };
        let (a, b) = (build(), build());
        let q = MotorCommand::new(12.0, -34.0);
        assert_eq!(a.predict(&q, 5).unwrap(), b.predict(&q, 5).unwrap());
    }

    #[test]
    fn empty_dataset_prediction_is_an_error() {
        let ds = SensorimotorDataset::new();
        assert_eq!(ds.predict(&MotorCommand::new(0.0, 0.0), 5).unwrap_err(), DatasetError::Empty);
    }

    #[test]
    fn duplicate_neighbors_survive_via_ridge() {
        let mut ds = SensorimotorDataset::new();
        for _ in 0..5 {
            ds.add_observation(MotorCommand::new(10.0, 10.0), emb(vec![2.0])).unwrap();
        }
        let p = ds.predict(&MotorCommand::new(10.0, 10.0), 5).unwrap();
        assert!((p.values()[0] - 2.0).abs() < 1e-6);
        assert!(p.values()[0].is_finite());
    }
}
