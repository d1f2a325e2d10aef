//! The curiosity engine: a KD-style region tree over the motor interest
//! space. Each leaf accumulates records, carries a learning-progress score,
//! and is the unit both of goal sampling (epsilon-greedy over learning
//! progress) and of category discovery (leaves are the unlabeled
//! categories).
//!
//! Splits alternate axes with depth, fire when a leaf's record count exceeds
//! the configured maximum, and choose the split value by one of two
//! strategies: maximizing the disparity of learning progress between the
//! children, or minimizing the within-side variance of cosine similarity of
//! the sensory vectors.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::competence::Competence;
use crate::mathf;
use crate::types::{MotorBounds, MotorCommand, SensoryVector};
use crate::vecmath;

/// One observation stored in a leaf: the executed motor goal, the reached
/// sensory vector, and the prediction competence it scored.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRecord {
    pub motor: MotorCommand,
    pub sensory: SensoryVector,
    pub competence: Competence,
    pub turn_index: usize,
}

/// Axis a region splits along; forced by depth parity (even depths split on
/// rotation, odd on travel).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitAxis {
    Rotation,
    Travel,
}

impl SplitAxis {
    pub fn for_depth(depth: usize) -> Self {
        if depth % 2 == 0 {
            SplitAxis::Rotation
        } else {
            SplitAxis::Travel
        }
    }

    pub fn coord(&self, m: &MotorCommand) -> f64 {
        match self {
            SplitAxis::Rotation => m.rotation_deg,
            SplitAxis::Travel => m.travel_mm,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SplitAxis::Rotation => "rotation",
            SplitAxis::Travel => "travel",
        }
    }
}

/// How an over-capacity leaf picks its split value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitStrategy {
    /// Maximize `n_left * n_right * (lp_left - lp_right)^2`.
    BestInterest,
    /// Minimize the record-weighted mean of the per-side population variance
    /// of cosine similarity to the side centroid.
    CosineVariance,
}

impl SplitStrategy {
    pub fn choose(
        &self,
        records: &[RegionRecord],
        depth: usize,
        config: &TreeConfig,
    ) -> Option<(SplitAxis, f64)> {
        match self {
            SplitStrategy::BestInterest => best_interest_split(records, depth, config),
            SplitStrategy::CosineVariance => cosine_variance_split(records, depth, config),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SplitStrategy::BestInterest => "best-interest",
            SplitStrategy::CosineVariance => "cosine-variance",
        }
    }
}

impl core::str::FromStr for SplitStrategy {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "best-interest" => Ok(SplitStrategy::BestInterest),
            "cosine-variance" => Ok(SplitStrategy::CosineVariance),
            _ => Err("expected one of: best-interest, cosine-variance"),
        }
    }
}

/// Region-tree parameters, lifted from the run config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub max_region_size: usize,
    pub lp_window: usize,
    pub min_leaf_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterestError {
    OutOfBounds { rotation_deg: f64, travel_mm: f64 },
}

impl fmt::Display for InterestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterestError::OutOfBounds { rotation_deg, travel_mm } => write!(
                f,
                "motor command ({rotation_deg} deg, {travel_mm} mm) is outside the interest space"
            ),
        }
    }
}

#[derive(Debug, Clone)]
enum RegionKind {
    Leaf { records: Vec<RegionRecord>, learning_progress: f64 },
    Internal { axis: SplitAxis, value: f64, children: Box<[Region; 2]> },
}

/// A node of the region tree. Leaves hold records and a learning-progress
/// score; internal nodes hold the split and two children that partition the
/// parent's bounds. Node ids are unique and never reused; a split leaves the
/// parent's id on the internal node.
#[derive(Debug, Clone)]
pub struct Region {
    id: u32,
    bounds: MotorBounds,
    depth: usize,
    kind: RegionKind,
}

impl Region {
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn bounds(&self) -> MotorBounds {
        self.bounds
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, RegionKind::Leaf { .. })
    }

    pub fn records(&self) -> Option<&[RegionRecord]> {
        match &self.kind {
            RegionKind::Leaf { records, .. } => Some(records),
            RegionKind::Internal { .. } => None,
        }
    }

    pub fn learning_progress(&self) -> Option<f64> {
        match &self.kind {
            RegionKind::Leaf { learning_progress, .. } => Some(*learning_progress),
            RegionKind::Internal { .. } => None,
        }
    }

    pub fn split(&self) -> Option<(SplitAxis, f64)> {
        match &self.kind {
            RegionKind::Internal { axis, value, .. } => Some((*axis, *value)),
            RegionKind::Leaf { .. } => None,
        }
    }

    pub fn children(&self) -> Option<(&Region, &Region)> {
        match &self.kind {
            RegionKind::Internal { children, .. } => Some((&children[0], &children[1])),
            RegionKind::Leaf { .. } => None,
        }
    }

    /// Containment under the tree's boundary convention: lower-inclusive,
    /// upper-exclusive, except along the root's upper edges which stay
    /// inclusive so routing is total.
    pub fn contains(&self, m: &MotorCommand, root: &MotorBounds) -> bool {
        let within = |lo: f64, hi: f64, root_hi: f64, x: f64| {
            x >= lo && (x < hi || (hi == root_hi && x == hi))
        };
        within(self.bounds.rotation.0, self.bounds.rotation.1, root.rotation.1, m.rotation_deg)
            && within(self.bounds.travel.0, self.bounds.travel.1, root.travel.1, m.travel_mm)
    }
}

/// Summary of one leaf, as reported by [`RegionTree::leaves`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafInfo {
    pub id: u32,
    pub bounds: MotorBounds,
    pub depth: usize,
    pub record_count: usize,
    pub learning_progress: f64,
}

/// Result of [`RegionTree::update`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateOutcome {
    /// Leaf the record was routed to (before any split this update caused).
    pub leaf_id: u32,
    pub split: Option<SplitInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitInfo {
    pub parent_id: u32,
    pub axis: SplitAxis,
    pub value: f64,
    pub left_id: u32,
    pub right_id: u32,
}

/// KD-style discretization of the interest space.
#[derive(Debug, Clone)]
pub struct RegionTree {
    root: Region,
    next_id: u32,
    config: TreeConfig,
}

impl RegionTree {
    pub fn new(bounds: MotorBounds, config: TreeConfig) -> Self {
        Self {
            root: Region {
                id: 0,
                bounds,
                depth: 0,
                kind: RegionKind::Leaf { records: Vec::new(), learning_progress: 0.0 },
            },
            next_id: 1,
            config,
        }
    }

    pub fn root(&self) -> &Region {
        &self.root
    }

    pub fn bounds(&self) -> MotorBounds {
        self.root.bounds
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    /// Id of the unique leaf whose bounds contain `m`.
    pub fn route(&self, m: &MotorCommand) -> Result<u32, InterestError> {
        if !self.root.bounds.contains(m) {
            return Err(InterestError::OutOfBounds {
                rotation_deg: m.rotation_deg,
                travel_mm: m.travel_mm,
            });
        }
        let mut cur = &self.root;
        while let RegionKind::Internal { axis, value, children } = &cur.kind {
            cur = if axis.coord(m) < *value { &children[0] } else { &children[1] };
        }
        Ok(cur.id)
    }

    /// Append a record to the routed leaf, refresh its learning progress,
    /// and split it when its record count exceeds the configured maximum and
    /// the strategy finds a feasible value. A leaf with no feasible split
    /// keeps its records; the split is re-attempted on each later insertion.
    pub fn update(
        &mut self,
        m: MotorCommand,
        s: SensoryVector,
        competence: Competence,
        turn_index: usize,
        strategy: SplitStrategy,
    ) -> Result<UpdateOutcome, InterestError> {
        if !self.root.bounds.contains(&m) {
            return Err(InterestError::OutOfBounds {
                rotation_deg: m.rotation_deg,
                travel_mm: m.travel_mm,
            });
        }
        let record = RegionRecord { motor: m, sensory: s, competence, turn_index };
        let config = self.config;
        Ok(update_region(&mut self.root, record, strategy, &config, &mut self.next_id))
    }

    /// Epsilon-greedy goal sampling: with probability `epsilon` a uniform
    /// draw over the whole space, otherwise a uniform draw within the leaf
    /// of maximal learning progress (ties broken uniformly at random).
    pub fn sample_motor_goal<R: Rng + ?Sized>(
        &self,
        epsilon: f64,
        rng: &mut R,
    ) -> (MotorCommand, bool) {
        let roll: f64 = rng.gen();
        if roll < epsilon {
            return (sample_within(&self.root.bounds, rng), true);
        }
        let mut leaves: Vec<(&MotorBounds, f64)> = Vec::new();
        collect_leaf_refs(&self.root, &mut leaves);
        let best = leaves.iter().map(|(_, lp)| *lp).fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<&MotorBounds> = leaves
            .iter()
            .filter(|(_, lp)| *lp == best)
            .map(|(b, _)| *b)
            .collect();
        let pick = tied[rng.gen_range(0..tied.len())];
        (sample_within(pick, rng), false)
    }

    /// All leaves in id order.
    pub fn leaves(&self) -> Vec<LeafInfo> {
        let mut out = Vec::new();
        collect_leaf_info(&self.root, &mut out);
        out.sort_by_key(|l| l.id);
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    /// Number of splits performed so far (= internal node count).
    pub fn split_count(&self) -> usize {
        fn count(r: &Region) -> usize {
            match r.children() {
                Some((l, rt)) => 1 + count(l) + count(rt),
                None => 0,
            }
        }
        count(&self.root)
    }

    pub fn total_records(&self) -> usize {
        fn count(r: &Region) -> usize {
            match &r.kind {
                RegionKind::Leaf { records, .. } => records.len(),
                RegionKind::Internal { children, .. } => count(&children[0]) + count(&children[1]),
            }
        }
        count(&self.root)
    }

    /// Records of the leaf with the given id, if it exists and is a leaf.
    pub fn leaf_records(&self, id: u32) -> Option<&[RegionRecord]> {
        fn find(r: &Region, id: u32) -> Option<&Region> {
            if r.id == id {
                return Some(r);
            }
            let (l, rt) = r.children()?;
            find(l, id).or_else(|| find(rt, id))
        }
        find(&self.root, id).and_then(|r| r.records())
    }
}

fn sample_within<R: Rng + ?Sized>(bounds: &MotorBounds, rng: &mut R) -> MotorCommand {
    let rotation = rng.gen_range(bounds.rotation.0..bounds.rotation.1);
    let travel = rng.gen_range(bounds.travel.0..bounds.travel.1);
    MotorCommand::new(rotation, travel)
}

fn collect_leaf_refs<'a>(region: &'a Region, out: &mut Vec<(&'a MotorBounds, f64)>) {
    match &region.kind {
        RegionKind::Leaf { learning_progress, .. } => out.push((&region.bounds, *learning_progress)),
        RegionKind::Internal { children, .. } => {
            collect_leaf_refs(&children[0], out);
            collect_leaf_refs(&children[1], out);
        }
    }
}

fn collect_leaf_info(region: &Region, out: &mut Vec<LeafInfo>) {
    match &region.kind {
        RegionKind::Leaf { records, learning_progress } => out.push(LeafInfo {
            id: region.id,
            bounds: region.bounds,
            depth: region.depth,
            record_count: records.len(),
            learning_progress: *learning_progress,
        }),
        RegionKind::Internal { children, .. } => {
            collect_leaf_info(&children[0], out);
            collect_leaf_info(&children[1], out);
        }
    }
}

fn update_region(
    region: &mut Region,
    record: RegionRecord,
    strategy: SplitStrategy,
    config: &TreeConfig,
    next_id: &mut u32,
) -> UpdateOutcome {
    if let RegionKind::Internal { axis, value, children } = &mut region.kind {
        let child = if axis.coord(&record.motor) < *value {
            &mut children[0]
        } else {
            &mut children[1]
        };
        return update_region(child, record, strategy, config, next_id);
    }

    let leaf_id = region.id;
    let (over_capacity, choice) = {
        let RegionKind::Leaf { records, learning_progress } = &mut region.kind else {
            unreachable!("internal nodes are handled above");
        };
        records.push(record);
        *learning_progress = learning_progress_of(records, config.lp_window);
        let over = records.len() > config.max_region_size;
        let choice = if over {
            strategy.choose(records, region.depth, config)
        } else {
            None
        };
        (over, choice)
    };

    let split = match (over_capacity, choice) {
        (true, Some((axis, value))) => {
            let RegionKind::Leaf { records, .. } = core::mem::replace(
                &mut region.kind,
                RegionKind::Leaf { records: Vec::new(), learning_progress: 0.0 },
            ) else {
                unreachable!("leaf checked above");
            };
            let (left_records, right_records): (Vec<_>, Vec<_>) =
                records.into_iter().partition(|r| axis.coord(&r.motor) < value);
            let (left_bounds, right_bounds) = split_bounds(&region.bounds, axis, value);
            let left = Region {
                id: *next_id,
                bounds: left_bounds,
                depth: region.depth + 1,
                kind: RegionKind::Leaf {
                    learning_progress: learning_progress_of(&left_records, config.lp_window),
                    records: left_records,
                },
            };
            let right = Region {
                id: *next_id + 1,
                bounds: right_bounds,
                depth: region.depth + 1,
                kind: RegionKind::Leaf {
                    learning_progress: learning_progress_of(&right_records, config.lp_window),
                    records: right_records,
                },
            };
            let info = SplitInfo {
                parent_id: region.id,
                axis,
                value,
                left_id: left.id,
                right_id: right.id,
            };
            *next_id += 2;
            region.kind = RegionKind::Internal { axis, value, children: Box::new([left, right]) };
            Some(info)
        }
        _ => None,
    };

    UpdateOutcome { leaf_id, split }
}

fn split_bounds(bounds: &MotorBounds, axis: SplitAxis, value: f64) -> (MotorBounds, MotorBounds) {
    let mut left = *bounds;
    let mut right = *bounds;
    match axis {
        SplitAxis::Rotation => {
            left.rotation.1 = value;
            right.rotation.0 = value;
        }
        SplitAxis::Travel => {
            left.travel.1 = value;
            right.travel.0 = value;
        }
    }
    (left, right)
}

/// Learning progress over a competence series: the absolute difference
/// between the mean of the newer half and the mean of the older half of the
/// last `window` values. Fewer than two values mean no evidence, hence 0.
pub fn learning_progress(series: &[Competence], window: usize) -> f64 {
    let values: Vec<f64> = series.iter().map(|c| c.value()).collect();
    learning_progress_values(&values, window)
}

fn learning_progress_of(records: &[RegionRecord], window: usize) -> f64 {
    let values: Vec<f64> = records.iter().map(|r| r.competence.value()).collect();
    learning_progress_values(&values, window)
}

fn learning_progress_values(values: &[f64], window: usize) -> f64 {
    let w = window.min(values.len());
    if w < 2 {
        return 0.0;
    }
    let tail = &values[values.len() - w..];
    let half = w / 2;
    let older = &tail[..half];
    let newer = &tail[half..];
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    mathf::abs(mean(newer) - mean(older))
}

/// Midpoints between consecutive distinct sorted coordinates on `axis` that
/// leave at least `min_leaf` records on each side (checked by actual
/// comparison against the midpoint, so float rounding cannot produce an
/// empty child).
fn feasible_candidates(records: &[RegionRecord], axis: SplitAxis, min_leaf: usize) -> Vec<f64> {
    let mut coords: Vec<f64> = records.iter().map(|r| axis.coord(&r.motor)).collect();
    coords.sort_by(|a, b| a.partial_cmp(b).expect("finite motor coordinates"));
    let mut out = Vec::new();
    for pair in coords.windows(2) {
        if pair[0] < pair[1] {
            let mid = (pair[0] + pair[1]) / 2.0;
            let left = records.iter().filter(|r| axis.coord(&r.motor) < mid).count();
            let right = records.len() - left;
            if left >= min_leaf && right >= min_leaf {
                out.push(mid);
            }
        }
    }
    out
}

/// Split value maximizing `n_left * n_right * (lp_left - lp_right)^2` over
/// the feasible candidates; ties go to the smallest value. `None` when no
/// candidate is feasible.
pub fn best_interest_split(
    records: &[RegionRecord],
    depth: usize,
    config: &TreeConfig,
) -> Option<(SplitAxis, f64)> {
    let axis = SplitAxis::for_depth(depth);
    let mut best: Option<(f64, f64)> = None; // (score, value)
    for value in feasible_candidates(records, axis, config.min_leaf_size) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for r in records {
            if axis.coord(&r.motor) < value {
                left.push(r.competence.value());
            } else {
                right.push(r.competence.value());
            }
        }
        let lp_left = learning_progress_values(&left, config.lp_window);
        let lp_right = learning_progress_values(&right, config.lp_window);
        let diff = lp_left - lp_right;
        let score = left.len() as f64 * right.len() as f64 * diff * diff;
        if best.is_none() || score > best.expect("checked").0 {
            best = Some((score, value));
        }
    }
    best.map(|(_, value)| (axis, value))
}

/// Split value minimizing the record-weighted mean of per-side population
/// variance of cosine similarity to the side centroid; ties go to the
/// smallest value. Candidates whose side centroid (or any member vector) has
/// zero norm are infeasible; `None` when nothing remains.
pub fn cosine_variance_split(
    records: &[RegionRecord],
    depth: usize,
    config: &TreeConfig,
) -> Option<(SplitAxis, f64)> {
    let axis = SplitAxis::for_depth(depth);
    let mut best: Option<(f64, f64)> = None; // (objective, value)
    for value in feasible_candidates(records, axis, config.min_leaf_size) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for r in records {
            if axis.coord(&r.motor) < value {
                left.push(r.sensory.values());
            } else {
                right.push(r.sensory.values());
            }
        }
        let (Some(var_left), Some(var_right)) =
            (side_similarity_variance(&left), side_similarity_variance(&right))
        else {
            continue;
        };
        let n_left = left.len() as f64;
        let n_right = right.len() as f64;
        let objective = (n_left * var_left + n_right * var_right) / (n_left + n_right);
        if best.is_none() || objective < best.expect("checked").0 {
            best = Some((objective, value));
        }
    }
    best.map(|(_, value)| (axis, value))
}

/// Population variance of the cosine similarities between each vector and
/// the side centroid. `None` if the centroid or any member has zero norm.
fn side_similarity_variance(vectors: &[&[f64]]) -> Option<f64> {
    let centroid = vecmath::centroid(vectors);
    let mut sims = Vec::with_capacity(vectors.len());
    for v in vectors {
        sims.push(vecmath::cosine_similarity(v, &centroid)?);
    }
    Some(vecmath::mean_variance(&sims).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::SensingMode;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn comp(v: f64) -> Competence {
        Competence::from_value(v)
    }

    fn emb(values: Vec<f64>) -> SensoryVector {
        SensoryVector::estimate(SensingMode::Embedding, values)
    }

    fn rec(rot: f64, trav: f64, c: f64, turn: usize) -> RegionRecord {
        RegionRecord {
            motor: MotorCommand::new(rot, trav),
            sensory: emb(vec![1.0]),
            competence: comp(c),
            turn_index: turn,
        }
    }

    fn test_config() -> TreeConfig {
        TreeConfig { max_region_size: 30, lp_window: 10, min_leaf_size: 4 }
    }

    fn full_bounds() -> MotorBounds {
        MotorBounds::default()
    }

    // ------------------------------------------------------------------
    // learning progress

    #[test]
    fn lp_empty_series_is_zero() {
        assert_eq!(learning_progress(&[], 10), 0.0);
        assert_eq!(learning_progress(&[comp(-0.5)], 10), 0.0);
    }

    #[test]
    fn lp_half_window_step() {
        let series: Vec<Competence> =
            [-1.0, -1.0, -1.0, -1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0].map(comp).to_vec();
        assert_eq!(learning_progress(&series, 10), 1.0);
    }

    #[test]
    fn lp_constant_series_is_zero() {
        let series: Vec<Competence> = [-0.5; 10].map(comp).to_vec();
        assert_eq!(learning_progress(&series, 10), 0.0);
    }

    #[test]
    fn lp_uses_only_the_window_tail() {
        // Ancient history outside the window must not matter.
        let mut series: Vec<Competence> = [-100.0; 50].map(comp).to_vec();
        series.extend([-1.0, -1.0, -1.0, -1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0].map(comp));
        assert_eq!(learning_progress(&series, 10), 1.0);
    }

    // ------------------------------------------------------------------
    // routing

    #[test]
    fn fresh_tree_routes_everything_to_root() {
        let tree = RegionTree::new(full_bounds(), test_config());
        assert_eq!(tree.route(&MotorCommand::new(0.0, 0.0)).unwrap(), 0);
        assert_eq!(tree.route(&MotorCommand::new(-180.0, 80.0)).unwrap(), 0);
        assert_eq!(tree.route(&MotorCommand::new(180.0, -80.0)).unwrap(), 0);
    }

    #[test]
    fn route_rejects_out_of_bounds() {
        let tree = RegionTree::new(full_bounds(), test_config());
        assert!(tree.route(&MotorCommand::new(181.0, 0.0)).is_err());
        assert!(tree.route(&MotorCommand::new(0.0, -80.1)).is_err());
    }

    fn tree_split_at_zero() -> RegionTree {
        // Fill with 15 records at rotation -10 and 16 at +10 so the single
        // feasible rotation midpoint is 0.
        let mut tree = RegionTree::new(full_bounds(), test_config());
        for turn in 0..31 {
            let rot = if turn % 2 == 0 { -10.0 } else { 10.0 };
            tree.update(
                MotorCommand::new(rot, 0.0),
                emb(vec![1.0]),
                comp(-0.5),
                turn,
                SplitStrategy::BestInterest,
            )
            .unwrap();
        }
        assert_eq!(tree.split_count(), 1);
        tree
    }

    #[test]
    fn route_respects_partition_after_split() {
        let tree = tree_split_at_zero();
        let left = tree.route(&MotorCommand::new(-10.0, 0.0)).unwrap();
        let right = tree.route(&MotorCommand::new(10.0, 0.0)).unwrap();
        assert_ne!(left, right);
        assert_eq!(tree.route(&MotorCommand::new(0.0, 0.0)).unwrap(), right); // boundary goes right
        assert_eq!(tree.leaves().len(), 2);
    }

    #[test]
    fn routing_always_lands_in_the_containing_leaf() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut tree = RegionTree::new(full_bounds(), test_config());
        let root = tree.bounds();
        for turn in 0..1000 {
            let m = MotorCommand::new(rng.gen_range(-180.0..180.0), rng.gen_range(-80.0..80.0));
            let routed = tree.route(&m).unwrap();
            // Brute-force containment over all leaves: exactly one contains m.
            let mut containing = Vec::new();
            fn walk(r: &Region, m: &MotorCommand, root: &MotorBounds, out: &mut Vec<u32>) {
                if let Some((l, rt)) = r.children() {
                    walk(l, m, root, out);
                    walk(rt, m, root, out);
                } else if r.contains(m, root) {
                    out.push(r.id());
                }
            }
            walk(tree.root(), &m, &root, &mut containing);
            assert_eq!(containing, vec![routed]);
            tree.update(m, emb(vec![rng.gen(), rng.gen()]), comp(-rng.gen::<f64>()), turn,
                SplitStrategy::BestInterest)
                .unwrap();
        }
        assert!(tree.split_count() > 0, "the test should have exercised splits");
    }

    // ------------------------------------------------------------------
    // sampling

    #[test]
    fn epsilon_one_forces_random_branch() {
        let tree = tree_split_at_zero();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (m, random) = tree.sample_motor_goal(1.0, &mut rng);
            assert!(random);
            assert!(tree.bounds().contains(&m));
        }
    }

    #[test]
    fn epsilon_zero_samples_the_argmax_leaf() {
        // Two leaves; raise LP in the left one by feeding it an improving
        // competence series.
        let mut tree = tree_split_at_zero();
        for turn in 31..41 {
            let c = if turn < 36 { -1.0 } else { 0.0 };
            tree.update(
                MotorCommand::new(-10.0, 0.0),
                emb(vec![1.0]),
                comp(c),
                turn,
                SplitStrategy::BestInterest,
            )
            .unwrap();
        }
        let leaves = tree.leaves();
        let best = leaves
            .iter()
            .max_by(|a, b| a.learning_progress.partial_cmp(&b.learning_progress).unwrap())
            .unwrap();
        assert!(best.learning_progress > 0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (m, random) = tree.sample_motor_goal(0.0, &mut rng);
            assert!(!random);
            assert!(m.rotation_deg >= best.bounds.rotation.0);
            assert!(m.rotation_deg < best.bounds.rotation.1);
        }
    }

    #[test]
    fn epsilon_frequency_concentrates() {
        let tree = RegionTree::new(full_bounds(), test_config());
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut randoms = 0usize;
        let n = 10_000;
        for _ in 0..n {
            let (_, random) = tree.sample_motor_goal(0.1, &mut rng);
            randoms += random as usize;
        }
        let freq = randoms as f64 / n as f64;
        assert!((0.08..=0.12).contains(&freq), "random frequency {freq}");
    }

    // ------------------------------------------------------------------
    // update / split mechanics

    #[test]
    fn thirty_first_record_splits_and_conserves_records() {
        let tree = tree_split_at_zero();
        let leaves = tree.leaves();
        assert_eq!(leaves.len(), 2);
        assert_eq!(leaves.iter().map(|l| l.record_count).sum::<usize>(), 31);
        assert!(leaves.iter().all(|l| l.record_count >= 4));
        // Parent id 0 is gone from the leaf list; children got fresh ids.
        assert!(leaves.iter().all(|l| l.id != 0));
    }

    #[test]
    fn identical_motors_defer_the_split() {
        let mut tree = RegionTree::new(full_bounds(), test_config());
        for turn in 0..31 {
            tree.update(
                MotorCommand::new(5.0, 5.0),
                emb(vec![1.0]),
                comp(-0.5),
                turn,
                SplitStrategy::BestInterest,
            )
            .unwrap();
        }
        assert_eq!(tree.leaf_count(), 1);
        assert_eq!(tree.leaves()[0].record_count, 31);
        // A later spread-out record makes a split feasible again.
        for (i, rot) in [-120.0, -100.0, -90.0, -80.0].iter().enumerate() {
            tree.update(
                MotorCommand::new(*rot, 0.0),
                emb(vec![1.0]),
                comp(-0.5),
                31 + i,
                SplitStrategy::BestInterest,
            )
            .unwrap();
        }
        assert_eq!(tree.leaf_count(), 2);
        assert_eq!(tree.total_records(), 35);
    }

    #[test]
    fn update_is_local_to_the_routed_leaf() {
        let mut tree = tree_split_at_zero();
        let before: Vec<LeafInfo> = tree.leaves();
        tree.update(
            MotorCommand::new(-10.0, 0.0),
            emb(vec![1.0]),
            comp(-0.25),
            100,
            SplitStrategy::BestInterest,
        )
        .unwrap();
        let after = tree.leaves();
        // The right leaf (rotation >= 0) is bit-identical.
        let right_before = before.iter().find(|l| l.bounds.rotation.0 == 0.0).unwrap();
        let right_after = after.iter().find(|l| l.bounds.rotation.0 == 0.0).unwrap();
        assert_eq!(right_before, right_after);
    }

    // ------------------------------------------------------------------
    // split objectives vs exhaustive oracles

    /// Independent re-derivation of the best-interest choice: enumerate every
    /// midpoint of consecutive distinct sorted coordinates, apply the
    /// feasibility rule, and recompute the objective from scratch.
    fn oracle_best_interest(
        records: &[RegionRecord],
        depth: usize,
        config: &TreeConfig,
    ) -> Option<(SplitAxis, f64)> {
        let axis = SplitAxis::for_depth(depth);
        let mut coords: Vec<f64> = records.iter().map(|r| axis.coord(&r.motor)).collect();
        coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut best: Option<(f64, f64)> = None;
        for i in 0..coords.len().saturating_sub(1) {
            if coords[i] >= coords[i + 1] {
                continue;
            }
            let mid = (coords[i] + coords[i + 1]) / 2.0;
            let left: Vec<f64> = records
                .iter()
                .filter(|r| axis.coord(&r.motor) < mid)
                .map(|r| r.competence.value())
                .collect();
            let right: Vec<f64> = records
                .iter()
                .filter(|r| axis.coord(&r.motor) >= mid)
                .map(|r| r.competence.value())
                .collect();
            if left.len() < config.min_leaf_size || right.len() < config.min_leaf_size {
                continue;
            }
            let lp = |xs: &[f64]| {
                let w = config.lp_window.min(xs.len());
                if w < 2 {
                    return 0.0;
                }
                let tail = &xs[xs.len() - w..];
                let older = &tail[..w / 2];
                let newer = &tail[w / 2..];
                let m = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
                (m(newer) - m(older)).abs()
            };
            let d = lp(&left) - lp(&right);
            let q = left.len() as f64 * right.len() as f64 * d * d;
            if best.is_none() || q > best.unwrap().0 {
                best = Some((q, mid));
            }
        }
        best.map(|(_, v)| (axis, v))
    }

    /// Independent re-derivation of the cosine-variance choice.
    fn oracle_cosine_variance(
        records: &[RegionRecord],
        depth: usize,
        config: &TreeConfig,
    ) -> Option<(SplitAxis, f64)> {
        let axis = SplitAxis::for_depth(depth);
        let mut coords: Vec<f64> = records.iter().map(|r| axis.coord(&r.motor)).collect();
        coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let var_of = |side: &[&RegionRecord]| -> Option<f64> {
            let dim = side[0].sensory.dim();
            let mut centroid = vec![0.0f64; dim];
            for r in side {
                for (c, v) in centroid.iter_mut().zip(r.sensory.values()) {
                    *c += v;
                }
            }
            for c in centroid.iter_mut() {
                *c /= side.len() as f64;
            }
            let cn = centroid.iter().map(|x| x * x).sum::<f64>().sqrt();
            if cn == 0.0 {
                return None;
            }
            let mut sims = Vec::new();
            for r in side {
                let vn = r.sensory.values().iter().map(|x| x * x).sum::<f64>().sqrt();
                if vn == 0.0 {
                    return None;
                }
                let dot: f64 =
                    r.sensory.values().iter().zip(&centroid).map(|(a, b)| a * b).sum();
                sims.push(dot / (vn * cn));
            }
            let mean = sims.iter().sum::<f64>() / sims.len() as f64;
            Some(sims.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / sims.len() as f64)
        };
        let mut best: Option<(f64, f64)> = None;
        for i in 0..coords.len().saturating_sub(1) {
            if coords[i] >= coords[i + 1] {
                continue;
            }
            let mid = (coords[i] + coords[i + 1]) / 2.0;
            let left: Vec<&RegionRecord> =
                records.iter().filter(|r| axis.coord(&r.motor) < mid).collect();
            let right: Vec<&RegionRecord> =
                records.iter().filter(|r| axis.coord(&r.motor) >= mid).collect();
            if left.len() < config.min_leaf_size || right.len() < config.min_leaf_size {
                continue;
            }
            let (Some(vl), Some(vr)) = (var_of(&left), var_of(&right)) else { continue };
            let j = (left.len() as f64 * vl + right.len() as f64 * vr)
                / (left.len() + right.len()) as f64;
            if best.is_none() || j < best.unwrap().0 {
                best = Some((j, mid));
            }
        }
        best.map(|(_, v)| (axis, v))
    }

    fn random_leaf(rng: &mut ChaCha12Rng, n: usize, duplicate_coords: bool) -> Vec<RegionRecord> {
        (0..n)
            .map(|turn| {
                let rot = if duplicate_coords && rng.gen_bool(0.5) {
                    (rng.gen_range(-3i32..3)) as f64 * 10.0
                } else {
                    rng.gen_range(-180.0..180.0)
                };
                let trav = if duplicate_coords && rng.gen_bool(0.5) {
                    (rng.gen_range(-2i32..2)) as f64 * 20.0
                } else {
                    rng.gen_range(-80.0..80.0)
                };
                RegionRecord {
                    motor: MotorCommand::new(rot, trav),
                    sensory: emb((0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()),
                    competence: comp(-rng.gen::<f64>()),
                    turn_index: turn,
                }
            })
            .collect()
    }

    #[test]
    fn best_interest_matches_exhaustive_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let config = test_config();
        for trial in 0..1000 {
            let n = rng.gen_range(31..40);
            let records = random_leaf(&mut rng, n, trial % 3 == 0);
            let depth = rng.gen_range(0..4);
            assert_eq!(
                best_interest_split(&records, depth, &config),
                oracle_best_interest(&records, depth, &config),
                "trial {trial}"
            );
        }
    }

    #[test]
    fn cosine_variance_matches_exhaustive_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let config = test_config();
        for trial in 0..1000 {
            let n = rng.gen_range(31..40);
            let records = random_leaf(&mut rng, n, trial % 3 == 1);
            let depth = rng.gen_range(0..4);
            assert_eq!(
                cosine_variance_split(&records, depth, &config),
                oracle_cosine_variance(&records, depth, &config),
                "trial {trial}"
            );
        }
    }

    #[test]
    fn best_interest_single_feasible_midpoint() {
        // 15 records at coordinate 0, 16 at coordinate 10: the only feasible
        // rotation midpoint is 5. Left competences improve, right are flat.
        let mut records = Vec::new();
        for turn in 0..15 {
            let c = if turn < 7 { -1.0 } else { 0.0 };
            records.push(rec(0.0, 0.0, c, turn));
        }
        for turn in 15..31 {
            records.push(rec(10.0, 0.0, -0.5, turn));
        }
        let config = test_config();
        assert_eq!(
            best_interest_split(&records, 0, &config),
            Some((SplitAxis::Rotation, 5.0))
        );
    }

    #[test]
    fn split_returns_none_when_axis_is_degenerate() {
        // Distinct travel values but the forced axis (depth 0 = rotation)
        // has a single coordinate.
        let records: Vec<RegionRecord> =
            (0..31).map(|t| rec(7.0, t as f64, -0.5, t)).collect();
        let config = test_config();
        assert_eq!(best_interest_split(&records, 0, &config), None);
        assert_eq!(cosine_variance_split(&records, 0, &config), None);
        // At depth 1 the travel axis is forced and splits fine.
        assert!(best_interest_split(&records, 1, &config).is_some());
    }

    #[test]
    fn cosine_variance_zero_within_side_variance() {
        // Left records share vector A, right records share vector B (not
        // collinear): the A/B midpoint has objective 0.
        let mut records = Vec::new();
        for turn in 0..15 {
            records.push(RegionRecord {
                motor: MotorCommand::new(-10.0, 0.0),
                sensory: emb(vec![1.0, 0.0]),
                competence: comp(-0.5),
                turn_index: turn,
            });
        }
        for turn in 15..31 {
            records.push(RegionRecord {
                motor: MotorCommand::new(10.0, 0.0),
                sensory: emb(vec![0.0, 1.0]),
                competence: comp(-0.5),
                turn_index: turn,
            });
        }
        let config = test_config();
        assert_eq!(
            cosine_variance_split(&records, 0, &config),
            Some((SplitAxis::Rotation, 0.0))
        );
    }

    #[test]
    fn cosine_variance_tie_takes_smallest_candidate() {
        // All 31 records share one sensory vector: every feasible candidate
        // has objective 0, so the smallest one wins.
        let records: Vec<RegionRecord> =
            (0..31).map(|t| rec(t as f64, 0.0, -0.5, t)).collect();
        let config = test_config();
        let (axis, value) = cosine_variance_split(&records, 0, &config).unwrap();
        assert_eq!(axis, SplitAxis::Rotation);
        assert_eq!(value, 3.5); // midpoint between the 4th and 5th coordinate
    }

    #[test]
    fn cosine_variance_skips_zero_norm_centroids() {
        // Binary-style +1/-1 scalars whose side centroid would be zero.
        let mut records = Vec::new();
        for turn in 0..31 {
            let v = if turn % 2 == 0 { 1.0 } else { -1.0 };
            records.push(RegionRecord {
                motor: MotorCommand::new(turn as f64, 0.0),
                sensory: emb(vec![v]),
                competence: comp(-0.5),
                turn_index: turn,
            });
        }
        // Candidates with an even left count pair up +1/-1 and cancel; the
        // implementation must skip those rather than divide by zero, and the
        // result must still match the oracle (both skip).
        let config = test_config();
        let got = cosine_variance_split(&records, 0, &config);
        let want = oracle_cosine_variance(&records, 0, &config);
        assert_eq!(got, want);
        if let Some((_, v)) = got {
            assert!(v.is_finite());
        }
    }

    #[test]
    fn cosine_variance_choice_is_scale_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let config = test_config();
        for _ in 0..50 {
            let records = random_leaf(&mut rng, 33, false);
            let scaled: Vec<RegionRecord> = records
                .iter()
                .map(|r| RegionRecord {
                    motor: r.motor,
                    sensory: emb(r.sensory.values().iter().map(|v| v * 37.5).collect()),
                    competence: r.competence,
                    turn_index: r.turn_index,
                })
                .collect();
            let a = cosine_variance_split(&records, 0, &config);
            let b = cosine_variance_split(&scaled, 0, &config);
            match (a, b) {
                (Some((ax, av)), Some((bx, bv))) => {
                    assert_eq!(ax, bx);
                    assert!((av - bv).abs() < 1e-12);
                }
                (a, b) => assert_eq!(a, b),
            }
        }
    }

    // ------------------------------------------------------------------
    // leaves / partition

    #[test]
    fn leaves_fresh_and_after_split() {
        let tree = RegionTree::new(full_bounds(), test_config());
        assert_eq!(tree.leaves().len(), 1);
        let split = tree_split_at_zero();
        let leaves = split.leaves();
        assert_eq!(leaves.len(), 2);
        assert_eq!(split.leaf_count(), 1 + split.split_count());
    }

    #[test]
    fn partition_tiles_the_space() {
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        let mut tree = RegionTree::new(full_bounds(), test_config());
        for turn in 0..300 {
            let m = MotorCommand::new(rng.gen_range(-180.0..180.0), rng.gen_range(-80.0..80.0));
            tree.update(m, emb(vec![rng.gen(), rng.gen()]), comp(-rng.gen::<f64>()), turn,
                SplitStrategy::BestInterest)
                .unwrap();
        }
        let leaves = tree.leaves();
        let root = tree.bounds();
        let root_area =
            (root.rotation.1 - root.rotation.0) * (root.travel.1 - root.travel.0);
        let leaf_area: f64 = leaves
            .iter()
            .map(|l| {
                (l.bounds.rotation.1 - l.bounds.rotation.0)
                    * (l.bounds.travel.1 - l.bounds.travel.0)
            })
            .sum();
        assert!(((leaf_area - root_area) / root_area).abs() < 1e-9);

        // 50x50 grid: every point routes to exactly one containing leaf.
        for i in 0..50 {
            for j in 0..50 {
                let m = MotorCommand::new(
                    -180.0 + 360.0 * (i as f64 + 0.5) / 50.0,
                    -80.0 + 160.0 * (j as f64 + 0.5) / 50.0,
                );
                tree.route(&m).unwrap();
            }
        }
    }

    proptest! {
        #[test]
        fn lp_is_non_negative(values in proptest::collection::vec(-1.0f64..0.0, 0..30), window in 2usize..15) {
            let series: Vec<Competence> = values.into_iter().map(comp).collect();
            prop_assert!(learning_progress(&series, window) >= 0.0);
        }
    }
}
