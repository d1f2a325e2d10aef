//! Orchestrates a full experiment: the perceive/act loop wiring arena,
//! competence, forward model, and interest tree together, followed by the
//! grounding evaluation. Everything is pure computation on in-memory
//! artifacts; file emission lives in the CLI crate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::arena::{Arena, ArenaError};
use crate::competence::MeasureError;
use crate::config::{ConfigError, RunConfig};
use crate::grounding::{
    ground_categories, CategorySample, GroundingError, GroundingOutcome,
};
use crate::interest::{InterestError, LeafInfo, RegionTree, TreeConfig};
use crate::sensorimotor::{DatasetError, SensorimotorDataset};
use crate::stream::{derive_rng, STREAM_ARENA, STREAM_GROUNDING, STREAM_SAMPLER};
use crate::types::{wrap_angle, SensoryVector, TurnRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A module failure, tagged with the stage and (where applicable) the turn
/// it occurred on.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Config(ConfigError),
    Arena { turn: usize, source: ArenaError },
    Prediction { turn: usize, source: DatasetError },
    Competence { turn: usize, source: MeasureError },
    Dataset { turn: usize, source: DatasetError },
    Interest { turn: usize, source: InterestError },
    Grounding(GroundingError),
    SceneMismatch,
}

impl RunError {
    /// Short stage name for exit diagnostics.
    pub fn stage(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Arena { .. } => "arena",
            RunError::Prediction { .. } => "prediction",
            RunError::Competence { .. } => "competence",
            RunError::Dataset { .. } => "dataset",
            RunError::Interest { .. } => "interest",
            RunError::Grounding(_) => "grounding",
            RunError::SceneMismatch => "compare",
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config: {e}"),
            RunError::Arena { turn, source } => write!(f, "arena (turn {turn}): {source}"),
            RunError::Prediction { turn, source } => {
                write!(f, "prediction (turn {turn}): {source}")
            }
            RunError::Competence { turn, source } => {
                write!(f, "competence (turn {turn}): {source}")
            }
            RunError::Dataset { turn, source } => write!(f, "dataset (turn {turn}): {source}"),
            RunError::Interest { turn, source } => write!(f, "interest (turn {turn}): {source}"),
            RunError::Grounding(e) => write!(f, "grounding: {e}"),
            RunError::SceneMismatch => {
                write!(f, "compare: runs were executed over different scenes")
            }
        }
    }
}

/// Everything a completed run produces.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: RunConfig,
    pub version: &'static str,
    pub turn_log: Vec<TurnRecord>,
    pub final_tree: RegionTree,
    pub wac: Option<GroundingOutcome>,
    /// Present when the grounding stage was skipped, explaining why.
    pub wac_notice: Option<String>,
}

/// Stable identifier of a run, echoed into the grounding model and manifest.
pub fn run_id(config: &RunConfig) -> String {
    format!("{}-seed{}", config.mode.label(), config.seed)
}

/// Run the full perceive/act loop plus the grounding stage.
pub fn run_experiment(config: &RunConfig) -> Result<RunArtifacts, RunError> {
    config.validate().map_err(RunError::Config)?;
    let sensing = config.sensing();
    let dim = config.sensory_dim();

    let mut sampler_rng = derive_rng(config.seed, STREAM_SAMPLER);
    let mut arena = Arena::new(
        config.arena.clone(),
        sensing,
        config.motor_bounds,
        derive_rng(config.seed, STREAM_ARENA),
    )
    .map_err(|source| RunError::Arena { turn: 0, source })?;
    let mut dataset = if config.lwlr_distance_weighting {
        SensorimotorDataset::new().with_distance_weighting()
    } else {
        SensorimotorDataset::new()
    };
    let mut tree = RegionTree::new(
        config.motor_bounds,
        TreeConfig {
            max_region_size: config.max_region_size,
            lp_window: config.lp_window,
            min_leaf_size: config.min_leaf_size,
        },
    );

    let mut turn_log = Vec::with_capacity(config.turns);
    for turn in 0..config.turns {
        let (goal, was_random) = tree.sample_motor_goal(config.epsilon, &mut sampler_rng);
        // The loop must bootstrap: with no experience yet, predict the
        // mode's absence sentinel.
        let predicted = if dataset.is_empty() {
            SensoryVector::sentinel(sensing, dim)
        } else {
            dataset
                .predict(&goal, config.knn_k)
                .map_err(|source| RunError::Prediction { turn, source })?
        };
        let (_percept, actual) = arena
            .execute(&goal, turn)
            .map_err(|source| RunError::Arena { turn, source })?;
        let competence = config
            .competence_measure
            .score(&predicted, &actual)
            .map_err(|source| RunError::Competence { turn, source })?;
        dataset
            .add_observation(goal, actual.clone())
            .map_err(|source| RunError::Dataset { turn, source })?;
        let outcome = tree
            .update(goal, actual.clone(), competence, turn, config.split_strategy)
            .map_err(|source| RunError::Interest { turn, source })?;
        turn_log.push(TurnRecord {
            turn_index: turn,
            motor_goal: goal,
            predicted,
            actual,
            competence,
            region_id: outcome.leaf_id,
            was_random_sample: was_random,
        });
    }

    let categories = categories_from_tree(&tree);
    let id = run_id(config);
    let (wac, wac_notice) = if categories.len() < 2 {
        (
            None,
            Some(format!(
                "grounding skipped: fewer than 2 categories ({} leaf)",
                categories.len()
            )),
        )
    } else {
        let mut grounding_rng = derive_rng(config.seed, STREAM_GROUNDING);
        match ground_categories(&categories, &config.grounding, &mut grounding_rng, &id) {
            Ok(outcome) => (Some(outcome), None),
            Err(GroundingError::TooFewCategories(n)) => (
                None,
                Some(format!(
                    "grounding skipped: fewer than 2 trainable categories ({n})"
                )),
            ),
            Err(e) => return Err(RunError::Grounding(e)),
        }
    };

    Ok(RunArtifacts {
        config: config.clone(),
        version: VERSION,
        turn_log,
        final_tree: tree,
        wac,
        wac_notice,
    })
}

/// The final leaves' records as grounding categories, keyed by leaf id.
pub fn categories_from_tree(tree: &RegionTree) -> Vec<CategorySample> {
    tree.leaves()
        .iter()
        .filter_map(|leaf| {
            let records = tree.leaf_records(leaf.id)?;
            if records.is_empty() {
                return None;
            }
            Some(CategorySample {
                id: leaf.id,
                bounds: leaf.bounds,
                vectors: records.iter().map(|r| r.sensory.values().to_vec()).collect(),
            })
        })
        .collect()
}

/// Rebuild the interest tree by replaying a turn log's (motor, actual,
/// competence) sequence through a fresh tree. With the same config this must
/// reproduce the run's final tree exactly.
pub fn replay_tree(config: &RunConfig, turn_log: &[TurnRecord]) -> Result<RegionTree, RunError> {
    let mut tree = RegionTree::new(
        config.motor_bounds,
        TreeConfig {
            max_region_size: config.max_region_size,
            lp_window: config.lp_window,
            min_leaf_size: config.min_leaf_size,
        },
    );
    for record in turn_log {
        tree.update(
            record.motor_goal,
            record.actual.clone(),
            record.competence,
            record.turn_index,
            config.split_strategy,
        )
        .map_err(|source| RunError::Interest { turn: record.turn_index, source })?;
    }
    Ok(tree)
}

// ---------------------------------------------------------------------------
// plot data

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionPoint {
    pub turn: usize,
    pub rotation_deg: f64,
    pub travel_mm: f64,
    pub was_random: bool,
}

/// Rows for the grid plot: leaf rectangles shaded by learning progress plus
/// one point per action.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPlotData {
    pub leaves: Vec<LeafInfo>,
    pub actions: Vec<ActionPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectWindow {
    pub name: String,
    pub center_deg: f64,
    pub half_width_deg: f64,
}

/// Rows for the polar plot: one point per action (angle, |travel| radius,
/// travel sign, recency rank) plus the configured object windows.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPlotData {
    pub points: Vec<PolarPoint>,
    pub windows: Vec<ObjectWindow>,
    /// Fraction of all actions whose angle falls inside any object window.
    pub in_window_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub recency_rank: usize,
    pub angle_deg: f64,
    pub radius_mm: f64,
    /// +1 forward, -1 backward, 0 for zero travel.
    pub travel_sign: i8,
}

impl RunArtifacts {
    pub fn grid_plot_data(&self) -> GridPlotData {
        GridPlotData {
            leaves: self.final_tree.leaves(),
            actions: self
                .turn_log
                .iter()
                .map(|r| ActionPoint {
                    turn: r.turn_index,
                    rotation_deg: r.motor_goal.rotation_deg,
                    travel_mm: r.motor_goal.travel_mm,
                    was_random: r.was_random_sample,
                })
                .collect(),
        }
    }

    pub fn polar_plot_data(&self) -> PolarPlotData {
        let windows: Vec<ObjectWindow> = self
            .config
            .arena
            .objects
            .iter()
            .map(|o| ObjectWindow {
                name: o.name.clone(),
                center_deg: o.angle_deg,
                half_width_deg: self.config.arena.half_fov_deg,
            })
            .collect();
        let points: Vec<PolarPoint> = self
            .turn_log
            .iter()
            .map(|r| PolarPoint {
                recency_rank: r.turn_index,
                angle_deg: r.motor_goal.rotation_deg,
                radius_mm: crate::mathf::abs(r.motor_goal.travel_mm),
                travel_sign: if r.motor_goal.travel_mm > 0.0 {
                    1
                } else if r.motor_goal.travel_mm < 0.0 {
                    -1
                } else {
                    0
                },
            })
            .collect();
        let in_window = points
            .iter()
            .filter(|p| in_any_window(p.angle_deg, &windows))
            .count();
        let in_window_fraction = if points.is_empty() {
            0.0
        } else {
            in_window as f64 / points.len() as f64
        };
        PolarPlotData { points, windows, in_window_fraction }
    }

    pub fn summary(&self) -> RunSummary {
        let windows: Vec<ObjectWindow> = self
            .config
            .arena
            .objects
            .iter()
            .map(|o| ObjectWindow {
                name: o.name.clone(),
                center_deg: o.angle_deg,
                half_width_deg: self.config.arena.half_fov_deg,
            })
            .collect();
        let non_random: Vec<&TurnRecord> =
            self.turn_log.iter().filter(|r| !r.was_random_sample).collect();
        let tail = &non_random[non_random.len().saturating_sub(50)..];
        let in_window = tail
            .iter()
            .filter(|r| in_any_window(r.motor_goal.rotation_deg, &windows))
            .count();
        let goal_in_window_fraction = if tail.is_empty() {
            0.0
        } else {
            in_window as f64 / tail.len() as f64
        };
        let comp_tail = &self.turn_log[self.turn_log.len().saturating_sub(50)..];
        let mean_competence = if comp_tail.is_empty() {
            0.0
        } else {
            comp_tail.iter().map(|r| r.competence.value()).sum::<f64>() / comp_tail.len() as f64
        };
        RunSummary {
            leaf_count: self.final_tree.leaf_count(),
            goal_in_window_fraction,
            mean_competence_last_50: mean_competence,
        }
    }
}

/// Is the drift-free heading inside any object's field-of-view window?
pub fn in_any_window(rotation_deg: f64, windows: &[ObjectWindow]) -> bool {
    windows.iter().any(|w| {
        crate::mathf::abs(wrap_angle(rotation_deg - w.center_deg)) <= w.half_width_deg
    })
}

/// The per-run numbers the baseline-vs-experiment contrast is read from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub leaf_count: usize,
    /// Fraction of the last 50 non-random motor goals whose drift-free
    /// heading falls within any object window.
    pub goal_in_window_fraction: f64,
    pub mean_competence_last_50: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunComparison {
    pub a: RunSummary,
    pub b: RunSummary,
}

/// Side-by-side summaries of two runs over the same scene.
pub fn compare_runs(a: &RunArtifacts, b: &RunArtifacts) -> Result<RunComparison, RunError> {
    let same_scene = a.config.arena.scene_signature() == b.config.arena.scene_signature()
        && a.config.arena.half_fov_deg == b.config.arena.half_fov_deg;
    if !same_scene {
        return Err(RunError::SceneMismatch);
    }
    Ok(RunComparison { a: a.summary(), b: b.summary() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Mode;

    fn quick_config(mode: Mode, turns: usize, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::for_mode(mode);
        cfg.turns = turns;
        cfg.seed = seed;
        cfg.arena.embed_dim = 24; // keep unit tests snappy
        cfg
    }

    #[test]
    fn single_turn_run_skips_grounding_with_notice() {
        let cfg = quick_config(Mode::Baseline, 1, 1);
        let artifacts = run_experiment(&cfg).unwrap();
        assert_eq!(artifacts.turn_log.len(), 1);
        assert_eq!(artifacts.final_tree.leaf_count(), 1);
        assert!(artifacts.wac.is_none());
        assert!(artifacts.wac_notice.as_ref().unwrap().contains("skipped"));
        // Bootstrap prediction is the sentinel.
        assert!(artifacts.turn_log[0].predicted.values().iter().all(|&v| v == -1.0));
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let cfg = quick_config(Mode::CosineSplitEmbedding, 80, 9);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.turn_log, b.turn_log);
        assert_eq!(a.final_tree.leaves(), b.final_tree.leaves());
        match (&a.wac, &b.wac) {
            (Some(x), Some(y)) => assert_eq!(x, y),
            (x, y) => assert_eq!(x.is_none(), y.is_none()),
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let a = run_experiment(&quick_config(Mode::Baseline, 40, 1)).unwrap();
        let b = run_experiment(&quick_config(Mode::Baseline, 40, 2)).unwrap();
        assert_ne!(a.turn_log, b.turn_log);
    }

    #[test]
    fn replay_reproduces_the_final_tree() {
        let cfg = quick_config(Mode::CosineSplitEmbedding, 120, 5);
        let artifacts = run_experiment(&cfg).unwrap();
        let replayed = replay_tree(&cfg, &artifacts.turn_log).unwrap();
        assert_eq!(replayed.leaves(), artifacts.final_tree.leaves());
        assert_eq!(replayed.split_count(), artifacts.final_tree.split_count());
    }

    #[test]
    fn turn_indices_increase_and_region_ids_exist() {
        let cfg = quick_config(Mode::EuclideanEmbedding, 100, 3);
        let artifacts = run_experiment(&cfg).unwrap();
        for (i, r) in artifacts.turn_log.iter().enumerate() {
            assert_eq!(r.turn_index, i);
            assert!(r.competence.value() <= 0.0);
            assert_eq!(r.predicted.dim(), r.actual.dim());
        }
        // Every region id ever logged still exists in the final tree (leaves
        // keep their ids; split leaves persist as internal nodes).
        fn ids(r: &crate::interest::Region, out: &mut alloc::vec::Vec<u32>) {
            out.push(r.id());
            if let Some((l, rt)) = r.children() {
                ids(l, out);
                ids(rt, out);
            }
        }
        let mut all = alloc::vec::Vec::new();
        ids(artifacts.final_tree.root(), &mut all);
        for r in &artifacts.turn_log {
            assert!(all.contains(&r.region_id), "region {} missing", r.region_id);
        }
    }

    #[test]
    fn record_conservation_across_leaves() {
        let cfg = quick_config(Mode::Baseline, 150, 4);
        let artifacts = run_experiment(&cfg).unwrap();
        assert_eq!(artifacts.final_tree.total_records(), cfg.turns);
        let leaf_sum: usize =
            artifacts.final_tree.leaves().iter().map(|l| l.record_count).sum();
        assert_eq!(leaf_sum, cfg.turns);
    }

    #[test]
    fn plot_data_shapes() {
        let cfg = quick_config(Mode::Baseline, 3, 8);
        let artifacts = run_experiment(&cfg).unwrap();
        let grid = artifacts.grid_plot_data();
        assert_eq!(grid.leaves.len(), 1);
        assert_eq!(grid.actions.len(), 3);
        let polar = artifacts.polar_plot_data();
        assert_eq!(polar.points.len(), 3);
        let ranks: Vec<usize> = polar.points.iter().map(|p| p.recency_rank).collect();
        assert_eq!(ranks, vec![0, 1, 2]);
        assert_eq!(polar.windows.len(), 2);
        // The footer stat is recomputable from the rows.
        let recount = polar
            .points
            .iter()
            .filter(|p| in_any_window(p.angle_deg, &polar.windows))
            .count() as f64
            / polar.points.len() as f64;
        assert_eq!(polar.in_window_fraction, recount);
    }

    #[test]
    fn compare_with_self_is_identical() {
        let cfg = quick_config(Mode::Baseline, 60, 2);
        let artifacts = run_experiment(&cfg).unwrap();
        let cmp = compare_runs(&artifacts, &artifacts).unwrap();
        assert_eq!(cmp.a, cmp.b);
    }

    #[test]
    fn compare_rejects_scene_mismatch() {
        let a = run_experiment(&quick_config(Mode::Baseline, 30, 2)).unwrap();
        let mut cfg = quick_config(Mode::Baseline, 30, 2);
        cfg.arena.objects[0].angle_deg = -120.0;
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(compare_runs(&a, &b).unwrap_err(), RunError::SceneMismatch);
    }

    #[test]
    fn window_membership_wraps() {
        let windows = [ObjectWindow {
            name: String::from("far"),
            center_deg: 180.0,
            half_width_deg: 15.0,
        }];
        assert!(in_any_window(171.0, &windows));
        assert!(in_any_window(-173.0, &windows)); // wraps across the seam
        assert!(!in_any_window(0.0, &windows));
    }
}
