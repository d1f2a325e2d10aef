//! End-to-end invariants of the experiment loop on paper-default settings.

use curio_core::config::{Mode, RunConfig};
use curio_core::runner::{categories_from_tree, replay_tree, run_experiment};
use curio_core::types::MotorCommand;

fn default_run(mode: Mode, seed: u64) -> (RunConfig, curio_core::runner::RunArtifacts) {
    let mut cfg = RunConfig::for_mode(mode);
    cfg.seed = seed;
    let artifacts = run_experiment(&cfg).unwrap();
    (cfg, artifacts)
}

#[test]
fn full_run_satisfies_loop_invariants() {
    let (cfg, artifacts) = default_run(Mode::CosineSplitEmbedding, 42);

    assert_eq!(artifacts.turn_log.len(), cfg.turns);
    for (i, r) in artifacts.turn_log.iter().enumerate() {
        assert_eq!(r.turn_index, i);
        assert!(r.competence.value() <= 0.0);
        assert!(r.competence.value().is_finite());
        assert_eq!(r.predicted.dim(), cfg.sensory_dim());
        assert_eq!(r.actual.dim(), cfg.sensory_dim());
        assert!(cfg.motor_bounds.contains(&r.motor_goal));
    }

    // Record conservation and leaf learning-progress sanity.
    let leaves = artifacts.final_tree.leaves();
    assert_eq!(leaves.iter().map(|l| l.record_count).sum::<usize>(), cfg.turns);
    assert!(leaves.iter().all(|l| l.learning_progress >= 0.0));
    assert_eq!(artifacts.final_tree.leaf_count(), 1 + artifacts.final_tree.split_count());

    // The leaves tile the motor space.
    let root_area = 360.0 * 160.0;
    let area: f64 = leaves
        .iter()
        .map(|l| {
            (l.bounds.rotation.1 - l.bounds.rotation.0)
                * (l.bounds.travel.1 - l.bounds.travel.0)
        })
        .sum();
    assert!(((area - root_area) / root_area).abs() < 1e-9);
    for i in 0..50 {
        for j in 0..50 {
            let m = MotorCommand::new(
                -180.0 + 360.0 * (i as f64 + 0.5) / 50.0,
                -80.0 + 160.0 * (j as f64 + 0.5) / 50.0,
            );
            artifacts.final_tree.route(&m).unwrap();
        }
    }
}

#[test]
fn replay_and_category_assembly_are_consistent() {
    let (cfg, artifacts) = default_run(Mode::CosineSplitDino, 7);
    let replayed = replay_tree(&cfg, &artifacts.turn_log).unwrap();
    assert_eq!(replayed.leaves(), artifacts.final_tree.leaves());

    let categories = categories_from_tree(&artifacts.final_tree);
    assert_eq!(categories.len(), artifacts.final_tree.leaf_count());
    let total: usize = categories.iter().map(|c| c.vectors.len()).sum();
    assert_eq!(total, cfg.turns);
    // Category vectors share the run's sensory dimension.
    for c in &categories {
        for v in &c.vectors {
            assert_eq!(v.len(), cfg.sensory_dim());
        }
    }
}

#[test]
fn grounding_stage_runs_on_default_experiments() {
    let (_, artifacts) = default_run(Mode::CosineSplitEmbedding, 3);
    let wac = artifacts.wac.as_ref().expect("default 300-turn runs discover many categories");
    assert!(wac.report.n_categories >= 2);
    assert!((wac.report.random_baseline - 1.0 / wac.report.n_categories as f64).abs() < 1e-15);
    assert!((0.0..=1.0).contains(&wac.report.accuracy));
    assert_eq!(
        wac.report.rows.is_empty(),
        false,
        "held-out split must produce at least one row"
    );
    // Model dimensions match the sensing mode.
    for clf in wac.model.classifiers.values() {
        assert_eq!(clf.weights.len(), artifacts.config.sensory_dim());
    }
}
