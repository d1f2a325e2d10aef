//! Implementations behind the CLI subcommands, kept separate from argument
//! parsing so the integration tests can drive them directly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};

use curio_core::config::RunConfig;
use curio_core::grounding::GroundingError;
use curio_core::runner::{
    categories_from_tree, compare_runs, replay_tree, run_experiment, run_id, RunArtifacts,
};
use curio_core::stream::{derive_rng, STREAM_GROUNDING};

use crate::config_file::{self, FileConfig, Overrides};
use crate::output;

/// Load (optional) config file and apply overrides.
pub fn resolve_config(config_path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let file = match config_path {
        Some(path) => config_file::load_file(path)?,
        None => FileConfig::default(),
    };
    config_file::resolve(&file, overrides).context("resolving config")
}

pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: String,
}

/// Execute one experiment and write its artifacts.
pub fn cmd_run(
    config_path: Option<&Path>,
    overrides: &Overrides,
    out: Option<&Path>,
    emit_plots: bool,
) -> Result<RunOutcome> {
    let cfg = resolve_config(config_path, overrides)?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => PathBuf::from("runs").join(run_id(&cfg)),
    };
    let started = Instant::now();
    let artifacts = run_experiment(&cfg).map_err(|e| anyhow::anyhow!("{e}"))?;
    let wall = started.elapsed();
    output::write_run(&dir, &artifacts, emit_plots, wall)?;
    Ok(RunOutcome { summary: summarize(&artifacts, &dir), dir })
}

fn summarize(artifacts: &RunArtifacts, dir: &Path) -> String {
    let s = artifacts.summary();
    let wac = match &artifacts.wac {
        Some(w) => format!(
            "wac accuracy {:.3} over {} categories (baseline {:.3})",
            w.report.accuracy, w.report.n_categories, w.report.random_baseline
        ),
        None => "wac skipped".to_string(),
    };
    format!(
        "{}: {} turns, {} leaves, in-window {:.2}, mean competence {:.3}, {} -> {}",
        run_id(&artifacts.config),
        artifacts.turn_log.len(),
        s.leaf_count,
        s.goal_in_window_fraction,
        s.mean_competence_last_50,
        wac,
        dir.display()
    )
}

/// Run the same configuration over a range of consecutive seeds.
pub fn cmd_batch(
    config_path: Option<&Path>,
    overrides: &Overrides,
    out: &Path,
    seeds: u64,
    emit_plots: bool,
) -> Result<Vec<RunOutcome>> {
    if seeds == 0 {
        bail!("batch needs at least one seed");
    }
    let base = resolve_config(config_path, overrides)?.seed;
    let mut outcomes = Vec::new();
    for i in 0..seeds {
        let mut per_seed = overrides.clone();
        per_seed.seed = Some(base + i);
        let cfg = resolve_config(config_path, &per_seed)?;
        let dir = out.join(run_id(&cfg));
        let started = Instant::now();
        let artifacts = run_experiment(&cfg).map_err(|e| anyhow::anyhow!("{e}"))?;
        let wall = started.elapsed();
        output::write_run(&dir, &artifacts, emit_plots, wall)?;
        outcomes.push(RunOutcome { summary: summarize(&artifacts, &dir), dir });
    }
    Ok(outcomes)
}

/// Rebuild the in-memory artifacts of a stored run by replaying its log.
pub fn load_stored_artifacts(dir: &Path) -> Result<RunArtifacts> {
    let stored = output::read_run(dir)?;
    let tree = replay_tree(&stored.config, &stored.turn_log)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    // Integrity: the replayed tree must reproduce the stored snapshot.
    let stored_tree = std::fs::read_to_string(dir.join(output::TREE_FILE))
        .with_context(|| format!("reading {}", dir.join(output::TREE_FILE).display()))?;
    if output::tree_to_string(&tree) != stored_tree {
        bail!(
            "stored run {} is inconsistent: replaying its turn log does not reproduce tree.txt",
            dir.display()
        );
    }
    Ok(RunArtifacts {
        config: stored.config,
        version: curio_core::runner::VERSION,
        turn_log: stored.turn_log,
        final_tree: tree,
        wac: None,
        wac_notice: None,
    })
}

/// Side-by-side summary of two stored runs over the same scene.
pub fn cmd_compare(a_dir: &Path, b_dir: &Path) -> Result<String> {
    let a = load_stored_artifacts(a_dir)?;
    let b = load_stored_artifacts(b_dir)?;
    let cmp = compare_runs(&a, &b).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:28} {:>16} {:>16}",
        "metric",
        run_id(&a.config),
        run_id(&b.config)
    );
    let _ = writeln!(out, "{:28} {:>16} {:>16}", "leaf_count", cmp.a.leaf_count, cmp.b.leaf_count);
    let _ = writeln!(
        out,
        "{:28} {:>16.3} {:>16.3}",
        "goal_in_window_last50", cmp.a.goal_in_window_fraction, cmp.b.goal_in_window_fraction
    );
    let _ = writeln!(
        out,
        "{:28} {:>16.3} {:>16.3}",
        "mean_competence_last50", cmp.a.mean_competence_last_50, cmp.b.mean_competence_last_50
    );
    Ok(out)
}

/// Re-run the grounding stage on a stored run and rewrite its report.
pub fn cmd_eval_wac(dir: &Path) -> Result<String> {
    let mut artifacts = load_stored_artifacts(dir)?;
    let categories = categories_from_tree(&artifacts.final_tree);
    let id = run_id(&artifacts.config);
    if categories.len() < 2 {
        artifacts.wac_notice =
            Some(format!("grounding skipped: fewer than 2 categories ({} leaf)", categories.len()));
    } else {
        let mut rng = derive_rng(artifacts.config.seed, STREAM_GROUNDING);
        match curio_core::grounding::ground_categories(
            &categories,
            &artifacts.config.grounding,
            &mut rng,
            &id,
        ) {
            Ok(outcome) => artifacts.wac = Some(outcome),
            Err(GroundingError::TooFewCategories(n)) => {
                artifacts.wac_notice =
                    Some(format!("grounding skipped: fewer than 2 trainable categories ({n})"));
            }
            Err(e) => bail!("grounding: {e}"),
        }
    }
    let report = output::wac_report_to_string(&artifacts);
    std::fs::write(dir.join(output::WAC_REPORT_FILE), &report)
        .with_context(|| format!("writing {}", dir.join(output::WAC_REPORT_FILE).display()))?;
    Ok(match &artifacts.wac {
        Some(w) => format!(
            "{id}: wac accuracy {:.3} over {} categories (baseline {:.3})",
            w.report.accuracy, w.report.n_categories, w.report.random_baseline
        ),
        None => format!("{id}: {}", artifacts.wac_notice.as_deref().unwrap_or("grounding skipped")),
    })
}
