//! Plain-text run artifacts, written for diffability: every float is emitted
//! in shortest round-trip form, so identical runs produce byte-identical
//! files and stored values parse back exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};

use curio_core::competence::Competence;
use curio_core::config::RunConfig;
use curio_core::grounding::GroundingOutcome;
use curio_core::interest::{Region, RegionTree};
use curio_core::runner::{run_id, GridPlotData, PolarPlotData, RunArtifacts};
use curio_core::types::{MotorCommand, SensoryVector, TurnRecord};

use crate::config_file;
use crate::svg;

pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const TURN_LOG_FILE: &str = "turn_log.txt";
pub const TREE_FILE: &str = "tree.txt";
pub const WAC_REPORT_FILE: &str = "wac_report.txt";
pub const GRID_CSV_FILE: &str = "grid_plot.csv";
pub const POLAR_CSV_FILE: &str = "polar_plot.csv";
pub const GRID_SVG_FILE: &str = "grid_plot.svg";
pub const POLAR_SVG_FILE: &str = "polar_plot.svg";

/// Write the full artifact set of a completed run into `dir`.
pub fn write_run(
    dir: &Path,
    artifacts: &RunArtifacts,
    emit_plots: bool,
    wall_clock: Duration,
) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let write = |name: &str, text: String| -> Result<()> {
        std::fs::write(dir.join(name), text)
            .with_context(|| format!("writing {}", dir.join(name).display()))
    };
    write(CONFIG_FILE, config_file::config_echo(&artifacts.config)?)?;
    write(MANIFEST_FILE, manifest_to_string(artifacts, wall_clock))?;
    write(TURN_LOG_FILE, turn_log_to_string(&artifacts.turn_log))?;
    write(TREE_FILE, tree_to_string(&artifacts.final_tree))?;
    write(WAC_REPORT_FILE, wac_report_to_string(artifacts))?;
    let grid = artifacts.grid_plot_data();
    let polar = artifacts.polar_plot_data();
    write(GRID_CSV_FILE, grid_csv(&grid))?;
    write(POLAR_CSV_FILE, polar_csv(&polar))?;
    if emit_plots {
        let travel_max = artifacts
            .config
            .motor_bounds
            .travel
            .0
            .abs()
            .max(artifacts.config.motor_bounds.travel.1.abs());
        write(GRID_SVG_FILE, svg::grid_svg(&grid, &artifacts.config.motor_bounds))?;
        write(POLAR_SVG_FILE, svg::polar_svg(&polar, travel_max))?;
    }
    Ok(())
}

/// The run metadata. The wall clock is quarantined here so the other
/// artifacts stay byte-deterministic.
pub fn manifest_to_string(artifacts: &RunArtifacts, wall_clock: Duration) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "run_id={}", run_id(&artifacts.config));
    let _ = writeln!(out, "version={}", artifacts.version);
    let _ = writeln!(out, "mode={}", artifacts.config.mode.label());
    let _ = writeln!(out, "seed={}", artifacts.config.seed);
    let _ = writeln!(out, "turns={}", artifacts.config.turns);
    let _ = writeln!(out, "config={CONFIG_FILE}");
    let _ = writeln!(out, "leaf_count={}", artifacts.final_tree.leaf_count());
    let _ = writeln!(out, "splits={}", artifacts.final_tree.split_count());
    for o in &artifacts.config.arena.objects {
        let _ = writeln!(
            out,
            "object={} angle_deg={:?} distance_mm={:?}",
            o.name, o.angle_deg, o.distance_mm
        );
    }
    match &artifacts.wac {
        Some(w) => {
            let _ = writeln!(out, "wac_accuracy={:?}", w.report.accuracy);
            let _ = writeln!(out, "wac_categories={}", w.report.n_categories);
        }
        None => {
            let _ = writeln!(
                out,
                "wac=skipped ({})",
                artifacts.wac_notice.as_deref().unwrap_or("no notice")
            );
        }
    }
    let _ = writeln!(out, "wall_clock_ms={}", wall_clock.as_millis());
    out
}

fn values_csv(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 8);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:?}");
    }
    s
}

/// One self-describing line per turn.
pub fn turn_log_to_string(log: &[TurnRecord]) -> String {
    let mut out = String::new();
    for r in log {
        let _ = writeln!(
            out,
            "turn={} random={} region={} rot={:?} trav={:?} competence={:?} predicted={} actual={}",
            r.turn_index,
            r.was_random_sample,
            r.region_id,
            r.motor_goal.rotation_deg,
            r.motor_goal.travel_mm,
            r.competence.value(),
            values_csv(r.predicted.values()),
            values_csv(r.actual.values()),
        );
    }
    out
}

/// Parse a stored turn log back into records. The sensing mode comes from
/// the stored config.
pub fn parse_turn_log(text: &str, config: &RunConfig) -> Result<Vec<TurnRecord>> {
    let mode = config.sensing();
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut turn = None;
        let mut random = None;
        let mut region = None;
        let mut rot = None;
        let mut trav = None;
        let mut competence = None;
        let mut predicted = None;
        let mut actual = None;
        for field in line.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .with_context(|| format!("turn log line {}: malformed field {field:?}", lineno + 1))?;
            match key {
                "turn" => turn = Some(value.parse::<usize>()?),
                "random" => random = Some(value.parse::<bool>()?),
                "region" => region = Some(value.parse::<u32>()?),
                "rot" => rot = Some(value.parse::<f64>()?),
                "trav" => trav = Some(value.parse::<f64>()?),
                "competence" => competence = Some(value.parse::<f64>()?),
                "predicted" => predicted = Some(parse_values(value)?),
                "actual" => actual = Some(parse_values(value)?),
                other => bail!("turn log line {}: unknown key {other:?}", lineno + 1),
            }
        }
        let missing = || anyhow::anyhow!("turn log line {}: missing field", lineno + 1);
        records.push(TurnRecord {
            turn_index: turn.ok_or_else(missing)?,
            motor_goal: MotorCommand::new(rot.ok_or_else(missing)?, trav.ok_or_else(missing)?),
            predicted: SensoryVector::estimate(mode, predicted.ok_or_else(missing)?),
            actual: SensoryVector::estimate(mode, actual.ok_or_else(missing)?),
            competence: Competence::from_value(competence.ok_or_else(missing)?),
            region_id: region.ok_or_else(missing)?,
            was_random_sample: random.ok_or_else(missing)?,
        });
    }
    Ok(records)
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.parse::<f64>().map_err(|e| anyhow::anyhow!("bad float {v:?}: {e}")))
        .collect()
}

/// Hierarchical snapshot of the region tree, pre-order, one node per line.
pub fn tree_to_string(tree: &RegionTree) -> String {
    fn emit(region: &Region, out: &mut String) {
        let indent = "  ".repeat(region.depth());
        let b = region.bounds();
        match region.children() {
            Some((left, right)) => {
                let (axis, value) = region.split().expect("internal nodes carry a split");
                let _ = writeln!(
                    out,
                    "{indent}internal id={} depth={} rot=[{:?},{:?}] trav=[{:?},{:?}] split={}@{:?}",
                    region.id(),
                    region.depth(),
                    b.rotation.0,
                    b.rotation.1,
                    b.travel.0,
                    b.travel.1,
                    axis.label(),
                    value,
                );
                emit(left, out);
                emit(right, out);
            }
            None => {
                let _ = writeln!(
                    out,
                    "{indent}leaf id={} depth={} rot=[{:?},{:?}] trav=[{:?},{:?}] records={} lp={:?}",
                    region.id(),
                    region.depth(),
                    b.rotation.0,
                    b.rotation.1,
                    b.travel.0,
                    b.travel.1,
                    region.records().map(|r| r.len()).unwrap_or(0),
                    region.learning_progress().unwrap_or(0.0),
                );
            }
        }
    }
    let mut out = String::new();
    emit(tree.root(), &mut out);
    out
}

/// Delimited table mirroring the per-exemplar predictions, plus a summary
/// line and any notices.
pub fn wac_report_to_string(artifacts: &RunArtifacts) -> String {
    let mut out = String::new();
    match &artifacts.wac {
        None => {
            let _ = writeln!(
                out,
                "# {}",
                artifacts.wac_notice.as_deref().unwrap_or("grounding skipped")
            );
        }
        Some(GroundingOutcome { report, notices, .. }) => {
            let _ = writeln!(out, "actual\tpredicted\tmargin\tcentroid_similarity");
            for row in &report.rows {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{:?}\t{:?}",
                    row.actual, row.predicted, row.margin, row.centroid_similarity
                );
            }
            for notice in notices {
                let _ = writeln!(out, "# {notice}");
            }
            let _ = writeln!(
                out,
                "accuracy={:?} n_categories={} random_baseline={:?}",
                report.accuracy, report.n_categories, report.random_baseline
            );
        }
    }
    out
}

/// Extract the accuracy from a stored report, if the run had one.
pub fn parse_report_accuracy(text: &str) -> Option<f64> {
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("accuracy=") {
            return rest.split_whitespace().next()?.parse().ok();
        }
    }
    None
}

pub fn grid_csv(data: &GridPlotData) -> String {
    let mut out = String::new();
    out.push_str("# grid plot data\n");
    out.push_str("# leaf,<id>,<rot_lo>,<rot_hi>,<trav_lo>,<trav_hi>,<learning_progress>\n");
    out.push_str("# action,<turn>,<rotation_deg>,<travel_mm>,<was_random>\n");
    for l in &data.leaves {
        let _ = writeln!(
            out,
            "leaf,{},{:?},{:?},{:?},{:?},{:?}",
            l.id,
            l.bounds.rotation.0,
            l.bounds.rotation.1,
            l.bounds.travel.0,
            l.bounds.travel.1,
            l.learning_progress,
        );
    }
    for a in &data.actions {
        let _ = writeln!(
            out,
            "action,{},{:?},{:?},{}",
            a.turn, a.rotation_deg, a.travel_mm, a.was_random
        );
    }
    out
}

pub fn polar_csv(data: &PolarPlotData) -> String {
    let mut out = String::new();
    out.push_str("# polar plot data; recency rank equals the turn index\n");
    out.push_str("# action,<recency_rank>,<angle_deg>,<radius_mm>,<travel_sign>\n");
    out.push_str("# window,<name>,<center_deg>,<half_width_deg>\n");
    for p in &data.points {
        let _ = writeln!(
            out,
            "action,{},{:?},{:?},{}",
            p.recency_rank, p.angle_deg, p.radius_mm, p.travel_sign
        );
    }
    for w in &data.windows {
        let _ = writeln!(out, "window,{},{:?},{:?}", w.name, w.center_deg, w.half_width_deg);
    }
    let _ = writeln!(out, "# in_window_fraction={:?}", data.in_window_fraction);
    out
}

/// A stored run, loaded back for comparison, replay, or re-grounding.
pub struct StoredRun {
    pub config: RunConfig,
    pub turn_log: Vec<TurnRecord>,
}

pub fn read_run(dir: &Path) -> Result<StoredRun> {
    let config = config_file::load_run_config(dir)
        .with_context(|| format!("loading stored run config from {}", dir.display()))?;
    let log_text = std::fs::read_to_string(dir.join(TURN_LOG_FILE))
        .with_context(|| format!("reading {}", dir.join(TURN_LOG_FILE).display()))?;
    let turn_log = parse_turn_log(&log_text, &config)?;
    if turn_log.len() != config.turns {
        bail!(
            "stored run is inconsistent: config says {} turns, log holds {}",
            config.turns,
            turn_log.len()
        );
    }
    Ok(StoredRun { config, turn_log })
}
