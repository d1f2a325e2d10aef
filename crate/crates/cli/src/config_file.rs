//! TOML run configuration: a fully optional mirror of the core config, so a
//! file only has to state what it changes. Resolution order is mode defaults
//! < file values < command-line overrides.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use curio_core::arena::SceneObject;
use curio_core::competence::CompetenceMeasure;
use curio_core::config::{Mode, RunConfig};
use curio_core::interest::SplitStrategy;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub turns: Option<usize>,
    pub epsilon: Option<f64>,
    pub lp_window: Option<usize>,
    pub max_region_size: Option<usize>,
    pub min_leaf_size: Option<usize>,
    pub knn_k: Option<usize>,
    pub lwlr_distance_weighting: Option<bool>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub split_strategy: Option<String>,
    pub competence_measure: Option<String>,
    pub motor_bounds: Option<FileMotorBounds>,
    pub arena: Option<FileArena>,
    pub grounding: Option<FileGrounding>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMotorBounds {
    pub rotation: Option<(f64, f64)>,
    pub travel: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileArena {
    pub width_mm: Option<f64>,
    pub height_mm: Option<f64>,
    pub half_fov_deg: Option<f64>,
    pub drift_deg: Option<f64>,
    pub recenter_every: Option<usize>,
    pub embed_dim: Option<usize>,
    pub view_noise_sigma: Option<f64>,
    pub angle_sensitivity: Option<f64>,
    pub distance_sensitivity: Option<f64>,
    pub objects: Option<Vec<FileObject>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileObject {
    pub name: String,
    pub angle_deg: f64,
    pub distance_mm: f64,
    pub embedding_seed: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileGrounding {
    pub train_ratio: Option<f64>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub l2: Option<f64>,
    pub negative_ratio: Option<f64>,
    pub neighbor_negative_share: Option<f64>,
    pub low_support_threshold: Option<usize>,
}

/// Command-line overrides; every config field a flag can set.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub turns: Option<usize>,
    pub epsilon: Option<f64>,
    pub lp_window: Option<usize>,
    pub max_region_size: Option<usize>,
    pub min_leaf_size: Option<usize>,
    pub knn_k: Option<usize>,
    pub split_strategy: Option<SplitStrategy>,
    pub competence_measure: Option<CompetenceMeasure>,
    pub half_fov_deg: Option<f64>,
    pub drift_deg: Option<f64>,
    pub recenter_every: Option<usize>,
    pub embed_dim: Option<usize>,
    pub view_noise_sigma: Option<f64>,
    pub train_ratio: Option<f64>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub l2: Option<f64>,
    pub negative_ratio: Option<f64>,
    pub neighbor_negative_share: Option<f64>,
}

pub fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
}

/// Layer mode defaults, file values, and CLI overrides into a validated
/// run config.
pub fn resolve(file: &FileConfig, overrides: &Overrides) -> Result<RunConfig> {
    let mode = match (&overrides.mode, &file.mode) {
        (Some(m), _) => *m,
        (None, Some(s)) => parse_enum::<Mode>(s, "mode")?,
        (None, None) => Mode::CosineSplitEmbedding,
    };
    let mut cfg = RunConfig::for_mode(mode);

    macro_rules! layer {
        ($target:expr, $file:expr, $over:expr) => {
            if let Some(v) = $file {
                $target = v;
            }
            if let Some(v) = $over {
                $target = v;
            }
        };
    }

    layer!(cfg.turns, file.turns, overrides.turns);
    layer!(cfg.epsilon, file.epsilon, overrides.epsilon);
    layer!(cfg.lp_window, file.lp_window, overrides.lp_window);
    layer!(cfg.max_region_size, file.max_region_size, overrides.max_region_size);
    layer!(cfg.min_leaf_size, file.min_leaf_size, overrides.min_leaf_size);
    layer!(cfg.knn_k, file.knn_k, overrides.knn_k);
    layer!(cfg.lwlr_distance_weighting, file.lwlr_distance_weighting, None::<bool>);
    layer!(cfg.seed, file.seed, overrides.seed);

    if let Some(s) = &file.split_strategy {
        cfg.split_strategy = parse_enum::<SplitStrategy>(s, "split_strategy")?;
    }
    if let Some(v) = overrides.split_strategy {
        cfg.split_strategy = v;
    }
    if let Some(s) = &file.competence_measure {
        cfg.competence_measure = parse_enum::<CompetenceMeasure>(s, "competence_measure")?;
    }
    if let Some(v) = overrides.competence_measure {
        cfg.competence_measure = v;
    }

    if let Some(mb) = &file.motor_bounds {
        if let Some(r) = mb.rotation {
            cfg.motor_bounds.rotation = r;
        }
        if let Some(t) = mb.travel {
            cfg.motor_bounds.travel = t;
        }
    }

    if let Some(a) = &file.arena {
        layer!(cfg.arena.width_mm, a.width_mm, None::<f64>);
        layer!(cfg.arena.height_mm, a.height_mm, None::<f64>);
        layer!(cfg.arena.half_fov_deg, a.half_fov_deg, None::<f64>);
        layer!(cfg.arena.drift_deg, a.drift_deg, None::<f64>);
        layer!(cfg.arena.recenter_every, a.recenter_every, None::<usize>);
        layer!(cfg.arena.embed_dim, a.embed_dim, None::<usize>);
        layer!(cfg.arena.view_noise_sigma, a.view_noise_sigma, None::<f64>);
        layer!(cfg.arena.angle_sensitivity, a.angle_sensitivity, None::<f64>);
        layer!(cfg.arena.distance_sensitivity, a.distance_sensitivity, None::<f64>);
        if let Some(objects) = &a.objects {
            cfg.arena.objects = objects
                .iter()
                .map(|o| SceneObject {
                    name: o.name.clone(),
                    angle_deg: o.angle_deg,
                    distance_mm: o.distance_mm,
                    embedding_seed: o.embedding_seed,
                })
                .collect();
        }
    }
    layer!(cfg.arena.half_fov_deg, None::<f64>, overrides.half_fov_deg);
    layer!(cfg.arena.drift_deg, None::<f64>, overrides.drift_deg);
    layer!(cfg.arena.recenter_every, None::<usize>, overrides.recenter_every);
    layer!(cfg.arena.embed_dim, None::<usize>, overrides.embed_dim);
    layer!(cfg.arena.view_noise_sigma, None::<f64>, overrides.view_noise_sigma);

    if let Some(g) = &file.grounding {
        layer!(cfg.grounding.train_ratio, g.train_ratio, None::<f64>);
        layer!(cfg.grounding.learning_rate, g.learning_rate, None::<f64>);
        layer!(cfg.grounding.epochs, g.epochs, None::<usize>);
        layer!(cfg.grounding.l2, g.l2, None::<f64>);
        layer!(cfg.grounding.negative_ratio, g.negative_ratio, None::<f64>);
        layer!(
            cfg.grounding.neighbor_negative_share,
            g.neighbor_negative_share,
            None::<f64>
        );
        layer!(cfg.grounding.low_support_threshold, g.low_support_threshold, None::<usize>);
    }
    layer!(cfg.grounding.train_ratio, None::<f64>, overrides.train_ratio);
    layer!(cfg.grounding.learning_rate, None::<f64>, overrides.learning_rate);
    layer!(cfg.grounding.epochs, None::<usize>, overrides.epochs);
    layer!(cfg.grounding.l2, None::<f64>, overrides.l2);
    layer!(cfg.grounding.negative_ratio, None::<f64>, overrides.negative_ratio);
    layer!(
        cfg.grounding.neighbor_negative_share,
        None::<f64>,
        overrides.neighbor_negative_share
    );

    cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(cfg)
}

fn parse_enum<T: std::str::FromStr<Err = &'static str>>(s: &str, field: &str) -> Result<T> {
    match s.parse::<T>() {
        Ok(v) => Ok(v),
        Err(e) => bail!("config field {field}: {e} (got {s:?})"),
    }
}

/// The resolved config as a fully explicit file, for the run's config echo.
pub fn to_file_config(cfg: &RunConfig) -> FileConfig {
    FileConfig {
        turns: Some(cfg.turns),
        epsilon: Some(cfg.epsilon),
        lp_window: Some(cfg.lp_window),
        max_region_size: Some(cfg.max_region_size),
        min_leaf_size: Some(cfg.min_leaf_size),
        knn_k: Some(cfg.knn_k),
        lwlr_distance_weighting: Some(cfg.lwlr_distance_weighting),
        seed: Some(cfg.seed),
        mode: Some(cfg.mode.label().to_string()),
        split_strategy: Some(cfg.split_strategy.label().to_string()),
        competence_measure: Some(cfg.competence_measure.label().to_string()),
        motor_bounds: Some(FileMotorBounds {
            rotation: Some(cfg.motor_bounds.rotation),
            travel: Some(cfg.motor_bounds.travel),
        }),
        arena: Some(FileArena {
            width_mm: Some(cfg.arena.width_mm),
            height_mm: Some(cfg.arena.height_mm),
            half_fov_deg: Some(cfg.arena.half_fov_deg),
            drift_deg: Some(cfg.arena.drift_deg),
            recenter_every: Some(cfg.arena.recenter_every),
            embed_dim: Some(cfg.arena.embed_dim),
            view_noise_sigma: Some(cfg.arena.view_noise_sigma),
            angle_sensitivity: Some(cfg.arena.angle_sensitivity),
            distance_sensitivity: Some(cfg.arena.distance_sensitivity),
            objects: Some(
                cfg.arena
                    .objects
                    .iter()
                    .map(|o| FileObject {
                        name: o.name.clone(),
                        angle_deg: o.angle_deg,
                        distance_mm: o.distance_mm,
                        embedding_seed: o.embedding_seed,
                    })
                    .collect(),
            ),
        }),
        grounding: Some(FileGrounding {
            train_ratio: Some(cfg.grounding.train_ratio),
            learning_rate: Some(cfg.grounding.learning_rate),
            epochs: Some(cfg.grounding.epochs),
            l2: Some(cfg.grounding.l2),
            negative_ratio: Some(cfg.grounding.negative_ratio),
            neighbor_negative_share: Some(cfg.grounding.neighbor_negative_share),
            low_support_threshold: Some(cfg.grounding.low_support_threshold),
        }),
    }
}

pub fn config_echo(cfg: &RunConfig) -> Result<String> {
    toml::to_string_pretty(&to_file_config(cfg)).context("serializing config echo")
}

/// Load the exact config a stored run was executed with.
pub fn load_run_config(dir: &Path) -> Result<RunConfig> {
    let file = load_file(&dir.join("config.toml"))?;
    resolve(&file, &Overrides::default())
}
