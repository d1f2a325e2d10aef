//! Curiosity-driven exploration of a 2D motor space with bottom-up category
//! discovery.
//!
//! A simulated robot sits at the center of a small arena and explores by
//! motor babbling: each turn it picks a motor goal (a rotation plus a linear
//! travel), predicts the sensory outcome with a forward model, executes the
//! action, and scores the prediction. Regions of motor space where
//! predictions are improving attract further sampling; regions that fill up
//! are split, and the resulting leaves are the discovered (unlabeled)
//! categories. A words-as-classifiers pass at the end checks whether those
//! categories are separable enough to ground symbols into.
//!
//! Crate layout:
//!
//! * [`types`] — motor commands, sensory vectors, turn records
//! * [`config`] — run configuration and validation
//! * [`competence`] — prediction-quality measures (Euclidean, bounded cosine)
//! * [`sensorimotor`] — the forward model (k-NN index + local linear regression)
//! * [`interest`] — the region tree: learning progress, sampling, splitting
//! * [`arena`] — the simulated environment and its synthetic embeddings
//! * [`grounding`] — per-category binary classifiers and their evaluation
//! * [`runner`] — the full experiment loop and run artifacts
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `curio-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arena;
pub mod competence;
pub mod config;
pub mod grounding;
pub mod interest;
mod mathf;
pub mod runner;
pub mod sensorimotor;
pub mod stream;
pub mod types;
mod vecmath;

pub use config::{Mode, RunConfig};
pub use runner::{run_experiment, RunArtifacts};
pub use types::{MotorCommand, SensingMode, SensoryVector, TurnRecord};
