//! IO companion to `curio-core`: the config file format, the plain-text run
//! artifacts (turn log, tree snapshot, report, plot data), the SVG renders,
//! and the CLI subcommand implementations.

pub mod commands;
pub mod config_file;
pub mod output;
pub mod svg;
