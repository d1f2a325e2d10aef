use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use curio_cli::commands;
use curio_cli::config_file::Overrides;
use curio_core::competence::CompetenceMeasure;
use curio_core::config::Mode;
use curio_core::interest::SplitStrategy;

#[derive(Parser)]
#[command(
    name = "curio",
    version,
    about = "Curiosity-driven exploration of a simulated arena with bottom-up category discovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its artifacts.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (default: runs/<mode>-seed<seed>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render the grid and polar plots as SVG.
        #[arg(long)]
        emit_plots: bool,
    },
    /// Run the same configuration over consecutive seeds.
    Batch {
        #[command(flatten)]
        config: ConfigArgs,
        /// Number of runs; seeds count up from the configured seed.
        #[arg(long)]
        seeds: u64,
        /// Directory that receives one subdirectory per run.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        emit_plots: bool,
    },
    /// Summarize two stored runs side by side.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Re-run the grounding evaluation on a stored run.
    EvalWac {
        /// Directory of a stored run.
        #[arg(long)]
        run: PathBuf,
    },
}

/// Config file plus one override flag per config field.
#[derive(Args)]
struct ConfigArgs {
    /// TOML config file; omitted fields fall back to mode defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// baseline | euclidean-embedding | cosine-split-embedding | cosine-split-dino
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    turns: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    lp_window: Option<usize>,
    #[arg(long)]
    max_region_size: Option<usize>,
    #[arg(long)]
    min_leaf_size: Option<usize>,
    #[arg(long)]
    knn_k: Option<usize>,
    /// best-interest | cosine-variance
    #[arg(long)]
    split_strategy: Option<SplitStrategy>,
    /// euclidean | bounded-cosine
    #[arg(long)]
    competence_measure: Option<CompetenceMeasure>,
    #[arg(long)]
    half_fov_deg: Option<f64>,
    #[arg(long)]
    drift_deg: Option<f64>,
    #[arg(long)]
    recenter_every: Option<usize>,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    view_noise_sigma: Option<f64>,
    #[arg(long)]
    train_ratio: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    negative_ratio: Option<f64>,
    #[arg(long)]
    neighbor_negative_share: Option<f64>,
}

impl ConfigArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode,
            seed: self.seed,
            turns: self.turns,
            epsilon: self.epsilon,
            lp_window: self.lp_window,
            max_region_size: self.max_region_size,
            min_leaf_size: self.min_leaf_size,
            knn_k: self.knn_k,
            split_strategy: self.split_strategy,
            competence_measure: self.competence_measure,
            half_fov_deg: self.half_fov_deg,
            drift_deg: self.drift_deg,
            recenter_every: self.recenter_every,
            embed_dim: self.embed_dim,
            view_noise_sigma: self.view_noise_sigma,
            train_ratio: self.train_ratio,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l2: self.l2,
            negative_ratio: self.negative_ratio,
            neighbor_negative_share: self.neighbor_negative_share,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { config, out, emit_plots } => {
            let outcome = commands::cmd_run(
                config.config.as_deref(),
                &config.overrides(),
                out.as_deref(),
                emit_plots,
            )?;
            println!("{}", outcome.summary);
        }
        Command::Batch { config, seeds, out, emit_plots } => {
            let outcomes = commands::cmd_batch(
                config.config.as_deref(),
                &config.overrides(),
                &out,
                seeds,
                emit_plots,
            )?;
            for o in outcomes {
                println!("{}", o.summary);
            }
        }
        Command::Compare { a, b } => {
            print!("{}", commands::cmd_compare(&a, &b)?);
        }
        Command::EvalWac { run } => {
            println!("{}", commands::cmd_eval_wac(&run)?);
        }
    }
    Ok(())
}
