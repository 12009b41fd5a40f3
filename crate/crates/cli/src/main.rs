use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rehearsal_cli::commands::{cmd_baseline, cmd_run, cmd_synth, load_synth_spec, RunOptions};
use rehearsal_cli::config::ExperimentConfig;
use rehearsal_cli::exit_code;
use rehearsal_cli::report::cmd_report;
use rehearsal_core::Result;

/// Streaming classification with memory-bounded rehearsal buffers.
#[derive(Parser)]
#[command(name = "rehearsal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset (feature file + manifest).
    Synth {
        /// Synthetic dataset spec (JSON); defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train offline models and record their test accuracy.
    Baseline {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Training epochs (overrides the config).
        #[arg(long)]
        epochs: Option<usize>,
        /// Baseline record file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a sweep and append test events to a JSON-lines log.
    Run {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Baseline records written by `baseline`.
        #[arg(long)]
        baseline: PathBuf,
        /// Evaluate after every N-th sample (and always after the last)
        #[arg(long)]
        eval_every: Option<usize>,
        /// Store every buffer's prototypes in the final record of each run.
        #[arg(long)]
        dump_buffers: bool,
        /// Results log; completed runs already in it are skipped.
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a results log into Ω tables.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        baseline: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Binary feature file.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Manifest CSV; its file stem names the dataset.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Use this single seed instead of the config's list.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// Use features as stored instead of L2-normalizing them.
    #[arg(long)]
    no_normalize: bool,
}

impl ExperimentArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if self.features.is_some() {
            c.dataset.features.clone_from(&self.features);
        }
        if self.manifest.is_some() {
            c.dataset.manifest.clone_from(&self.manifest);
        }
        if let Some(seed) = self.seed {
            c.seeds = vec![seed];
        }
        if self.no_normalize {
            c.normalize = false;
        }
        Ok(c)
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth { config, seed, out } => {
            let mut spec = load_synth_spec(config.as_deref())?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let (features, manifest) = cmd_synth(&spec, &out)?;
            println!("{}\n{}", features.display(), manifest.display());
        }
        Command::Baseline { exp, epochs, out } => {
            let mut config = exp.load()?;
            if let Some(e) = epochs {
                config.epochs = e;
            }
            for r in cmd_baseline(&config, &out, exp.jobs)? {
                println!(
                    "{} seed {}: offline accuracy {:.4}",
                    r.dataset, r.seed, r.accuracy
                );
            }
        }
        Command::Run {
            exp,
            baseline,
            eval_every,
            dump_buffers,
            out,
        } => {
            let mut config = exp.load()?;
            if let Some(e) = eval_every {
                config.eval_every = e;
            }
            let options = RunOptions {
                jobs: exp.jobs,
                dump_buffers,
            };
            let s = cmd_run(&config, &baseline, &out, &options)?;
            println!(
                "{} runs planned, {} already complete, {} executed",
                s.planned, s.skipped, s.executed
            );
        }
        Command::Report {
            results,
            baseline,
            out,
        } => {
            let (table, series) = cmd_report(&results, &baseline, &out)?;
            println!("{}\n{}", table.display(), series.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
