//! `simlpe` command-line driver.
//!
//! Exit codes: 0 success, 1 configuration error, 2 I/O or file-format error,
//! 3 verification failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use simlpe::gradcheck::GradcheckOptions;

use commands::Outcome;
use config::{parse_horizons, Precision, RunConfig};

#[derive(Parser)]
#[command(
    name = "simlpe",
    version,
    about = "Train and evaluate MLP human-motion predictors"
)]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    F32,
    F64,
}

#[derive(Args)]
struct Shared {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    precision: Option<PrecisionArg>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override any configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Args)]
struct DataArgs {
    /// Generate sinusoidal motion instead of reading files
    #[arg(long)]
    synthetic: bool,
    /// Training sequences (.motn or .csv), comma-separated
    #[arg(long)]
    data: Option<String>,
    /// Test sequences (.motn or .csv), comma-separated
    #[arg(long)]
    test_data: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write a checkpoint plus a loss trace
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Evaluate a checkpoint next to the Last-Frame baseline
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Comma-separated horizons in ms
        #[arg(long)]
        horizons: Option<String>,
    },
    /// Predict future frames for a motion file
    Predict {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Observed motion (.motn or .csv); the last T frames are used
        #[arg(long)]
        input: PathBuf,
        /// Frames to predict
        #[arg(long, default_value_t = 10)]
        frames: usize,
        /// Output motion file (default <out>/prediction.motn)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Report Last-Frame and One-FC baselines
    Baseline {
        #[command(flatten)]
        data: DataArgs,
        /// Trained One-FC checkpoint; trains one inline when absent
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        horizons: Option<String>,
    },
    /// Compare analytic gradients with finite differences
    Gradcheck {
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Corrupt the model gradient to exercise the failure path
        #[arg(long)]
        inject_fault: bool,
    },
}

fn build_config(shared: &Shared) -> simlpe::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &shared.config {
        cfg.apply_file(path)?;
    }
    for kv in &shared.overrides {
        cfg.apply_override(kv)?;
    }
    if let Some(seed) = shared.seed {
        cfg.seed = seed;
    }
    if let Some(p) = shared.precision {
        cfg.precision = match p {
            PrecisionArg::F32 => Precision::F32,
            PrecisionArg::F64 => Precision::F64,
        };
    }
    if let Some(out) = &shared.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn apply_data(cfg: &mut RunConfig, data: &DataArgs) -> simlpe::Result<()> {
    if data.synthetic {
        cfg.synthetic = true;
    }
    if let Some(d) = &data.data {
        cfg.set("train_data", d)?;
    }
    if let Some(d) = &data.test_data {
        cfg.set("test_data", d)?;
    }
    Ok(())
}

fn set_steps(cfg: &mut RunConfig, steps: usize) {
    // keep the drop at the same fraction of the run
    let s = &mut cfg.schedule;
    s.drop_step = (s.drop_step as u128 * steps as u128 / s.total_steps.max(1) as u128) as usize;
    s.total_steps = steps;
}

fn run(cli: Cli) -> simlpe::Result<Outcome> {
    let mut cfg = build_config(&cli.shared)?;
    match cli.command {
        Command::Train {
            data,
            blocks,
            steps,
            checkpoint,
        } => {
            apply_data(&mut cfg, &data)?;
            if let Some(b) = blocks {
                cfg.num_blocks = b;
            }
            if let Some(s) = steps {
                set_steps(&mut cfg, s);
            }
            if checkpoint.is_some() {
                cfg.checkpoint = checkpoint;
            }
            cfg.validate()?;
            commands::train(&cfg)
        }
        Command::Eval {
            data,
            checkpoint,
            horizons,
        } => {
            apply_data(&mut cfg, &data)?;
            if checkpoint.is_some() {
                cfg.checkpoint = checkpoint;
            }
            if let Some(h) = horizons {
                cfg.horizons = parse_horizons(&h)?;
            }
            cfg.validate()?;
            commands::eval(&cfg)
        }
        Command::Predict {
            checkpoint,
            input,
            frames,
            output,
        } => {
            if checkpoint.is_some() {
                cfg.checkpoint = checkpoint;
            }
            cfg.validate()?;
            commands::predict(&cfg, &input, frames, output.as_deref())
        }
        Command::Baseline {
            data,
            checkpoint,
            steps,
            horizons,
        } => {
            apply_data(&mut cfg, &data)?;
            if checkpoint.is_some() {
                cfg.checkpoint = checkpoint;
            }
            if let Some(s) = steps {
                set_steps(&mut cfg, s);
            }
            if let Some(h) = horizons {
                cfg.horizons = parse_horizons(&h)?;
            }
            cfg.validate()?;
            commands::baseline(&cfg)
        }
        Command::Gradcheck {
            seeds,
            inject_fault,
        } => commands::gradcheck(&GradcheckOptions {
            seeds,
            base_seed: cfg.seed,
            inject_fault,
            ..Default::default()
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
