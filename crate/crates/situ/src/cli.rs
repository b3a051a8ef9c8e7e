use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{self, Predictor};
use crate::config::{parse_ratios, Overrides, PipelineConfig};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "situ", version, about = "Situated question generation, debiasing and evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed. Falls back to the config file, then SITU_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Vocabulary file (bundled vocabulary when omitted).
    #[arg(long, global = true)]
    pub vocab: Option<PathBuf>,
    /// Template library (bundled templates when omitted).
    #[arg(long, global = true)]
    pub templates: Option<PathBuf>,
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative answer-share tolerance for balancing.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Train, val and test ratios, e.g. `6,1,1`.
    #[arg(long, global = true, value_parser = parse_ratios)]
    pub ratios: Option<[f64; 3]>,
    #[arg(long, global = true)]
    pub noise_obj: Option<f64>,
    #[arg(long, global = true)]
    pub noise_rel: Option<f64>,
    #[arg(long, global = true)]
    pub noise_act: Option<f64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

impl From<Common> for Overrides {
    fn from(c: Common) -> Self {
        Overrides {
            config: c.config,
            seed: c.seed,
            vocab: c.vocab,
            templates: c.templates,
            input: c.input,
            out: c.out,
            tolerance: c.tolerance,
            ratios: c.ratios,
            noise_obj: c.noise_obj,
            noise_rel: c.noise_rel,
            noise_act: c.noise_act,
            workers: c.workers,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Random,
    Frequent,
    Executor,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic situation corpus to --out.
    Synth {
        #[arg(long, default_value_t = 400)]
        count: usize,
    },
    /// Write the built-in template library to --out.
    Templates,
    /// Generate questions from the situations in --in into directory --out.
    Generate,
    /// Check a generation output directory (--in).
    Validate,
    /// Answer distribution and co-occurrence report for the items in --in.
    Stats,
    /// Compositionality filter plus answer balancing, --in to --out.
    Debias,
    /// Assign train/val/test splits by situation, --in to --out.
    Split,
    /// Score a baseline or a predictions file on the items in --in.
    Eval {
        #[arg(long, value_enum, default_value_t = Baseline::Random, conflicts_with = "predictions")]
        baseline: Baseline,
        /// JSON list of `{"id", "choice"}` records.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Ground-truth situations, for the executor baseline.
        #[arg(long)]
        ground_truth: Option<PathBuf>,
    },
    /// Executor accuracy on ground truth degraded by the --noise-* rates.
    DegradeEval {
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long)]
        ground_truth: Option<PathBuf>,
    },
}

/// What a finished command prints, plus any validation problems.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub problems: Vec<String>,
}

pub fn run(cli: Cli, env_seed: Option<&str>) -> Result<Outcome> {
    let cfg = PipelineConfig::resolve(cli.common.into(), env_seed)?;
    let text = |s: String| Outcome {
        stdout: s,
        problems: Vec::new(),
    };
    Ok(match cli.command {
        Command::Synth { count } => text(commands::cmd_synth(&cfg, count)?),
        Command::Templates => text(commands::cmd_templates(&cfg)?),
        Command::Generate => text(commands::cmd_generate(&cfg)?),
        Command::Validate => {
            let problems = commands::cmd_validate(&cfg)?;
            let stdout = if problems.is_empty() { "ok\n".into() } else { String::new() };
            Outcome { stdout, problems }
        }
        Command::Stats => text(commands::cmd_stats(&cfg)?),
        Command::Debias => text(commands::cmd_debias(&cfg)?),
        Command::Split => text(commands::cmd_split(&cfg)?),
        Command::Eval {
            baseline,
            predictions,
            ground_truth,
        } => {
            let predictor = match (predictions, baseline) {
                (Some(p), _) => Predictor::File(p),
                (None, Baseline::Random) => Predictor::Random,
                (None, Baseline::Frequent) => Predictor::Frequent,
                (None, Baseline::Executor) => Predictor::Executor,
            };
            text(commands::cmd_eval(&cfg, &predictor, ground_truth.as_deref())?)
        }
        Command::DegradeEval { seeds, ground_truth } => {
            text(commands::cmd_degrade_eval(&cfg, seeds, ground_truth.as_deref())?)
        }
    })
}
