mod analyze;
mod generate;
mod manifest;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use contra_forge::dataset::{Ablation, VocabMode};
use contra_forge::realization::Language;

#[derive(Parser)]
#[command(name = "contra-forge", version, about = "Generate, verify and analyse contradiction-detection datasets")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the train and test splits of one task.
    Generate(generate::GenerateArgs),
    /// Re-label a JSONL split from its logical forms.
    Verify(verify::VerifyArgs),
    /// Vocabulary and length statistics of a train/test pair.
    Stats(analyze::StatsArgs),
    /// Write an ablated copy of a split.
    Ablate(analyze::AblateArgs),
    /// Train and evaluate the bag-of-words random forest.
    Baseline(analyze::BaselineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LangArg {
    En,
    Pt,
}

impl From<LangArg> for Language {
    fn from(l: LangArg) -> Language {
        match l {
            LangArg::En => Language::English,
            LangArg::Pt => Language::Portuguese,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum VocabArg {
    Disjoint,
    Intersect,
}

impl From<VocabArg> for VocabMode {
    fn from(v: VocabArg) -> VocabMode {
        match v {
            VocabArg::Disjoint => VocabMode::Disjoint,
            VocabArg::Intersect => VocabMode::FullIntersection,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum AblationArg {
    NoiseLabel,
    PremiseOnly,
    HypothesisOnly,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Ablation {
        match a {
            AblationArg::NoiseLabel => Ablation::NoiseLabel,
            AblationArg::PremiseOnly => Ablation::PremiseOnly,
            AblationArg::HypothesisOnly => Ablation::HypothesisOnly,
        }
    }
}

/// Appends `suffix` to the file name of `path` after dropping its extension.
pub fn sibling(path: &std::path::Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let args: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Command::Generate(a) => generate::run(a, &args).map(|_| true),
        Command::Verify(a) => verify::run(a),
        Command::Stats(a) => analyze::stats(a, &args).map(|_| true),
        Command::Ablate(a) => analyze::ablate(a, &args).map(|_| true),
        Command::Baseline(a) => analyze::baseline(a, &args).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
