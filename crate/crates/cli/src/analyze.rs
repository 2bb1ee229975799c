use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use contra_forge::baseline::{proportion_sweep, train_and_evaluate, ForestParams};
use contra_forge::dataset::{self, compute_stats, read_split, shared_vocabulary, write_split, Format};
use contra_forge::realization::{bundled_lexicon, LexiconRole};
use serde::Serialize;
use serde_json::json;

use crate::manifest::Recorder;
use crate::{sibling, AblationArg};

fn write_json(path: &PathBuf, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// JSON report (default: next to the test file).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct StatsReport {
    #[serde(flatten)]
    stats: dataset::TaskStats,
    /// Shared tokens that are names in the bundled lexicons of the language.
    shared_name_tokens: Vec<String>,
}

pub fn stats(args: StatsArgs, argv: &[String]) -> Result<()> {
    let rec = Recorder::start("stats", argv);
    let train = read_split(&args.train)?;
    let test = read_split(&args.test)?;
    let stats = compute_stats(&train, &test)?;
    let lang = train.meta.language;
    let mut names = BTreeSet::new();
    for role in [LexiconRole::Train, LexiconRole::Test] {
        names.extend(bundled_lexicon(lang, role)?.name_tokens());
    }
    let shared_name_tokens = shared_vocabulary(&train, &test)
        .into_iter()
        .filter(|t| names.contains(t))
        .collect();
    let report = StatsReport {
        stats,
        shared_name_tokens,
    };

    let s = &report.stats;
    println!("task {} ({})", train.meta.task, lang.code());
    println!("  vocabulary size      {:>8}", s.vocab_size);
    println!("  vocab intersection   {:>8}", s.vocab_intersection);
    println!("  mean input (words)   {:>8.2}", s.mean_input_words);
    println!("  max input (words)    {:>8}", s.max_input_words);
    println!("  mean input (chars)   {:>8.2}", s.mean_input_chars);
    println!("  max input (chars)    {:>8}", s.max_input_chars);
    println!("  shared name tokens   {:>8}", report.shared_name_tokens.len());

    let out = args.out.unwrap_or_else(|| sibling(&args.test, ".stats.json"));
    write_json(&out, &report)?;
    rec.finish(
        &sibling(&out, ".manifest.json"),
        json!({ "train": args.train, "test": args.test }),
        vec![],
        &[&args.train, &args.test],
        &[out.clone()],
    )
}

#[derive(Args)]
pub struct AblateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: AblationArg,
    /// Seed for noise labels.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file, `.jsonl` or `.tsv`.
    #[arg(long)]
    output: PathBuf,
}

pub fn ablate(args: AblateArgs, argv: &[String]) -> Result<()> {
    let rec = Recorder::start("ablate", argv);
    let Some(format) = Format::from_path(&args.output) else {
        bail!("{}: output must end in .jsonl or .tsv", args.output.display());
    };
    if args.output == args.input {
        bail!("refusing to overwrite the input split");
    }
    let split = read_split(&args.input)?;
    let mode = args.mode.into();
    let out = dataset::ablate(&split, mode, args.seed);
    write_split(&out, &args.output, format)?;
    let mut outputs = vec![args.output.clone()];
    if format == Format::Jsonl {
        outputs.push(dataset::meta_path(&args.output));
    }
    rec.finish(
        &sibling(&args.output, ".manifest.json"),
        json!({ "input": args.input, "mode": mode }),
        vec![args.seed],
        &[&args.input],
        &outputs,
    )?;
    println!("{} examples written to {}", out.len(), args.output.display());
    Ok(())
}

#[derive(Args)]
pub struct BaselineArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated training proportions, e.g. 0.1,0.4,0.7,1.0.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    /// Report file (default: next to the test file).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Save the trained forest here.
    #[arg(long)]
    model: Option<PathBuf>,
}

pub fn baseline(args: BaselineArgs, argv: &[String]) -> Result<()> {
    let rec = Recorder::start("baseline", argv);
    let train = read_split(&args.train)?;
    let test = read_split(&args.test)?;
    let params = ForestParams {
        n_trees: args.trees,
        max_depth: args.max_depth,
        min_leaf: args.min_leaf,
        seed: args.seed,
        ..ForestParams::default()
    };
    let mut outputs = Vec::new();
    let report_path;
    if let Some(proportions) = &args.sweep {
        let curve = proportion_sweep(&train, &test, proportions, &params)?;
        println!("{:>10} {:>8} {:>9}", "proportion", "train", "accuracy");
        for p in &curve {
            println!("{:>10.3} {:>8} {:>9.4}", p.proportion, p.train_examples, p.accuracy);
        }
        report_path = args.report.clone().unwrap_or_else(|| sibling(&args.test, ".sweep.json"));
        write_json(&report_path, &json!({ "params": params, "curve": curve }))?;
    } else {
        let (model, eval) = train_and_evaluate(&train, &test, &params)?;
        println!("accuracy  {:.4}  ({} test examples)", eval.accuracy, eval.examples);
        if let Some(oob) = model.oob_accuracy {
            println!("oob       {oob:.4}");
        }
        let c = eval.confusion;
        println!("confusion (rows: truth non-contradiction, contradiction)");
        println!("  {:>6} {:>6}", c[0][0], c[0][1]);
        println!("  {:>6} {:>6}", c[1][0], c[1][1]);
        report_path = args.report.clone().unwrap_or_else(|| sibling(&args.test, ".baseline.json"));
        write_json(
            &report_path,
            &json!({
                "params": params,
                "vocabulary": model.space.len(),
                "oob_accuracy": model.oob_accuracy,
                "accuracy": eval.accuracy,
                "confusion": eval.confusion,
                "examples": eval.examples,
            }),
        )?;
        if let Some(path) = &args.model {
            model.save(path)?;
            outputs.push(path.clone());
        }
    }
    outputs.insert(0, report_path.clone());
    rec.finish(
        &sibling(&report_path, ".manifest.json"),
        json!({ "train": args.train, "test": args.test, "params": params, "sweep": args.sweep }),
        vec![args.seed],
        &[&args.train, &args.test],
        &outputs,
    )
}
