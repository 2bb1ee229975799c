use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use contra_forge::dataset::{write_split, Format};
use contra_forge::logic::TaskId;
use contra_forge::realization::{bundled_lexicon, load_lexicon, Language, Lexicon, LexiconRole};
use contra_forge::taskgen::{make_split, TaskConfig};
use serde_json::json;

use crate::manifest::Recorder;
use crate::{LangArg, VocabArg};

#[derive(Args)]
pub struct GenerateArgs {
    /// Task number, 1 to 7.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=7))]
    task: u8,
    #[arg(long, value_enum, default_value = "en")]
    lang: LangArg,
    /// Training examples (even).
    #[arg(long, default_value_t = 10_000)]
    train: usize,
    /// Test examples (even).
    #[arg(long, default_value_t = 1_000)]
    test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "disjoint")]
    vocab_mode: VocabArg,
    /// Lexicon for the training split instead of the bundled one.
    #[arg(long)]
    lexicon_train: Option<PathBuf>,
    /// Lexicon for the test split instead of the bundled one.
    #[arg(long)]
    lexicon_test: Option<PathBuf>,
}

fn lexicon(path: &Option<PathBuf>, lang: Language, role: LexiconRole) -> Result<(Lexicon, String)> {
    match path {
        Some(p) => Ok((
            load_lexicon(p).with_context(|| format!("loading lexicon {}", p.display()))?,
            p.display().to_string(),
        )),
        None => {
            let source = match std::env::var_os(contra_forge::realization::LEXDIR_ENV) {
                Some(d) => format!("{}", PathBuf::from(d).display()),
                None => "bundled".to_string(),
            };
            Ok((bundled_lexicon(lang, role)?, source))
        }
    }
}

pub fn run(args: GenerateArgs, argv: &[String]) -> Result<()> {
    let rec = Recorder::start("generate", argv);
    let task = TaskId::new(args.task).expect("clap checks the range");
    let lang = Language::from(args.lang);
    let mut cfg = TaskConfig::new(task).with_sizes(args.train, args.test).with_seed(args.seed);
    cfg.vocab_mode = args.vocab_mode.into();
    let (lex_train, train_source) = lexicon(&args.lexicon_train, lang, LexiconRole::Train)?;
    let (lex_test, test_source) = lexicon(&args.lexicon_test, lang, LexiconRole::Test)?;
    if lex_train.language != lang || lex_test.language != lang {
        bail!("lexicon language does not match --lang {}", lang.code());
    }

    log::info!("generating task {task} ({}) with seed {}", lang.code(), args.seed);
    let (train, test) = make_split(&cfg, &lex_train, &lex_test)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let stem = format!("task{task}_{}", lang.code());
    let mut outputs = Vec::new();
    for split in [&train, &test] {
        let base = format!("{stem}_{}", split.meta.split_role.as_str());
        for (ext, format) in [("jsonl", Format::Jsonl), ("tsv", Format::Tsv)] {
            let path = args.out.join(format!("{base}.{ext}"));
            write_split(split, &path, format)?;
            outputs.push(path);
        }
        outputs.push(args.out.join(format!("{base}.meta.json")));
    }
    let config = json!({
        "task": cfg,
        "language": lang,
        "lexicon_train": train_source,
        "lexicon_test": test_source,
    });
    let manifest = args.out.join(format!("{stem}.manifest.json"));
    rec.finish(&manifest, config, vec![args.seed], &[], &outputs)?;
    println!(
        "task {task} ({}): {} train / {} test examples written to {}",
        lang.code(),
        train.len(),
        test.len(),
        args.out.display()
    );
    Ok(())
}
