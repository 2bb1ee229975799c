//! Split persistence, corpus statistics and ablation transforms.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{parse_formulas, print_formula, Label, SymbolicPair, TaskId};
use crate::realization::{tokenize, Language, RealizedPair};

pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VocabMode {
    Disjoint,
    FullIntersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRole {
    Train,
    Test,
}

impl SplitRole {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitRole::Train => "train",
            SplitRole::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    NoiseLabel,
    PremiseOnly,
    HypothesisOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMeta {
    pub task: TaskId,
    pub language: Language,
    pub vocab_mode: VocabMode,
    pub seed: u64,
    pub generator_version: String,
    pub split_role: SplitRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablation: Option<Ablation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub id: String,
    /// Seed of the name binding used to realize this example.
    pub seed: u64,
    pub pair: RealizedPair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub meta: SplitMeta,
    pub examples: Vec<Example>,
}

impl DatasetSplit {
    pub fn label_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for e in &self.examples {
            counts[e.pair.label().as_int() as usize] += 1;
        }
        counts
    }

    pub fn is_balanced(&self) -> bool {
        let [n, c] = self.label_counts();
        n == c
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}: unsupported format (expected .jsonl)")]
    Format(PathBuf),
    #[error("empty split")]
    Empty,
    #[error("splits differ in {0}")]
    Mismatch(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Tsv,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "jsonl" => Some(Format::Jsonl),
            "tsv" => Some(Format::Tsv),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    task: TaskId,
    language: Language,
    premise: String,
    hypothesis: String,
    label: Label,
    logical_premise: Vec<String>,
    logical_hypothesis: String,
    template_id: String,
    seed: u64,
}

/// Sidecar holding split metadata: `dir/name.jsonl` has `dir/name.meta.json`.
pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_lines(path: &Path, lines: impl Iterator<Item = String>) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        w.write_all(line.as_bytes()).map_err(io_err(path))?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `split` to `path`. JSONL output also writes the metadata sidecar.
pub fn write_split(split: &DatasetSplit, path: &Path, format: Format) -> Result<(), DatasetError> {
    match format {
        Format::Jsonl => {
            let lines = split.examples.iter().map(|e| {
                let s = &e.pair.symbolic;
                let record = Record {
                    id: e.id.clone(),
                    task: split.meta.task,
                    language: e.pair.language,
                    premise: e.pair.premise_text.clone(),
                    hypothesis: e.pair.hypothesis_text.clone(),
                    label: s.label,
                    logical_premise: s.premise.iter().map(print_formula).collect(),
                    logical_hypothesis: print_formula(&s.hypothesis),
                    template_id: s.template_id.clone(),
                    seed: e.seed,
                };
                serde_json::to_string(&record).expect("records serialize")
            });
            write_lines(path, lines)?;
            let meta = serde_json::to_string_pretty(&split.meta).expect("meta serializes");
            let mp = meta_path(path);
            std::fs::write(&mp, meta + "\n").map_err(io_err(&mp))
        }
        Format::Tsv => {
            let header = std::iter::once("id\tpremise\thypothesis\tlabel".to_string());
            let rows = split.examples.iter().map(|e| {
                format!(
                    "{}\t{}\t{}\t{}",
                    e.id,
                    e.pair.premise_text,
                    e.pair.hypothesis_text,
                    e.pair.label().as_int()
                )
            });
            write_lines(path, header.chain(rows))
        }
    }
}

/// Reads and validates a JSONL split. Imbalanced label counts are logged
/// but accepted; check [`DatasetSplit::is_balanced`].
pub fn read_split(path: &Path) -> Result<DatasetSplit, DatasetError> {
    if Format::from_path(path) != Some(Format::Jsonl) {
        return Err(DatasetError::Format(path.to_path_buf()));
    }
    let file = File::open(path).map_err(io_err(path))?;
    let schema = |line: usize, message: String| DatasetError::Schema {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut examples = Vec::new();
    let mut first: Option<(TaskId, Language)> = None;
    let mut ids = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Record = serde_json::from_str(&line).map_err(|e| schema(n, e.to_string()))?;
        if !ids.insert(r.id.clone()) {
            return Err(schema(n, format!("duplicate id `{}`", r.id)));
        }
        match first {
            None => first = Some((r.task, r.language)),
            Some((t, l)) if (t, l) != (r.task, r.language) => {
                return Err(schema(n, "task or language differs from earlier records".into()))
            }
            _ => {}
        }
        let mut texts = r.logical_premise.clone();
        texts.push(r.logical_hypothesis.clone());
        let mut formulas = parse_formulas(&texts).map_err(|e| schema(n, format!("logical form: {e}")))?;
        let hypothesis = formulas.pop().expect("hypothesis present");
        examples.push(Example {
            id: r.id,
            seed: r.seed,
            pair: RealizedPair {
                premise_text: r.premise,
                hypothesis_text: r.hypothesis,
                language: r.language,
                symbolic: SymbolicPair {
                    premise: formulas,
                    hypothesis,
                    label: r.label,
                    task: r.task,
                    template_id: r.template_id,
                },
            },
        });
    }
    let Some((task, language)) = first else {
        return Err(DatasetError::Empty);
    };
    let mp = meta_path(path);
    let meta = if mp.exists() {
        let text = std::fs::read_to_string(&mp).map_err(io_err(&mp))?;
        let meta: SplitMeta = serde_json::from_str(&text).map_err(|e| DatasetError::Schema {
            path: mp.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if (meta.task, meta.language) != (task, language) {
            return Err(DatasetError::Mismatch("task or language between records and metadata"));
        }
        meta
    } else {
        SplitMeta {
            task,
            language,
            vocab_mode: VocabMode::Disjoint,
            seed: 0,
            generator_version: GENERATOR_VERSION.into(),
            split_role: SplitRole::Train,
            ablation: None,
        }
    };
    let split = DatasetSplit { meta, examples };
    if !split.is_balanced() {
        let [n, c] = split.label_counts();
        log::warn!(
            "{}: labels are imbalanced ({c} contradiction, {n} non-contradiction)",
            path.display()
        );
    }
    Ok(split)
}

/// Corpus statistics over the concatenated premise and hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskStats {
    pub vocab_size: usize,
    pub vocab_intersection: usize,
    pub mean_input_words: f64,
    pub mean_input_chars: f64,
    pub max_input_words: usize,
    pub max_input_chars: usize,
}

pub fn vocabulary(split: &DatasetSplit) -> BTreeSet<String> {
    split
        .examples
        .iter()
        .flat_map(|e| tokenize(&e.pair.input_text()))
        .collect()
}

/// Tokens occurring in both splits.
pub fn shared_vocabulary(train: &DatasetSplit, test: &DatasetSplit) -> BTreeSet<String> {
    vocabulary(train).intersection(&vocabulary(test)).cloned().collect()
}

/// Vocabulary size counts the union of both splits; lengths are averaged
/// over every example of both.
pub fn compute_stats(train: &DatasetSplit, test: &DatasetSplit) -> Result<TaskStats, DatasetError> {
    if train.is_empty() || test.is_empty() {
        return Err(DatasetError::Empty);
    }
    if train.meta.task != test.meta.task {
        return Err(DatasetError::Mismatch("task"));
    }
    if train.meta.language != test.meta.language {
        return Err(DatasetError::Mismatch("language"));
    }
    let (a, b) = (vocabulary(train), vocabulary(test));
    let (mut words, mut chars) = (0usize, 0usize);
    let (mut max_words, mut max_chars) = (0usize, 0usize);
    let all = train.examples.iter().chain(&test.examples);
    for e in all.clone() {
        let text = e.pair.input_text();
        let w = tokenize(&text).len();
        let c = text.chars().count();
        words += w;
        chars += c;
        max_words = max_words.max(w);
        max_chars = max_chars.max(c);
    }
    let n = all.count() as f64;
    Ok(TaskStats {
        vocab_size: a.union(&b).count(),
        vocab_intersection: a.intersection(&b).count(),
        mean_input_words: words as f64 / n,
        mean_input_chars: chars as f64 / n,
        max_input_words: max_words,
        max_input_chars: max_chars,
    })
}

/// Applies an ablation. Texts that are not ablated are left untouched.
pub fn ablate(split: &DatasetSplit, mode: Ablation, seed: u64) -> DatasetSplit {
    let mut out = split.clone();
    out.meta.ablation = Some(mode);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for e in &mut out.examples {
        match mode {
            Ablation::NoiseLabel => {
                e.pair.symbolic.label = if rng.gen::<bool>() {
                    Label::Contradiction
                } else {
                    Label::NonContradiction
                };
            }
            Ablation::PremiseOnly => e.pair.hypothesis_text.clear(),
            Ablation::HypothesisOnly => e.pair.premise_text.clear(),
        }
    }
    out
}
