//! Seeded generators for the seven tasks and split construction.
//!
//! Generation is counter based: every example derives its own random stream
//! from `(seed, task, role, index)`, so examples are built in parallel and the
//! output does not depend on scheduling. Labels alternate with the index
//! (exact balance) before a seeded shuffle fixes the final order.

mod templates;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::dataset::{DatasetSplit, Example, SplitMeta, GENERATOR_VERSION};
use crate::logic::{Label, LogicError, Operator, Sort, SymbolicPair, TaskId, MAX_COUNT};
use crate::realization::{draw_binding, realize_with, Lexicon, RealizeError};
use crate::semantics::{label_pair, SemanticsError};

pub use crate::dataset::{SplitRole, VocabMode};

/// Consecutive duplicate realizations tolerated before giving up.
pub const MAX_COLLISIONS: usize = 1000;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("constant pool exhausted: all {available} {sort} constants in use")]
    PoolExhausted { sort: Sort, available: usize },
    #[error("generator bug: template {template_id} built a {expected} pair but the semantics say {computed}")]
    LabelMismatch {
        template_id: String,
        expected: Label,
        computed: Label,
    },
    #[error("task {task} pair uses operator {operator:?}, introduced at task {introduced}")]
    Hierarchy {
        task: TaskId,
        operator: Operator,
        introduced: TaskId,
    },
    #[error("lexicons share names (people: {people:?}; places: {places:?})")]
    NotDisjoint {
        people: Vec<String>,
        places: Vec<String>,
    },
    #[error("lexicon languages differ")]
    LanguageMismatch,
    #[error("example {index}: {MAX_COLLISIONS} consecutive duplicate realizations")]
    Duplicates { index: usize },
    #[error("{sort} names are associated with labels in the {role:?} split (chi-square p = {p_value:e})")]
    NameLeakage { role: SplitRole, sort: Sort, p_value: f64 },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Realize(#[from] RealizeError),
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: u32,
    pub max: u32,
}

impl IntRange {
    pub const fn new(min: u32, max: u32) -> IntRange {
        IntRange { min, max }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u32 {
        rng.gen_range(self.min..=self.max)
    }

    pub fn contains(&self, v: u32) -> bool {
        (self.min..=self.max).contains(&v)
    }
}

/// Shape of counting premises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountForms {
    /// A place count and a person count for the same agent, conjoined.
    Conjoined,
    /// One count only.
    Single,
    /// Either, with equal probability.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskConfig {
    pub task: TaskId,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
    /// Premise facts (task 1) or order atoms (task 5).
    pub facts_range: IntRange,
    pub count_range: IntRange,
    /// Agents per coordinated sentence (task 2).
    pub coordination_range: IntRange,
    /// Coordinated sentences per premise (task 2).
    pub sentences_range: IntRange,
    /// Unrelated facts added to quantified and counting premises.
    pub distractor_range: IntRange,
    pub count_forms: CountForms,
    pub vocab_mode: VocabMode,
    /// Smallest chi-square p-value accepted by the name/label independence check.
    pub leakage_alpha: f64,
}

impl TaskConfig {
    pub fn new(task: TaskId) -> TaskConfig {
        let n = task.number();
        TaskConfig {
            task,
            train_size: 10_000,
            test_size: 1_000,
            seed: 0,
            facts_range: if n == 5 { IntRange::new(4, 10) } else { IntRange::new(2, 12) },
            count_range: IntRange::new(1, 30),
            coordination_range: IntRange::new(2, 4),
            sentences_range: IntRange::new(1, 4),
            distractor_range: match n {
                3 => IntRange::new(1, 2),
                6 => IntRange::new(0, 3),
                _ => IntRange::new(0, 0),
            },
            count_forms: CountForms::Both,
            vocab_mode: VocabMode::Disjoint,
            leakage_alpha: 1e-6,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> TaskConfig {
        self.seed = seed;
        self
    }

    pub fn with_sizes(mut self, train: usize, test: usize) -> TaskConfig {
        self.train_size = train;
        self.test_size = test;
        self
    }

    pub fn size(&self, role: SplitRole) -> usize {
        match role {
            SplitRole::Train => self.train_size,
            SplitRole::Test => self.test_size,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::Config(m));
        if self.train_size % 2 != 0 || self.test_size % 2 != 0 {
            return bad(format!("sizes must be even, got {}/{}", self.train_size, self.test_size));
        }
        let ranges = [
            ("facts_range", self.facts_range, 1),
            ("count_range", self.count_range, 1),
            ("coordination_range", self.coordination_range, 2),
            ("sentences_range", self.sentences_range, 1),
            ("distractor_range", self.distractor_range, 0),
        ];
        for (name, r, least) in ranges {
            if r.min > r.max {
                return bad(format!("{name} is empty ({}..={})", r.min, r.max));
            }
            if r.min < least {
                return bad(format!("{name} must start at {least} or more"));
            }
        }
        if self.count_range.max > MAX_COUNT {
            return bad(format!("count_range exceeds {MAX_COUNT}"));
        }
        if !(0.0..1.0).contains(&self.leakage_alpha) {
            return bad("leakage_alpha must lie in [0, 1)".into());
        }
        Ok(())
    }

    /// Configurations of tasks 1-6 used by the mixed task; sizes and seed
    /// are irrelevant there.
    pub fn mix_components(&self) -> Vec<TaskConfig> {
        TaskId::ALL[..6]
            .iter()
            .map(|&t| TaskConfig {
                count_forms: self.count_forms,
                ..TaskConfig::new(t)
            })
            .collect()
    }
}

/// How many symbolic constants of each sort a template may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantPool {
    pub people: usize,
    pub places: usize,
}

impl Default for ConstantPool {
    fn default() -> Self {
        ConstantPool {
            people: 64,
            places: 64,
        }
    }
}

/// SplitMix64 finalizer folded over `parts`.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

fn role_tag(role: SplitRole) -> u64 {
    match role {
        SplitRole::Train => 1,
        SplitRole::Test => 2,
    }
}

const SHUFFLE_TAG: u64 = u64::MAX;
const REALIZE_TAG: u64 = u64::MAX - 1;

fn label_for(index: usize) -> Label {
    if index % 2 == 0 {
        Label::Contradiction
    } else {
        Label::NonContradiction
    }
}

/// Checks that every operator of `pair` is admitted by `task`.
pub fn check_hierarchy(task: TaskId, pair: &SymbolicPair) -> Result<(), GenError> {
    match pair.operators().into_iter().find(|op| !task.admits(*op)) {
        Some(operator) => Err(GenError::Hierarchy {
            task,
            operator,
            introduced: operator.introduced_at(),
        }),
        None => Ok(()),
    }
}

/// Occurrences of each operator over a set of pairs.
pub fn operator_census(pairs: &[SymbolicPair]) -> BTreeMap<Operator, usize> {
    let mut out = BTreeMap::new();
    for p in pairs {
        for op in p.operators() {
            *out.entry(op).or_insert(0) += 1;
        }
    }
    out
}

fn sample_checked(
    origin: &TaskConfig,
    task: TaskId,
    label: Label,
    pool: &ConstantPool,
    rng: &mut ChaCha8Rng,
) -> Result<SymbolicPair, GenError> {
    let d = templates::sample(origin.task, label, origin, pool, rng)?;
    let pair = SymbolicPair {
        premise: d.premise,
        hypothesis: d.hypothesis,
        label,
        task,
        template_id: d.template_id,
    };
    check_hierarchy(task, &pair)?;
    let computed = label_pair(&pair.premise, &pair.hypothesis)?;
    if computed != label {
        return Err(GenError::LabelMismatch {
            template_id: pair.template_id,
            expected: label,
            computed,
        });
    }
    Ok(pair)
}

fn assemble(
    n: usize,
    stream: u64,
    make: impl Fn(Label, &mut ChaCha8Rng) -> Result<SymbolicPair, GenError> + Sync,
) -> Result<Vec<SymbolicPair>, GenError> {
    let mut pairs = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[stream, i as u64]));
            make(label_for(i), &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(&[stream, SHUFFLE_TAG])));
    Ok(pairs)
}

/// Generates the symbolic pairs of one split.
pub fn generate_pairs(cfg: &TaskConfig, pool: &ConstantPool, role: SplitRole) -> Result<Vec<SymbolicPair>, GenError> {
    cfg.validate()?;
    let n = cfg.size(role);
    let stream = derive_seed(&[cfg.seed, cfg.task.number() as u64, role_tag(role)]);
    if cfg.task == TaskId::MIXED {
        return generate_mixed(&cfg.mix_components(), n, stream, pool);
    }
    assemble(n, stream, |label, rng| sample_checked(cfg, cfg.task, label, pool, rng))
}

/// Mixed task: each example comes from one of `cfgs`, chosen uniformly.
/// Template ids keep the originating task's prefix.
pub fn generate_mixed(cfgs: &[TaskConfig], total: usize, seed: u64, pool: &ConstantPool) -> Result<Vec<SymbolicPair>, GenError> {
    if total % 2 != 0 {
        return Err(GenError::Config(format!("total must be even, got {total}")));
    }
    if cfgs.is_empty() {
        return Err(GenError::Config("no component tasks".into()));
    }
    for c in cfgs {
        if c.task == TaskId::MIXED {
            return Err(GenError::Config("mixed task cannot contain itself".into()));
        }
        c.validate()?;
    }
    assemble(total, seed, |label, rng| {
        let origin = &cfgs[rng.gen_range(0..cfgs.len())];
        sample_checked(origin, TaskId::MIXED, label, pool, rng)
    })
}

/// Task a mixed pair was drawn from, read off its template id.
pub fn origin_task(pair: &SymbolicPair) -> Option<TaskId> {
    let digits = pair.template_id.strip_prefix('t')?.split('/').next()?;
    TaskId::new(digits.parse().ok()?)
}

fn collisions(a: impl Iterator<Item = String>, b: impl Iterator<Item = String>) -> Vec<String> {
    let a: BTreeSet<String> = a.collect();
    let b: BTreeSet<String> = b.collect();
    a.intersection(&b).cloned().collect()
}

/// Chi-square test of independence between surface names and labels.
pub fn name_label_p_value(examples: &[(Label, Vec<String>)]) -> f64 {
    let mut table: BTreeMap<&str, [f64; 2]> = BTreeMap::new();
    for (label, names) in examples {
        for n in names {
            table.entry(n).or_insert([0.0; 2])[label.as_int() as usize] += 1.0;
        }
    }
    let col = table.values().fold([0.0; 2], |acc, r| [acc[0] + r[0], acc[1] + r[1]]);
    let total = col[0] + col[1];
    if table.len() < 2 || col[0] == 0.0 || col[1] == 0.0 {
        return 1.0;
    }
    let mut stat = 0.0;
    for row in table.values() {
        let r = row[0] + row[1];
        for j in 0..2 {
            let e = r * col[j] / total;
            stat += (row[j] - e).powi(2) / e;
        }
    }
    let df = (table.len() - 1) as f64;
    1.0 - ChiSquared::new(df).expect("df is positive").cdf(stat)
}

fn realize_split(
    cfg: &TaskConfig,
    pairs: Vec<SymbolicPair>,
    lex: &Lexicon,
    role: SplitRole,
) -> Result<DatasetSplit, GenError> {
    let stream = derive_seed(&[cfg.seed, cfg.task.number() as u64, role_tag(role), REALIZE_TAG]);
    let attempt = |i: usize, k: usize| -> Result<_, GenError> {
        let seed = derive_seed(&[stream, i as u64, k as u64]);
        let binding = draw_binding(&pairs[i], lex, seed)?;
        let realized = realize_with(&pairs[i], lex, &binding)?;
        Ok((seed, binding, realized))
    };
    let first = (0..pairs.len())
        .into_par_iter()
        .map(|i| attempt(i, 0))
        .collect::<Result<Vec<_>, _>>()?;
    let mut seen = HashSet::new();
    let mut examples = Vec::with_capacity(pairs.len());
    let mut names = Vec::with_capacity(pairs.len());
    for (i, mut current) in first.into_iter().enumerate() {
        let mut k = 0;
        while !seen.insert((current.2.premise_text.clone(), current.2.hypothesis_text.clone())) {
            k += 1;
            if k > MAX_COLLISIONS {
                return Err(GenError::Duplicates { index: i });
            }
            current = attempt(i, k)?;
        }
        let (seed, binding, pair) = current;
        names.push((pair.label(), binding));
        examples.push(Example {
            id: format!("t{}-{}-{i:05}", cfg.task, role.as_str()),
            seed,
            pair,
        });
    }
    // One table per sort: the person/place mix legitimately varies with the
    // label, only the choice of names within a sort must not.
    for sort in [Sort::Person, Sort::Place] {
        let table: Vec<(Label, Vec<String>)> = names
            .iter()
            .map(|(label, b)| {
                let picked = b.iter().filter(|(c, _)| c.sort() == sort).map(|(_, n)| n.clone());
                (*label, picked.collect())
            })
            .collect();
        let p_value = name_label_p_value(&table);
        if p_value < cfg.leakage_alpha {
            return Err(GenError::NameLeakage { role, sort, p_value });
        }
    }
    Ok(DatasetSplit {
        meta: SplitMeta {
            task: cfg.task,
            language: lex.language,
            vocab_mode: cfg.vocab_mode,
            seed: cfg.seed,
            generator_version: GENERATOR_VERSION.into(),
            split_role: role,
            ablation: None,
        },
        examples,
    })
}

/// Builds the realized train and test splits. In `FullIntersection` mode the
/// test split is realized with `lex_train` as well.
pub fn make_split(cfg: &TaskConfig, lex_train: &Lexicon, lex_test: &Lexicon) -> Result<(DatasetSplit, DatasetSplit), GenError> {
    cfg.validate()?;
    if lex_train.language != lex_test.language {
        return Err(GenError::LanguageMismatch);
    }
    let lex_test = match cfg.vocab_mode {
        VocabMode::FullIntersection => lex_train,
        VocabMode::Disjoint => {
            let own = |l: &Lexicon| l.person_surface().map(String::from).collect::<Vec<_>>();
            let people = collisions(own(lex_train).into_iter(), own(lex_test).into_iter());
            let places = collisions(lex_train.place_names.iter().cloned(), lex_test.place_names.iter().cloned());
            if !people.is_empty() || !places.is_empty() {
                return Err(GenError::NotDisjoint { people, places });
            }
            lex_test
        }
    };
    let pool = ConstantPool::default();
    let mut out = Vec::with_capacity(2);
    for (role, lex) in [(SplitRole::Train, lex_train), (SplitRole::Test, lex_test)] {
        let pairs = generate_pairs(cfg, &pool, role)?;
        out.push(realize_split(cfg, pairs, lex, role)?);
    }
    let test = out.pop().expect("two splits");
    let train = out.pop().expect("two splits");
    Ok((train, test))
}
