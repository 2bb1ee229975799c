//! Acceptance suite. Each criterion is its own test and prints one
//! `PASS`/`FAIL` line with the measured values; run with
//! `cargo test --test acceptance -- --nocapture --test-threads 1` to see
//! them in order.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use contra_forge::baseline::{train_and_evaluate, ForestParams};
use contra_forge::dataset::{ablate, read_split, shared_vocabulary, Ablation, DatasetSplit, VocabMode};
use contra_forge::logic::{constants_of, Constant, Label, SymbolicPair, TaskId};
use contra_forge::realization::{bundled_lexicon, Language, Lexicon, LexiconRole};
use contra_forge::semantics::{brute_force_consistent, label_pair, UniverseBounds};
use contra_forge::taskgen::{generate_mixed, generate_pairs, make_split, ConstantPool, IntRange, SplitRole, TaskConfig};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 42;
const LANGS: [&str; 2] = ["en", "pt"];

fn report(n: u32, name: &str, ok: bool, detail: impl AsRef<str>) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("[{verdict}] criterion {n} ({name}): {}", detail.as_ref());
    assert!(ok, "criterion {n} failed: {}", detail.as_ref());
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contra-forge"))
}

fn generate_suite(out: &Path) -> Duration {
    let start = Instant::now();
    for task in 1..=7 {
        for lang in LANGS {
            let status = bin()
                .args(["generate", "--task", &task.to_string(), "--lang", lang, "--seed", &SEED.to_string()])
                .arg("--out")
                .arg(out)
                .status()
                .expect("generate runs");
            assert!(status.success(), "generate task {task} {lang} failed");
        }
    }
    start.elapsed()
}

struct Suite {
    dir: PathBuf,
    elapsed: Duration,
    _keep: tempfile::TempDir,
}

impl Suite {
    fn path(&self, task: u8, lang: &str, role: &str) -> PathBuf {
        self.dir.join(format!("task{task}_{lang}_{role}.jsonl"))
    }

    fn load(&self, task: u8, lang: &str) -> (DatasetSplit, DatasetSplit) {
        (
            read_split(&self.path(task, lang, "train")).unwrap(),
            read_split(&self.path(task, lang, "test")).unwrap(),
        )
    }
}

/// The full 7 tasks x 2 languages suite at default sizes, generated once
/// through the command-line tool.
fn suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let keep = tempfile::tempdir().unwrap();
        let dir = keep.path().to_path_buf();
        let elapsed = generate_suite(&dir);
        Suite {
            dir,
            elapsed,
            _keep: keep,
        }
    })
}

fn lexicons(lang: Language) -> (Lexicon, Lexicon) {
    (
        bundled_lexicon(lang, LexiconRole::Train).unwrap(),
        bundled_lexicon(lang, LexiconRole::Test).unwrap(),
    )
}

fn small_config(task: TaskId) -> TaskConfig {
    let mut c = TaskConfig::new(task);
    c.facts_range = if task.number() == 5 { IntRange::new(2, 4) } else { IntRange::new(1, 3) };
    c.count_range = IntRange::new(1, 2);
    c.coordination_range = IntRange::new(2, 2);
    c.sentences_range = IntRange::new(1, 2);
    c.distractor_range = IntRange::new(0, 1);
    c
}

fn small_enough(p: &SymbolicPair) -> bool {
    let (people, places) = constants_of(p.formulas());
    people.len() <= 4 && places.len() <= 4
}

#[test]
fn criterion_1_label_soundness_against_enumeration() {
    let start = Instant::now();
    let pool = ConstantPool::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for task in TaskId::ALL {
        let mut picked = Vec::new();
        let mut round = 0u64;
        while picked.len() < 500 && round < 20 {
            let batch = if task == TaskId::MIXED {
                let parts: Vec<TaskConfig> = TaskId::ALL[..6].iter().map(|&t| small_config(t)).collect();
                generate_mixed(&parts, 2_000, 1_000 + round, &pool).unwrap()
            } else {
                let c = small_config(task).with_sizes(2_000, 2).with_seed(round);
                generate_pairs(&c, &pool, SplitRole::Train).unwrap()
            };
            picked.extend(batch.into_iter().filter(small_enough));
            round += 1;
        }
        picked.truncate(500);
        let disagreements = picked
            .par_iter()
            .filter(|p| {
                let mut all = p.premise.clone();
                all.push(p.hypothesis.clone());
                let oracle = brute_force_consistent(&all, UniverseBounds::default()).expect("within the guard");
                let fast = label_pair(&p.premise, &p.hypothesis).unwrap() == Label::NonContradiction;
                oracle != fast || fast != (p.label == Label::NonContradiction)
            })
            .count();
        ok &= picked.len() == 500 && disagreements == 0;
        lines.push(format!("t{task}: {}/{disagreements}", picked.len()));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    report(
        1,
        "label soundness",
        ok,
        format!("pairs/disagreements {} in {:.1}s", lines.join(" "), elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_2_self_verification() {
    let s = suite();
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for task in 1..=7u8 {
        for lang in LANGS {
            for role in ["train", "test"] {
                let path = s.path(task, lang, role);
                let out = bin().arg("verify").arg(&path).output().unwrap();
                checked += 1;
                if !out.status.success() {
                    failures.push(format!("{}: {}", path.display(), String::from_utf8_lossy(&out.stdout)));
                }
            }
        }
    }
    let elapsed = start.elapsed() + s.elapsed;
    let ok = failures.is_empty() && elapsed < Duration::from_secs(600);
    report(
        2,
        "self-verification",
        ok,
        format!(
            "{checked} splits verified, {} with mismatches, {:.1}s including generation {}",
            failures.len(),
            elapsed.as_secs_f64(),
            failures.join("; ")
        ),
    );
}

#[test]
fn criterion_3_balance_and_scale() {
    let s = suite();
    let mut bad = Vec::new();
    for task in 1..=7u8 {
        for lang in LANGS {
            let (train, test) = s.load(task, lang);
            for (split, size) in [(&train, 10_000), (&test, 1_000)] {
                let [non, contra] = split.label_counts();
                if split.len() != size || contra != non {
                    bad.push(format!("t{task} {lang} {:?}: {contra}/{non}", split.meta.split_role));
                }
            }
        }
    }
    let ok = bad.is_empty() && s.elapsed < Duration::from_secs(300);
    report(
        3,
        "balance and scale",
        ok,
        format!(
            "14 train/test pairs of 10000/1000, all 50% contradictions: {}; suite generated in {:.1}s {}",
            bad.is_empty(),
            s.elapsed.as_secs_f64(),
            bad.join("; ")
        ),
    );
}

fn surface_names(split: &DatasetSplit, lex_train: &Lexicon, lex_test: &Lexicon) -> [BTreeSet<String>; 2] {
    // names are recovered from the lexicons, since splits store text only
    let people: BTreeSet<&str> = lex_train.person_surface().chain(lex_test.person_surface()).collect();
    let places: BTreeSet<&str> = lex_train.place_names.iter().chain(&lex_test.place_names).map(String::as_str).collect();
    split
        .examples
        .par_iter()
        .fold(
            || [BTreeSet::new(), BTreeSet::new()],
            |mut out, e| {
                let text = format!("{} {}", e.pair.premise_text, e.pair.hypothesis_text);
                for (k, names) in [(0, &people), (1, &places)] {
                    for n in names.iter() {
                        if contains_name(&text, n) {
                            out[k].insert(n.to_string());
                        }
                    }
                }
                out
            },
        )
        .reduce(
            || [BTreeSet::new(), BTreeSet::new()],
            |mut a, b| {
                for k in 0..2 {
                    a[k].extend(b[k].iter().cloned());
                }
                a
            },
        )
}

fn contains_name(text: &str, name: &str) -> bool {
    text.match_indices(name).any(|(i, _)| {
        let before = text[..i].chars().next_back();
        let after = text[i + name.len()..].chars().next();
        before.is_none_or(|c| !c.is_alphanumeric()) && after.is_none_or(|c| !c.is_alphanumeric())
    })
}

#[test]
fn criterion_4_disjointness() {
    let s = suite();
    let mut problems = Vec::new();
    let mut ratios = Vec::new();
    for lang in LANGS {
        let language = Language::from_code(lang).unwrap();
        let (lex_train, lex_test) = lexicons(language);
        let name_tokens: BTreeSet<String> = lex_train.name_tokens().union(&lex_test.name_tokens()).cloned().collect();
        let template = lex_train.template_tokens();
        for task in 1..=7u8 {
            let (train, test) = s.load(task, lang);
            let a = surface_names(&train, &lex_train, &lex_test);
            let b = surface_names(&test, &lex_train, &lex_test);
            for (k, sort) in ["people", "places"].iter().enumerate() {
                let both: Vec<&String> = a[k].intersection(&b[k]).collect();
                if !both.is_empty() {
                    problems.push(format!("t{task} {lang} {sort} shared: {both:?}"));
                }
            }
            let shared = shared_vocabulary(&train, &test);
            for t in &shared {
                if name_tokens.contains(t) || !template.contains(t) {
                    problems.push(format!("t{task} {lang}: shared token {t:?} is not a template word"));
                }
            }
            let stats = contra_forge::dataset::compute_stats(&train, &test).unwrap();
            ratios.push(format!("t{task}{lang} {}/{}", stats.vocab_intersection, stats.vocab_size));
        }
    }
    report(
        4,
        "disjointness",
        problems.is_empty(),
        format!("intersection/vocab {} {}", ratios.join(" "), problems.join("; ")),
    );
}

fn baseline_accuracies(mode: VocabMode) -> BTreeMap<u8, f64> {
    let (lex_train, lex_test) = lexicons(Language::English);
    (1..=7u8)
        .map(|task| {
            let (train, test) = match mode {
                VocabMode::Disjoint => suite().load(task, "en"),
                VocabMode::FullIntersection => {
                    let mut c = TaskConfig::new(TaskId::new(task).unwrap()).with_seed(SEED);
                    c.vocab_mode = mode;
                    make_split(&c, &lex_train, &lex_test).unwrap()
                }
            };
            let (_, eval) = train_and_evaluate(&train, &test, &ForestParams::default()).unwrap();
            (task, eval.accuracy)
        })
        .collect()
}

fn disjoint_accuracies() -> &'static (BTreeMap<u8, f64>, Duration) {
    static ACC: OnceLock<(BTreeMap<u8, f64>, Duration)> = OnceLock::new();
    ACC.get_or_init(|| {
        let start = Instant::now();
        let acc = baseline_accuracies(VocabMode::Disjoint);
        (acc, start.elapsed())
    })
}

fn fmt_acc(acc: &BTreeMap<u8, f64>) -> String {
    acc.iter().map(|(t, a)| format!("t{t}={a:.3}")).collect::<Vec<_>>().join(" ")
}

#[test]
fn criterion_5_baseline_near_chance_on_structural_tasks() {
    let (acc, elapsed) = disjoint_accuracies();
    let near_chance = [1u8, 2, 4, 5].iter().all(|t| (0.45..=0.60).contains(&acc[t]));
    let ok = near_chance && acc[&3] >= 0.58 && acc[&6] >= 0.53 && *elapsed < Duration::from_secs(900);
    report(
        5,
        "baseline accuracy bands",
        ok,
        format!("{} in {:.1}s", fmt_acc(acc), elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_6_vocabulary_intersection_helps() {
    let (disjoint, _) = disjoint_accuracies();
    let full = baseline_accuracies(VocabMode::FullIntersection);
    let mean = |m: &BTreeMap<u8, f64>| m.values().sum::<f64>() / m.len() as f64;
    let gain = mean(&full) - mean(disjoint);
    report(
        6,
        "vocabulary intersection effect",
        gain >= 0.05,
        format!(
            "disjoint mean {:.3}, full intersection mean {:.3} ({}), gain {:.1} points",
            mean(disjoint),
            mean(&full),
            fmt_acc(&full),
            gain * 100.0
        ),
    );
}

#[test]
fn criterion_7_ablation_sanity() {
    let mut ok = true;
    let mut details = Vec::new();
    for task in [1u8, 3, 6] {
        let (train, test) = suite().load(task, "en");
        let noisy = ablate(&train, Ablation::NoiseLabel, SEED);
        let (_, eval) = train_and_evaluate(&noisy, &test, &ForestParams::default()).unwrap();
        let sigma = (0.25 / test.len() as f64).sqrt();
        let in_band = (0.45..=0.55).contains(&eval.accuracy) && (eval.accuracy - 0.5).abs() <= 3.0 * sigma;
        ok &= in_band;
        details.push(format!("t{task} noise acc {:.3}", eval.accuracy));

        let premise_only = ablate(&train, Ablation::PremiseOnly, SEED);
        let hypothesis_only = ablate(&train, Ablation::HypothesisOnly, SEED);
        for (i, e) in train.examples.iter().enumerate() {
            let p = &premise_only.examples[i].pair;
            let h = &hypothesis_only.examples[i].pair;
            ok &= p.label() == e.pair.label() && h.label() == e.pair.label();
            ok &= p.hypothesis_text.is_empty() && p.premise_text == e.pair.premise_text;
            ok &= h.premise_text.is_empty() && h.hypothesis_text == e.pair.hypothesis_text;
        }
    }
    report(
        7,
        "ablation sanity",
        ok,
        format!("{}; premise-only and hypothesis-only keep labels and blank one field", details.join(", ")),
    );
}

fn manifest_digests(path: &Path) -> Vec<(String, String)> {
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| {
            let p = Path::new(o["path"].as_str().unwrap());
            (p.file_name().unwrap().to_string_lossy().into_owned(), o["sha256"].as_str().unwrap().to_owned())
        })
        .collect()
}

#[test]
fn criterion_8_determinism_and_language_symmetry() {
    let s = suite();
    let again = tempfile::tempdir().unwrap();
    generate_suite(again.path());
    let mut ok = true;
    let mut identical_files = 0;
    for task in 1..=7u8 {
        for lang in LANGS {
            let name = format!("task{task}_{lang}.manifest.json");
            let a = manifest_digests(&s.dir.join(&name));
            let b = manifest_digests(&again.path().join(&name));
            ok &= a == b && !a.is_empty();
            for (file, _) in &a {
                ok &= fs::read(s.dir.join(file)).unwrap() == fs::read(again.path().join(file)).unwrap();
                identical_files += 1;
            }
        }
        let (en_train, en_test) = s.load(task, "en");
        let (pt_train, pt_test) = s.load(task, "pt");
        for (en, pt) in [(&en_train, &pt_train), (&en_test, &pt_test)] {
            ok &= en.len() == pt.len();
            ok &= en.examples.iter().zip(&pt.examples).all(|(x, y)| x.pair.symbolic == y.pair.symbolic);
        }
    }
    report(
        8,
        "determinism and symmetry",
        ok,
        format!("{identical_files} regenerated files byte-identical; en/pt symbolic forms and labels identical"),
    );
}

fn random_renaming(p: &SymbolicPair, rng: &mut ChaCha8Rng) -> BTreeMap<Constant, Constant> {
    let (people, places) = constants_of(p.formulas());
    let mut map = BTreeMap::new();
    let pe = sample(rng, 10_000, people.len());
    for (c, i) in people.into_iter().zip(pe.iter()) {
        map.insert(c, Constant::person(i));
    }
    let pl = sample(rng, 10_000, places.len());
    for (c, i) in places.into_iter().zip(pl.iter()) {
        map.insert(c, Constant::place(i));
    }
    map
}

#[test]
fn criterion_9_substitution_invariance() {
    let s = suite();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut pool = Vec::new();
    for task in 1..=7u8 {
        let (train, _) = s.load(task, "en");
        pool.extend(train.examples.into_iter().map(|e| e.pair.symbolic));
    }
    let mut changed = 0;
    for _ in 0..1_000 {
        let p = &pool[rng.gen_range(0..pool.len())];
        let renamed = p.renamed(&random_renaming(p, &mut rng)).unwrap();
        if label_pair(&renamed.premise, &renamed.hypothesis).unwrap() != p.label {
            changed += 1;
        }
    }
    report(
        9,
        "substitution invariance",
        changed == 0,
        format!("1000 random pairs under random injective renamings, {changed} label changes"),
    );
}
