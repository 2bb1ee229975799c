//! Surface realization in English and Portuguese.
//!
//! A [`Lexicon`] maps constants to names (drawn per pair, without
//! replacement) and supplies the sentence frames. Lexicons are TOML files:
//!
//! ```toml
//! language = "en"            # or "pt"
//! place_names = ["Chile", "Japan"]
//!
//! [person_names]
//! masc = ["Charles", "Joe"]
//! fem = []
//!
//! [templates]                # optional; any field of `Templates`
//! did_not_visit = "did not visit"
//! ```

mod grammar;
mod templates;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{constants_of, Formula, Label, SymbolicPair, TaskId};

pub use templates::Templates;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "en")]
    English,
    #[serde(rename = "pt")]
    Portuguese,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::English => "en",
            Language::Portuguese => "pt",
        }
    }

    pub fn from_code(code: &str) -> Option<Language> {
        match code {
            "en" => Some(Language::English),
            "pt" => Some(Language::Portuguese),
            _ => None,
        }
    }
}

impl std::fmt::Display for Language {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Masc,
    Fem,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("line {line}: duplicate name `{name}`")]
    Duplicate { name: String, line: usize },
    #[error("line {line}: `{name}` is both a person and a place name")]
    PersonPlaceCollision { name: String, line: usize },
    #[error("line {line}: invalid name {name:?}")]
    InvalidName { name: String, line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("no name bound to constant `{0}`")]
    Unbound(String),
    #[error("no template for formula {0}")]
    Unsupported(String),
    #[error("no number word for {0}")]
    NoNumberWord(u32),
    #[error("lexicon has {available} {what} names, pair needs {needed}")]
    Exhausted {
        what: &'static str,
        needed: usize,
        available: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub language: Language,
    pub person_names: Vec<(String, Gender)>,
    pub place_names: Vec<String>,
    pub templates: Templates,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    language: Language,
    person_names: PersonNames,
    place_names: Vec<String>,
    #[serde(default)]
    templates: Option<toml::Table>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PersonNames {
    #[serde(default)]
    masc: Vec<String>,
    #[serde(default)]
    fem: Vec<String>,
}

/// 1-based line of the `occurrence`-th quoted appearance of `name`.
fn line_of(text: &str, name: &str, occurrence: usize) -> usize {
    let quoted = format!("\"{name}\"");
    text.match_indices(&quoted)
        .nth(occurrence)
        .map(|(i, _)| text[..i].matches('\n').count() + 1)
        .unwrap_or(0)
}

impl Lexicon {
    /// Parses and validates lexicon text.
    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let file: LexiconFile =
            toml::from_str(text).map_err(|e| LexiconError::Schema(e.to_string()))?;
        let mut templates = Templates::defaults(file.language);
        if let Some(overrides) = file.templates {
            let mut merged = toml::Table::try_from(&templates)
                .map_err(|e| LexiconError::Schema(e.to_string()))?;
            merged.extend(overrides);
            templates = merged
                .try_into()
                .map_err(|e: toml::de::Error| LexiconError::Schema(format!("[templates]: {e}")))?;
        }
        let person_names: Vec<(String, Gender)> = file
            .person_names
            .masc
            .into_iter()
            .map(|n| (n, Gender::Masc))
            .chain(file.person_names.fem.into_iter().map(|n| (n, Gender::Fem)))
            .collect();
        let lex = Lexicon {
            language: file.language,
            person_names,
            place_names: file.place_names,
            templates,
        };
        lex.validate(text)?;
        Ok(lex)
    }

    fn validate(&self, text: &str) -> Result<(), LexiconError> {
        let mut seen = HashSet::new();
        let people: HashSet<&str> = self.person_names.iter().map(|(n, _)| n.as_str()).collect();
        for name in self.person_names.iter().map(|(n, _)| n).chain(&self.place_names) {
            if name.trim().is_empty() || name.contains(['\t', '\n', '\r']) || name != name.trim() {
                return Err(LexiconError::InvalidName {
                    name: name.clone(),
                    line: line_of(text, name, 0),
                });
            }
            if !seen.insert(name.as_str()) {
                let collision = people.contains(name.as_str())
                    && self.place_names.iter().any(|p| p == name);
                let line = line_of(text, name, 1);
                return Err(if collision {
                    LexiconError::PersonPlaceCollision {
                        name: name.clone(),
                        line,
                    }
                } else {
                    LexiconError::Duplicate {
                        name: name.clone(),
                        line,
                    }
                });
            }
        }
        if self.person_names.is_empty() || self.place_names.is_empty() {
            return Err(LexiconError::Schema("empty name inventory".into()));
        }
        Ok(())
    }

    pub fn person_surface(&self) -> impl Iterator<Item = &str> {
        self.person_names.iter().map(|(n, _)| n.as_str())
    }

    /// Tokens of every template string, as the tokenizer sees them.
    pub fn template_tokens(&self) -> BTreeSet<String> {
        self.templates.all_text().into_iter().flat_map(tokenize).collect()
    }

    /// Tokens of every person and place name.
    pub fn name_tokens(&self) -> BTreeSet<String> {
        self.person_surface()
            .chain(self.place_names.iter().map(String::as_str))
            .flat_map(tokenize)
            .collect()
    }
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, LexiconError> {
    let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Lexicon::parse(&text)
}

/// Which bundled inventory to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconRole {
    Train,
    Test,
}

/// Environment variable naming a directory that replaces the bundled lexicons.
pub const LEXDIR_ENV: &str = "CONTRA_FORGE_LEXDIR";

const BUNDLED: [(&str, &str); 4] = [
    ("en_train", include_str!("../../lexicons/en_train.toml")),
    ("en_test", include_str!("../../lexicons/en_test.toml")),
    ("pt_train", include_str!("../../lexicons/pt_train.toml")),
    ("pt_test", include_str!("../../lexicons/pt_test.toml")),
];

/// The default lexicon for a language and role. When `CONTRA_FORGE_LEXDIR`
/// is set, `<dir>/<lang>_<role>.toml` is loaded instead.
pub fn bundled_lexicon(language: Language, role: LexiconRole) -> Result<Lexicon, LexiconError> {
    let stem = format!(
        "{}_{}",
        language.code(),
        match role {
            LexiconRole::Train => "train",
            LexiconRole::Test => "test",
        }
    );
    if let Some(dir) = std::env::var_os(LEXDIR_ENV) {
        return load_lexicon(&Path::new(&dir).join(format!("{stem}.toml")));
    }
    let text = BUNDLED
        .iter()
        .find(|(s, _)| *s == stem)
        .map(|(_, t)| *t)
        .expect("all four bundled lexicons exist");
    Lexicon::parse(text)
}

/// Constants to surface names.
pub type Binding = BTreeMap<crate::logic::Constant, String>;

pub fn realize_formula(f: &Formula, lex: &Lexicon, binding: &Binding) -> Result<String, RealizeError> {
    grammar::Renderer {
        templates: &lex.templates,
        binding,
    }
    .sentence(f)
}

/// A symbolic pair together with its text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedPair {
    pub premise_text: String,
    pub hypothesis_text: String,
    pub language: Language,
    pub symbolic: SymbolicPair,
}

impl RealizedPair {
    pub fn label(&self) -> Label {
        self.symbolic.label
    }

    pub fn task(&self) -> TaskId {
        self.symbolic.task
    }

    /// Premise and hypothesis as one document.
    pub fn input_text(&self) -> String {
        match (self.premise_text.is_empty(), self.hypothesis_text.is_empty()) {
            (_, true) => self.premise_text.clone(),
            (true, false) => self.hypothesis_text.clone(),
            (false, false) => format!("{} {}", self.premise_text, self.hypothesis_text),
        }
    }
}

/// Draws an injective binding for every constant of `p`.
pub fn draw_binding(p: &SymbolicPair, lex: &Lexicon, seed: u64) -> Result<Binding, RealizeError> {
    let (people, places) = constants_of(p.formulas());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut binding = Binding::new();
    let person_names: Vec<&str> = lex.person_surface().collect();
    let place_names: Vec<&str> = lex.place_names.iter().map(String::as_str).collect();
    for (what, constants, names) in [("person", people, person_names), ("place", places, place_names)] {
        if constants.len() > names.len() {
            return Err(RealizeError::Exhausted {
                what,
                needed: constants.len(),
                available: names.len(),
            });
        }
        let picks = sample(&mut rng, names.len(), constants.len());
        for (c, i) in constants.into_iter().zip(picks.iter()) {
            binding.insert(c, names[i].to_string());
        }
    }
    Ok(binding)
}

pub fn realize_with(p: &SymbolicPair, lex: &Lexicon, binding: &Binding) -> Result<RealizedPair, RealizeError> {
    let t = &lex.templates;
    let sentences = p
        .premise
        .iter()
        .map(|f| realize_formula(f, lex, binding))
        .collect::<Result<Vec<_>, _>>()?;
    let mut premise_text = sentences.join(&t.sentence_separator);
    premise_text.push_str(&t.terminator);
    let mut hypothesis_text = realize_formula(&p.hypothesis, lex, binding)?;
    hypothesis_text.push_str(&t.terminator);
    Ok(RealizedPair {
        premise_text,
        hypothesis_text,
        language: lex.language,
        symbolic: p.clone(),
    })
}

/// Realizes `p` with names drawn deterministically from `seed`.
pub fn realize_pair(p: &SymbolicPair, lex: &Lexicon, seed: u64) -> Result<RealizedPair, RealizeError> {
    realize_with(p, lex, &draw_binding(p, lex, seed)?)
}

/// Lowercased word tokens. Letters and digits form tokens; an apostrophe
/// starts a new token (`didn't` gives `didn`, `'t`); everything else
/// separates tokens and is dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        if !cur.is_empty() && cur != "'" {
            out.push(std::mem::take(cur));
        }
        cur.clear();
    };
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if ch == '\'' || ch == '\u{2019}' {
            flush(&mut cur, &mut out);
            cur.push('\'');
        } else {
            flush(&mut cur, &mut out);
        }
    }
    flush(&mut cur, &mut out);
    out
}


#[cfg(test)]
mod bundled_tests {
    use super::*;

    #[test]
    fn bundled_inventories_are_large_and_disjoint() {
        for lang in [Language::English, Language::Portuguese] {
            let train = bundled_lexicon(lang, LexiconRole::Train).unwrap();
            let test = bundled_lexicon(lang, LexiconRole::Test).unwrap();
            for lex in [&train, &test] {
                assert_eq!(lex.language, lang);
                assert!(lex.person_names.len() >= 150, "{lang}: {}", lex.person_names.len());
                assert!(lex.place_names.len() >= 150, "{lang}: {}", lex.place_names.len());
                let shared: Vec<_> = lex.name_tokens().intersection(&lex.template_tokens()).cloned().collect();
                assert!(shared.is_empty(), "{lang}: name tokens used by templates: {shared:?}");
            }
            assert!(train.person_names.iter().all(|(_, g)| *g == Gender::Masc));
            assert!(test.person_names.iter().all(|(_, g)| *g == Gender::Fem));
            let shared: Vec<_> = train.name_tokens().intersection(&test.name_tokens()).cloned().collect();
            assert!(shared.is_empty(), "{lang}: train/test share {shared:?}");
        }
    }
}
