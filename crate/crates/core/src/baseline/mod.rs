//! Bag-of-words features and a random forest of CART trees.

mod tree;

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DatasetSplit;
use crate::realization::tokenize;
use crate::taskgen::derive_seed;

pub use tree::{Node, Tree};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("training data has a single class")]
    SingleClass,
    #[error("need at least 2 training examples, got {0}")]
    TooFewExamples(usize),
    #[error("proportion {0} is outside (0, 1]")]
    InvalidProportion(f64),
    #[error("proportion {proportion} leaves {examples} training examples")]
    ProportionTooSmall { proportion: f64, examples: usize },
    #[error("n_trees must be at least 1")]
    NoTrees,
    #[error("cannot evaluate on an empty split")]
    EmptySplit,
    #[error("model file {path}: {message}")]
    Model { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Token vocabulary of a training split. Indices follow the sorted token order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct BowSpace {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for BowSpace {
    fn from(mut tokens: Vec<String>) -> Self {
        tokens.sort();
        tokens.dedup();
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        BowSpace { tokens, index }
    }
}

impl From<BowSpace> for Vec<String> {
    fn from(s: BowSpace) -> Self {
        s.tokens
    }
}

impl BowSpace {
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a str>) -> BowSpace {
        let mut tokens: Vec<String> = docs.into_iter().flat_map(tokenize).collect();
        tokens.sort_unstable();
        tokens.dedup();
        BowSpace::from(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    /// Raw term frequencies of `doc`; unknown tokens are dropped.
    pub fn counts(&self, doc: &str) -> Vec<u16> {
        let mut row = vec![0u16; self.len()];
        for t in tokenize(doc) {
            if let Some(i) = self.index_of(&t) {
                row[i] = row[i].saturating_add(1);
            }
        }
        row
    }
}

/// Dense count matrix stored column by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Features {
    rows: usize,
    cols: usize,
    data: Vec<u16>,
}

impl Features {
    pub fn from_rows(rows: &[Vec<u16>], cols: usize) -> Features {
        let n = rows.len();
        let mut data = vec![0u16; n * cols];
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row {i} has the wrong width");
            for (j, &v) in r.iter().enumerate() {
                data[j * n + i] = v;
            }
        }
        Features { rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.data[col * self.rows + row]
    }

    pub fn column(&self, col: usize) -> &[u16] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn row(&self, row: usize) -> Vec<u16> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    /// Columns with at least one nonzero entry.
    pub fn nonzero_columns(&self) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.column(c).iter().any(|&v| v > 0)).collect()
    }
}

/// Featurizes the concatenated premise and hypothesis of every example.
/// Without `space`, the vocabulary is built from `split` itself.
pub fn featurize(split: &DatasetSplit, space: Option<&BowSpace>) -> (Features, Vec<u8>, BowSpace) {
    let docs: Vec<String> = split.examples.iter().map(|e| e.pair.input_text()).collect();
    let space = match space {
        Some(s) => s.clone(),
        None => BowSpace::build(docs.iter().map(String::as_str)),
    };
    let rows: Vec<Vec<u16>> = docs.par_iter().map(|d| space.counts(d)).collect();
    let labels = split.examples.iter().map(|e| e.pair.label().as_int()).collect();
    (Features::from_rows(&rows, space.len()), labels, space)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureRule {
    Sqrt,
    All,
    Fixed(usize),
}

impl FeatureRule {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            FeatureRule::Sqrt => (n_features as f64).sqrt() as usize,
            FeatureRule::All => n_features,
            FeatureRule::Fixed(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: FeatureRule,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: FeatureRule::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub version: u32,
    pub params: ForestParams,
    pub space: BowSpace,
    pub trees: Vec<Tree>,
    pub oob_accuracy: Option<f64>,
}

/// Majority vote; ties go to label 0.
fn vote(ones: usize, total: usize) -> u8 {
    u8::from(2 * ones > total)
}

impl ForestModel {
    pub fn tree_votes(&self, row: &[u16]) -> Vec<u8> {
        self.trees.iter().map(|t| t.predict(row)).collect()
    }

    pub fn predict_row(&self, row: &[u16]) -> u8 {
        let ones = self.trees.iter().filter(|t| t.predict(row) == 1).count();
        vote(ones, self.trees.len())
    }

    pub fn predict(&self, x: &Features) -> Vec<u8> {
        (0..x.rows()).into_par_iter().map(|i| self.predict_row(&x.row(i))).collect()
    }

    pub fn predict_text(&self, doc: &str) -> u8 {
        self.predict_row(&self.space.counts(doc))
    }

    pub fn save(&self, path: &Path) -> Result<(), BaselineError> {
        let text = serde_json::to_string(self).expect("model serializes");
        fs::write(path, text).map_err(|source| BaselineError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<ForestModel, BaselineError> {
        let p = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| BaselineError::Io { path: p.clone(), source })?;
        let model: ForestModel = serde_json::from_str(&text).map_err(|e| BaselineError::Model {
            path: p.clone(),
            message: e.to_string(),
        })?;
        if model.version != MODEL_VERSION {
            return Err(BaselineError::Model {
                path: p,
                message: format!("unsupported version {}", model.version),
            });
        }
        Ok(model)
    }
}

/// Trains a forest. `space` is stored in the model for later featurization.
pub fn train_forest(
    x: &Features,
    y: &[u8],
    params: &ForestParams,
    space: BowSpace,
) -> Result<ForestModel, BaselineError> {
    assert_eq!(x.rows(), y.len(), "feature rows and labels differ in length");
    if params.n_trees == 0 {
        return Err(BaselineError::NoTrees);
    }
    if y.len() < 2 {
        return Err(BaselineError::TooFewExamples(y.len()));
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(BaselineError::SingleClass);
    }
    let n = y.len();
    let mtry = params.features_per_split.resolve(x.cols());
    let grown: Vec<(Tree, Vec<bool>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[params.seed, t as u64]));
            let mut in_bag = vec![!params.bootstrap; n];
            let sample: Vec<usize> = if params.bootstrap {
                (0..n)
                    .map(|_| {
                        let i = rng.gen_range(0..n);
                        in_bag[i] = true;
                        i
                    })
                    .collect()
            } else {
                (0..n).collect()
            };
            let tree = tree::grow(x, y, sample, mtry, params.max_depth, params.min_leaf.max(1), &mut rng);
            (tree, in_bag)
        })
        .collect();

    let oob_accuracy = params.bootstrap.then(|| {
        let (mut correct, mut scored) = (0usize, 0usize);
        for i in 0..n {
            let row = x.row(i);
            let (mut ones, mut total) = (0, 0);
            for (tree, in_bag) in &grown {
                if !in_bag[i] {
                    total += 1;
                    ones += usize::from(tree.predict(&row) == 1);
                }
            }
            if total > 0 {
                scored += 1;
                correct += usize::from(vote(ones, total) == y[i]);
            }
        }
        if scored == 0 { 0.0 } else { correct as f64 / scored as f64 }
    });

    Ok(ForestModel {
        version: MODEL_VERSION,
        params: params.clone(),
        space,
        trees: grown.into_iter().map(|(t, _)| t).collect(),
        oob_accuracy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[truth][predicted]`, with label 1 meaning contradiction.
    pub confusion: [[usize; 2]; 2],
    pub examples: usize,
}

pub fn evaluate(model: &ForestModel, split: &DatasetSplit) -> Result<Evaluation, BaselineError> {
    if split.is_empty() {
        return Err(BaselineError::EmptySplit);
    }
    let (x, y, _) = featurize(split, Some(&model.space));
    let predicted = model.predict(&x);
    let mut confusion = [[0usize; 2]; 2];
    for (&t, &p) in y.iter().zip(&predicted) {
        confusion[t as usize][p as usize] += 1;
    }
    let correct = confusion[0][0] + confusion[1][1];
    Ok(Evaluation {
        accuracy: correct as f64 / y.len() as f64,
        confusion,
        examples: y.len(),
    })
}

/// Featurizes `train`, fits a forest and evaluates it on `test`.
pub fn train_and_evaluate(
    train: &DatasetSplit,
    test: &DatasetSplit,
    params: &ForestParams,
) -> Result<(ForestModel, Evaluation), BaselineError> {
    let (x, y, space) = featurize(train, None);
    let model = train_forest(&x, &y, params, space)?;
    let eval = evaluate(&model, test)?;
    Ok((model, eval))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub proportion: f64,
    pub train_examples: usize,
    pub accuracy: f64,
}

/// Trains on growing prefixes of a seeded shuffle of `train` and evaluates
/// each model on all of `test`.
pub fn proportion_sweep(
    train: &DatasetSplit,
    test: &DatasetSplit,
    proportions: &[f64],
    params: &ForestParams,
) -> Result<Vec<SweepPoint>, BaselineError> {
    for &p in proportions {
        if !(p > 0.0 && p <= 1.0) {
            return Err(BaselineError::InvalidProportion(p));
        }
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(&[params.seed, u64::MAX])));
    proportions
        .iter()
        .map(|&p| {
            let k = (p * train.len() as f64).round() as usize;
            if k < 2 {
                return Err(BaselineError::ProportionTooSmall {
                    proportion: p,
                    examples: k,
                });
            }
            let prefix = DatasetSplit {
                meta: train.meta.clone(),
                examples: order[..k].iter().map(|&i| train.examples[i].clone()).collect(),
            };
            let (_, eval) = train_and_evaluate(&prefix, test, params)?;
            Ok(SweepPoint {
                proportion: p,
                train_examples: k,
                accuracy: eval.accuracy,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Features, Vec<u8>) {
        // label is 1 exactly when column 0 exceeds column 1
        let rows: Vec<Vec<u16>> = (0..60u16).map(|i| vec![i % 7, (i * 3) % 5, i % 2]).collect();
        let y = rows.iter().map(|r| u8::from(r[0] > r[1])).collect();
        (Features::from_rows(&rows, 3), y)
    }

    #[test]
    fn counts_are_raw_frequencies() {
        let space = BowSpace::build(["joe visited japan joe"]);
        let row = space.counts("joe visited japan joe");
        assert_eq!(row[space.index_of("joe").unwrap()], 2);
        assert_eq!(space.counts("unknown words only"), vec![0; 3]);
    }

    #[test]
    fn memorizes_training_data() {
        let (x, y) = toy();
        let params = ForestParams {
            n_trees: 5,
            bootstrap: false,
            features_per_split: FeatureRule::All,
            ..ForestParams::default()
        };
        let model = train_forest(&x, &y, &params, BowSpace::from(vec![])).unwrap();
        assert_eq!(model.predict(&x), y);
        assert!(model.oob_accuracy.is_none());
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Features::from_rows(&[vec![1], vec![2]], 1);
        let err = train_forest(&x, &[1, 1], &ForestParams::default(), BowSpace::from(vec![]));
        assert!(matches!(err, Err(BaselineError::SingleClass)));
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = toy();
        let params = ForestParams {
            n_trees: 20,
            seed: 9,
            ..ForestParams::default()
        };
        let a = train_forest(&x, &y, &params, BowSpace::from(vec![])).unwrap();
        let b = train_forest(&x, &y, &params, BowSpace::from(vec![])).unwrap();
        assert_eq!(a, b);
        assert!(a.oob_accuracy.is_some());
    }

    #[test]
    fn ties_vote_for_label_zero() {
        assert_eq!(vote(2, 4), 0);
        assert_eq!(vote(3, 4), 1);
        assert_eq!(vote(0, 0), 0);
    }

    #[test]
    fn model_round_trips_through_json() {
        let (x, y) = toy();
        let params = ForestParams {
            n_trees: 3,
            ..ForestParams::default()
        };
        let model = train_forest(&x, &y, &params, BowSpace::build(["a b c"])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        model.save(&path).unwrap();
        assert_eq!(ForestModel::load(&path).unwrap(), model);
    }
}
