//! Finite-model semantics for the template logic.
//!
//! Satisfiability is always relative to a closed universe: every mentioned
//! constant denotes its own individual (unique names), plus a few fresh
//! individuals per sort. [`consistent`] is the decision procedure used to
//! label data; [`brute_force_consistent`] enumerates models and serves as the
//! independent ground truth in tests and in `verify --oracle`.

mod decide;
mod model;
mod oracle;

use thiserror::Error;

use crate::logic::{constants_of, Constant, Formula, Label, LogicError, Sort};

pub use decide::{consistent, consistent_with};
pub use model::{eval, Model};
pub use oracle::{brute_force_consistent, ENUMERATION_GUARD};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("not a sentence: {0}")]
    NotASentence(#[from] LogicError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("universe of {people} people and {places} places exceeds the enumeration guard of {guard} per sort")]
    GuardExceeded {
        people: usize,
        places: usize,
        guard: usize,
    },
    #[error("outside supported fragment: {0}")]
    OutsideFragment(String),
}

/// Fresh individuals added per sort beyond the mentioned constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct UniverseBounds {
    pub extra_people: usize,
    pub extra_places: usize,
}

impl Default for UniverseBounds {
    fn default() -> Self {
        UniverseBounds {
            extra_people: 1,
            extra_places: 1,
        }
    }
}

/// The domain a formula set is interpreted over.
///
/// The slack for a sort is the larger of the configured bound and the
/// largest counting index over that sort, so "exactly n" claims can always
/// be witnessed by fresh individuals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    pub people: Vec<Constant>,
    pub places: Vec<Constant>,
}

impl Universe {
    pub fn for_formulas(fs: &[Formula], bounds: UniverseBounds) -> Universe {
        let (people, places) = constants_of(fs);
        let mut max_count = [0usize; 2];
        for f in fs {
            max_counts(f, &mut max_count);
        }
        let extra_people = bounds.extra_people.max(max_count[0]);
        let extra_places = bounds.extra_places.max(max_count[1]);
        let mut people: Vec<Constant> = people.into_iter().collect();
        let mut places: Vec<Constant> = places.into_iter().collect();
        people.extend((1..=extra_people).map(|i| Constant::fresh(Sort::Person, i)));
        places.extend((1..=extra_places).map(|i| Constant::fresh(Sort::Place, i)));
        Universe { people, places }
    }

    pub fn of_sort(&self, sort: Sort) -> &[Constant] {
        match sort {
            Sort::Person => &self.people,
            Sort::Place => &self.places,
        }
    }

    /// Everything that can be the target of a visit.
    pub fn targets(&self) -> impl Iterator<Item = &Constant> {
        self.people.iter().chain(self.places.iter())
    }
}

fn max_counts(f: &Formula, acc: &mut [usize; 2]) {
    match f {
        Formula::Visit(..) | Formula::Taller(..) | Formula::AsTall(..) | Formula::Eq(..) => {}
        Formula::Not(g) => max_counts(g, acc),
        Formula::And(gs) => gs.iter().for_each(|g| max_counts(g, acc)),
        Formula::ForAll(_, g) | Formula::Exists(_, g) | Formula::Iota(_, _, g) => {
            max_counts(g, acc)
        }
        Formula::Count(n, v, g) => {
            let slot = match v.sort() {
                Sort::Person => 0,
                Sort::Place => 1,
            };
            acc[slot] = acc[slot].max(*n as usize);
            max_counts(g, acc);
        }
    }
}

pub(crate) fn check_sentences(fs: &[Formula]) -> Result<(), SemanticsError> {
    for f in fs {
        f.check_sentence()?;
    }
    Ok(())
}

/// Contradiction iff the premise together with the hypothesis is inconsistent.
pub fn label_pair(premise: &[Formula], hypothesis: &Formula) -> Result<Label, SemanticsError> {
    let mut all = premise.to_vec();
    all.push(hypothesis.clone());
    Ok(if consistent(&all)? {
        Label::NonContradiction
    } else {
        Label::Contradiction
    })
}
