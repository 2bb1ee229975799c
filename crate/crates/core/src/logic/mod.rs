//! The template logic: two sorts (people and places), the visit and height
//! relations, negation, n-ary conjunction, the classical quantifiers, the
//! counting quantifier and definite descriptions.
//!
//! Formulas are plain immutable values. The enum is public so that other
//! modules can pattern match on it, but the checked constructors
//! ([`Formula::visit`], [`Formula::forall`], ...) and [`Formula::check_sentence`]
//! are the way to build values that satisfy the sort and scoping rules.

mod syntax;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use syntax::{parse_formula, parse_formulas, print_formula};

/// Largest index accepted by the counting quantifier.
pub const MAX_COUNT: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("sort error in `{constructor}`: {message}")]
    Sort {
        constructor: &'static str,
        message: String,
    },
    #[error("variable `{0}` occurs free")]
    FreeVariable(String),
    #[error("variable `{0}` is bound twice")]
    Shadowing(String),
    #[error("count index {0} outside [1, {MAX_COUNT}]")]
    CountOutOfRange(u32),
    #[error("conjunction must have at least one conjunct")]
    EmptyConjunction,
    #[error("conjunction is not flat")]
    NestedConjunction,
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("invalid renaming: {0}")]
    Renaming(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Person,
    Place,
}

impl Sort {
    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Person => "person",
            Sort::Place => "place",
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

const KEYWORDS: &[&str] = &[
    "not", "and", "forall", "exists", "count", "iota", "visit", "taller", "astall", "eq", "person",
    "place",
];

/// Identifiers are lowercase ASCII: `[a-z][a-z0-9_]*`, excluding grammar keywords.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') && !KEYWORDS.contains(&s)
}

/// A named individual. Distinct ids denote distinct individuals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constant {
    id: String,
    sort: Sort,
}

impl Constant {
    pub fn new(id: impl Into<String>, sort: Sort) -> Result<Self, LogicError> {
        let id = id.into();
        if !is_identifier(&id) {
            return Err(LogicError::InvalidIdentifier(id));
        }
        Ok(Constant { id, sort })
    }

    /// Entities added by domain closure. Their ids cannot be produced by the
    /// parser, so they never collide with mentioned constants.
    pub(crate) fn fresh(sort: Sort, index: usize) -> Self {
        let prefix = match sort {
            Sort::Person => "#pe",
            Sort::Place => "#pl",
        };
        Constant {
            id: format!("{prefix}{index}"),
            sort,
        }
    }

    /// Canonical symbolic person `x<index>`.
    pub fn person(index: usize) -> Self {
        Constant {
            id: format!("x{index}"),
            sort: Sort::Person,
        }
    }

    /// Canonical symbolic place `p<index>`.
    pub fn place(index: usize) -> Self {
        Constant {
            id: format!("p{index}"),
            sort: Sort::Place,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    pub fn is_fresh(&self) -> bool {
        self.id.starts_with('#')
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    name: String,
    sort: Sort,
}

impl Variable {
    pub fn new(name: impl Into<String>, sort: Sort) -> Result<Self, LogicError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(LogicError::InvalidIdentifier(name));
        }
        Ok(Variable { name, sort })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Constant),
    Var(Variable),
}

impl Term {
    pub fn sort(&self) -> Sort {
        match self {
            Term::Const(c) => c.sort,
            Term::Var(v) => v.sort,
        }
    }

    pub fn as_constant(&self) -> Option<&Constant> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }

    fn name(&self) -> &str {
        match self {
            Term::Const(c) => &c.id,
            Term::Var(v) => &v.name,
        }
    }
}

impl From<Constant> for Term {
    fn from(c: Constant) -> Self {
        Term::Const(c)
    }
}

impl From<&Constant> for Term {
    fn from(c: &Constant) -> Self {
        Term::Const(c.clone())
    }
}

impl From<Variable> for Term {
    fn from(v: Variable) -> Self {
        Term::Var(v)
    }
}

impl From<&Variable> for Term {
    fn from(v: &Variable) -> Self {
        Term::Var(v.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    /// "agent has visited target"; the target may be a person or a place.
    Visit(Term, Term),
    /// "a is taller than b"
    Taller(Term, Term),
    /// "a is as tall as b", read as a weak inequality on heights.
    AsTall(Term, Term),
    Eq(Term, Term),
    Not(Box<Formula>),
    /// Flat, non-empty conjunction.
    And(Vec<Formula>),
    ForAll(Variable, Box<Formula>),
    Exists(Variable, Box<Formula>),
    /// Exactly `n` elements of the variable's sort satisfy the body.
    Count(u32, Variable, Box<Formula>),
    /// `subject` is the unique person satisfying the property.
    Iota(Constant, Variable, Box<Formula>),
}

fn sort_error(constructor: &'static str, message: String) -> LogicError {
    LogicError::Sort {
        constructor,
        message,
    }
}

impl Formula {
    pub fn visit(agent: impl Into<Term>, target: impl Into<Term>) -> Result<Self, LogicError> {
        let (agent, target) = (agent.into(), target.into());
        if agent.sort() != Sort::Person {
            return Err(sort_error(
                "visit",
                format!("agent `{}` must be a person", agent.name()),
            ));
        }
        Ok(Formula::Visit(agent, target))
    }

    pub fn taller(a: impl Into<Term>, b: impl Into<Term>) -> Result<Self, LogicError> {
        let (a, b) = (a.into(), b.into());
        Self::check_people("taller", &a, &b)?;
        Ok(Formula::Taller(a, b))
    }

    pub fn as_tall(a: impl Into<Term>, b: impl Into<Term>) -> Result<Self, LogicError> {
        let (a, b) = (a.into(), b.into());
        Self::check_people("astall", &a, &b)?;
        Ok(Formula::AsTall(a, b))
    }

    pub fn eq(a: impl Into<Term>, b: impl Into<Term>) -> Result<Self, LogicError> {
        let (a, b) = (a.into(), b.into());
        if a.sort() != b.sort() {
            return Err(sort_error(
                "eq",
                format!("`{}` and `{}` have different sorts", a.name(), b.name()),
            ));
        }
        Ok(Formula::Eq(a, b))
    }

    fn check_people(constructor: &'static str, a: &Term, b: &Term) -> Result<(), LogicError> {
        for t in [a, b] {
            if t.sort() != Sort::Person {
                return Err(sort_error(
                    constructor,
                    format!("`{}` must be a person", t.name()),
                ));
            }
        }
        Ok(())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Builds a conjunction, flattening nested conjunctions.
    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Result<Self, LogicError> {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.is_empty() {
            return Err(LogicError::EmptyConjunction);
        }
        Ok(Formula::And(out))
    }

    pub fn forall(v: Variable, body: Formula) -> Result<Self, LogicError> {
        body.check_not_rebound(&v)?;
        Ok(Formula::ForAll(v, Box::new(body)))
    }

    pub fn exists(v: Variable, body: Formula) -> Result<Self, LogicError> {
        body.check_not_rebound(&v)?;
        Ok(Formula::Exists(v, Box::new(body)))
    }

    pub fn count(n: u32, v: Variable, body: Formula) -> Result<Self, LogicError> {
        if !(1..=MAX_COUNT).contains(&n) {
            return Err(LogicError::CountOutOfRange(n));
        }
        body.check_not_rebound(&v)?;
        Ok(Formula::Count(n, v, Box::new(body)))
    }

    pub fn iota(subject: Constant, v: Variable, property: Formula) -> Result<Self, LogicError> {
        if subject.sort != Sort::Person {
            return Err(sort_error(
                "iota",
                format!("subject `{}` must be a person", subject.id),
            ));
        }
        if v.sort != Sort::Person {
            return Err(sort_error(
                "iota",
                format!("variable `{}` must range over people", v.name),
            ));
        }
        property.check_not_rebound(&v)?;
        Ok(Formula::Iota(subject, v, Box::new(property)))
    }

    fn check_not_rebound(&self, v: &Variable) -> Result<(), LogicError> {
        let mut found = false;
        self.visit_binders(&mut |b| found |= b.name == v.name);
        if found {
            Err(LogicError::Shadowing(v.name.clone()))
        } else {
            Ok(())
        }
    }

    fn visit_binders(&self, f: &mut impl FnMut(&Variable)) {
        match self {
            Formula::Visit(..) | Formula::Taller(..) | Formula::AsTall(..) | Formula::Eq(..) => {}
            Formula::Not(g) => g.visit_binders(f),
            Formula::And(gs) => gs.iter().for_each(|g| g.visit_binders(f)),
            Formula::ForAll(v, g)
            | Formula::Exists(v, g)
            | Formula::Count(_, v, g)
            | Formula::Iota(_, v, g) => {
                f(v);
                g.visit_binders(f);
            }
        }
    }

    /// Checks every structural rule: sorts, closed scoping without
    /// shadowing, count range and flat non-empty conjunctions.
    pub fn check_sentence(&self) -> Result<(), LogicError> {
        self.check_in(&mut Vec::new())
    }

    fn check_in(&self, scope: &mut Vec<Variable>) -> Result<(), LogicError> {
        let check_term = |t: &Term, scope: &[Variable]| match t {
            Term::Var(v) => {
                if scope.contains(v) {
                    Ok(())
                } else {
                    Err(LogicError::FreeVariable(v.name.clone()))
                }
            }
            Term::Const(c) => {
                if scope.iter().any(|v| v.name == c.id) {
                    Err(LogicError::Shadowing(c.id.clone()))
                } else {
                    Ok(())
                }
            }
        };
        match self {
            Formula::Visit(a, b) => {
                Formula::visit(a.clone(), b.clone())?;
                check_term(a, scope)?;
                check_term(b, scope)
            }
            Formula::Taller(a, b) | Formula::AsTall(a, b) => {
                let name = if matches!(self, Formula::Taller(..)) {
                    "taller"
                } else {
                    "astall"
                };
                Formula::check_people(name, a, b)?;
                check_term(a, scope)?;
                check_term(b, scope)
            }
            Formula::Eq(a, b) => {
                Formula::eq(a.clone(), b.clone())?;
                check_term(a, scope)?;
                check_term(b, scope)
            }
            Formula::Not(g) => g.check_in(scope),
            Formula::And(gs) => {
                if gs.is_empty() {
                    return Err(LogicError::EmptyConjunction);
                }
                for g in gs {
                    if matches!(g, Formula::And(_)) {
                        return Err(LogicError::NestedConjunction);
                    }
                    g.check_in(scope)?;
                }
                Ok(())
            }
            Formula::ForAll(v, g) | Formula::Exists(v, g) | Formula::Count(_, v, g) => {
                if let Formula::Count(n, ..) = self {
                    if !(1..=MAX_COUNT).contains(n) {
                        return Err(LogicError::CountOutOfRange(*n));
                    }
                }
                Self::check_binder(v, g, scope)
            }
            Formula::Iota(c, v, g) => {
                if c.sort != Sort::Person || v.sort != Sort::Person {
                    return Err(sort_error(
                        "iota",
                        "subject and variable must be people".into(),
                    ));
                }
                check_term(&Term::Const(c.clone()), scope)?;
                Self::check_binder(v, g, scope)
            }
        }
    }

    fn check_binder(
        v: &Variable,
        body: &Formula,
        scope: &mut Vec<Variable>,
    ) -> Result<(), LogicError> {
        if scope.iter().any(|s| s.name == v.name) {
            return Err(LogicError::Shadowing(v.name.clone()));
        }
        scope.push(v.clone());
        let result = body.check_in(scope);
        scope.pop();
        result
    }

    /// Calls `f` on every constant occurrence, including description subjects.
    pub fn for_each_constant(&self, f: &mut impl FnMut(&Constant)) {
        let term = |t: &Term, f: &mut dyn FnMut(&Constant)| {
            if let Term::Const(c) = t {
                f(c)
            }
        };
        match self {
            Formula::Visit(a, b)
            | Formula::Taller(a, b)
            | Formula::AsTall(a, b)
            | Formula::Eq(a, b) => {
                term(a, f);
                term(b, f);
            }
            Formula::Not(g) => g.for_each_constant(f),
            Formula::And(gs) => gs.iter().for_each(|g| g.for_each_constant(f)),
            Formula::ForAll(_, g) | Formula::Exists(_, g) | Formula::Count(_, _, g) => {
                g.for_each_constant(f)
            }
            Formula::Iota(c, _, g) => {
                f(c);
                g.for_each_constant(f);
            }
        }
    }

    /// Operators occurring in the formula (atoms other than `visit` included).
    pub fn operators(&self) -> BTreeSet<Operator> {
        let mut ops = BTreeSet::new();
        self.collect_operators(&mut ops);
        ops
    }

    fn collect_operators(&self, ops: &mut BTreeSet<Operator>) {
        match self {
            Formula::Visit(..) => {}
            Formula::Taller(..) => {
                ops.insert(Operator::Taller);
            }
            Formula::AsTall(..) => {
                ops.insert(Operator::AsTall);
            }
            Formula::Eq(..) => {
                ops.insert(Operator::Eq);
            }
            Formula::Not(g) => {
                ops.insert(Operator::Not);
                g.collect_operators(ops);
            }
            Formula::And(gs) => {
                ops.insert(Operator::And);
                gs.iter().for_each(|g| g.collect_operators(ops));
            }
            Formula::ForAll(_, g) => {
                ops.insert(Operator::ForAll);
                g.collect_operators(ops);
            }
            Formula::Exists(_, g) => {
                ops.insert(Operator::Exists);
                g.collect_operators(ops);
            }
            Formula::Count(_, _, g) => {
                ops.insert(Operator::Count);
                g.collect_operators(ops);
            }
            Formula::Iota(_, _, g) => {
                ops.insert(Operator::Iota);
                g.collect_operators(ops);
            }
        }
    }

    /// Replaces the free occurrences of `v` by `c`.
    pub fn substitute(&self, v: &Variable, c: &Constant) -> Formula {
        let term = |t: &Term| match t {
            Term::Var(w) if w == v => Term::Const(c.clone()),
            other => other.clone(),
        };
        let under = |w: &Variable, g: &Formula| {
            if w == v {
                g.clone()
            } else {
                g.substitute(v, c)
            }
        };
        match self {
            Formula::Visit(a, b) => Formula::Visit(term(a), term(b)),
            Formula::Taller(a, b) => Formula::Taller(term(a), term(b)),
            Formula::AsTall(a, b) => Formula::AsTall(term(a), term(b)),
            Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
            Formula::Not(g) => Formula::Not(Box::new(g.substitute(v, c))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.substitute(v, c)).collect()),
            Formula::ForAll(w, g) => Formula::ForAll(w.clone(), Box::new(under(w, g))),
            Formula::Exists(w, g) => Formula::Exists(w.clone(), Box::new(under(w, g))),
            Formula::Count(n, w, g) => Formula::Count(*n, w.clone(), Box::new(under(w, g))),
            Formula::Iota(s, w, g) => Formula::Iota(s.clone(), w.clone(), Box::new(under(w, g))),
        }
    }

    fn map_constants(&self, f: &impl Fn(&Constant) -> Constant) -> Formula {
        let term = |t: &Term| match t {
            Term::Const(c) => Term::Const(f(c)),
            other => other.clone(),
        };
        match self {
            Formula::Visit(a, b) => Formula::Visit(term(a), term(b)),
            Formula::Taller(a, b) => Formula::Taller(term(a), term(b)),
            Formula::AsTall(a, b) => Formula::AsTall(term(a), term(b)),
            Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
            Formula::Not(g) => Formula::Not(Box::new(g.map_constants(f))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.map_constants(f)).collect()),
            Formula::ForAll(v, g) => Formula::ForAll(v.clone(), Box::new(g.map_constants(f))),
            Formula::Exists(v, g) => Formula::Exists(v.clone(), Box::new(g.map_constants(f))),
            Formula::Count(n, v, g) => {
                Formula::Count(*n, v.clone(), Box::new(g.map_constants(f)))
            }
            Formula::Iota(s, v, g) => Formula::Iota(f(s), v.clone(), Box::new(g.map_constants(f))),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

/// Negation with double-negation elimination.
pub fn negate(f: &Formula) -> Formula {
    match f {
        Formula::Not(g) => (**g).clone(),
        other => Formula::not(other.clone()),
    }
}

/// Constants of `f`, split into people and places.
pub fn free_constants(f: &Formula) -> (BTreeSet<Constant>, BTreeSet<Constant>) {
    let mut people = BTreeSet::new();
    let mut places = BTreeSet::new();
    f.for_each_constant(&mut |c| {
        match c.sort {
            Sort::Person => people.insert(c.clone()),
            Sort::Place => places.insert(c.clone()),
        };
    });
    (people, places)
}

/// Constants of all formulas, split by sort.
pub fn constants_of<'a>(
    fs: impl IntoIterator<Item = &'a Formula>,
) -> (BTreeSet<Constant>, BTreeSet<Constant>) {
    let mut people = BTreeSet::new();
    let mut places = BTreeSet::new();
    for f in fs {
        let (pe, pl) = free_constants(f);
        people.extend(pe);
        places.extend(pl);
    }
    (people, places)
}

/// Applies a sort-preserving renaming to `f`. Constants outside the map are
/// kept; the renaming extended by the identity must stay injective on the
/// constants of `f`.
pub fn rename_constants(
    f: &Formula,
    map: &BTreeMap<Constant, Constant>,
) -> Result<Formula, LogicError> {
    Ok(rename_all(std::slice::from_ref(f), map)?.remove(0))
}

/// Renames a group of formulas with one shared map, checking injectivity
/// over all of their constants jointly.
pub fn rename_all(
    fs: &[Formula],
    map: &BTreeMap<Constant, Constant>,
) -> Result<Vec<Formula>, LogicError> {
    for (from, to) in map {
        if from.sort != to.sort {
            return Err(LogicError::Renaming(format!(
                "`{from}` is a {} but `{to}` is a {}",
                from.sort, to.sort
            )));
        }
    }
    let (people, places) = constants_of(fs);
    let mut images: BTreeMap<Constant, Constant> = BTreeMap::new();
    for c in people.iter().chain(places.iter()) {
        let image = map.get(c).unwrap_or(c).clone();
        if let Some(prev) = images.insert(image.clone(), c.clone()) {
            return Err(LogicError::Renaming(format!(
                "`{prev}` and `{c}` both map to `{image}`"
            )));
        }
    }
    let apply = |c: &Constant| map.get(c).unwrap_or(c).clone();
    Ok(fs.iter().map(|f| f.map_constants(&apply)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Operator {
    Not,
    And,
    ForAll,
    Exists,
    Iota,
    Eq,
    Taller,
    AsTall,
    Count,
}

impl Operator {
    /// The task that introduces this operator.
    pub fn introduced_at(self) -> TaskId {
        let n = match self {
            Operator::Not => 1,
            Operator::And => 2,
            Operator::ForAll | Operator::Exists => 3,
            Operator::Iota | Operator::Eq => 4,
            Operator::Taller | Operator::AsTall => 5,
            Operator::Count => 6,
        };
        TaskId(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    NonContradiction,
    Contradiction,
}

impl Label {
    pub fn as_int(self) -> u8 {
        match self {
            Label::NonContradiction => 0,
            Label::Contradiction => 1,
        }
    }

    pub fn from_int(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::NonContradiction),
            1 => Some(Label::Contradiction),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NonContradiction => "non-contradiction",
            Label::Contradiction => "contradiction",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "non-contradiction" | "0" => Some(Label::NonContradiction),
            "contradiction" | "1" => Some(Label::Contradiction),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Task number 1..=7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TaskId(u8);

impl TaskId {
    pub const SIMPLE_NEGATION: TaskId = TaskId(1);
    pub const BOOLEAN_COORDINATION: TaskId = TaskId(2);
    pub const QUANTIFICATION: TaskId = TaskId(3);
    pub const DEFINITE_DESCRIPTION: TaskId = TaskId(4);
    pub const COMPARATIVES: TaskId = TaskId(5);
    pub const COUNTING: TaskId = TaskId(6);
    pub const MIXED: TaskId = TaskId(7);

    pub const ALL: [TaskId; 7] = [
        TaskId(1),
        TaskId(2),
        TaskId(3),
        TaskId(4),
        TaskId(5),
        TaskId(6),
        TaskId(7),
    ];

    pub fn new(n: u8) -> Option<TaskId> {
        (1..=7).contains(&n).then_some(TaskId(n))
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            1 => "SimpleNegation",
            2 => "BooleanCoordination",
            3 => "Quantification",
            4 => "DefiniteDescription",
            5 => "Comparatives",
            6 => "Counting",
            _ => "Mixed",
        }
    }

    /// Whether `op` may appear in this task's formulas.
    pub fn admits(self, op: Operator) -> bool {
        op.introduced_at() <= self
    }
}

impl TryFrom<u8> for TaskId {
    type Error = String;
    fn try_from(n: u8) -> Result<Self, Self::Error> {
        TaskId::new(n).ok_or_else(|| format!("task id {n} outside 1..=7"))
    }
}

impl From<TaskId> for u8 {
    fn from(t: TaskId) -> u8 {
        t.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicPair {
    pub premise: Vec<Formula>,
    pub hypothesis: Formula,
    pub label: Label,
    pub task: TaskId,
    pub template_id: String,
}

impl SymbolicPair {
    /// Premise followed by hypothesis.
    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.premise.iter().chain(std::iter::once(&self.hypothesis))
    }

    pub fn operators(&self) -> BTreeSet<Operator> {
        self.formulas().flat_map(|f| f.operators()).collect()
    }

    /// Applies one renaming to premise and hypothesis together.
    pub fn renamed(&self, map: &BTreeMap<Constant, Constant>) -> Result<SymbolicPair, LogicError> {
        let all: Vec<Formula> = self.formulas().cloned().collect();
        let mut renamed = rename_all(&all, map)?;
        let hypothesis = renamed.pop().expect("pair has a hypothesis");
        Ok(SymbolicPair {
            premise: renamed,
            hypothesis,
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pe(id: &str) -> Constant {
        Constant::new(id, Sort::Person).unwrap()
    }

    fn pl(id: &str) -> Constant {
        Constant::new(id, Sort::Place).unwrap()
    }

    #[test]
    fn visit_requires_person_agent() {
        assert!(Formula::visit(pe("charles"), pl("chile")).is_ok());
        assert!(Formula::visit(pe("charles"), pe("joe")).is_ok());
        let err = Formula::visit(pl("chile"), pe("joe")).unwrap_err();
        assert!(matches!(err, LogicError::Sort { constructor: "visit", .. }));
    }

    #[test]
    fn comparatives_relate_people_only() {
        assert!(Formula::taller(pe("a"), pl("b")).is_err());
        assert!(Formula::as_tall(pl("a"), pe("b")).is_err());
        assert!(Formula::taller(pe("a"), pe("b")).is_ok());
    }

    #[test]
    fn negate_eliminates_double_negation() {
        let v = Formula::visit(pe("joe"), pl("japan")).unwrap();
        let n = negate(&v);
        assert_eq!(n, Formula::not(v.clone()));
        assert_eq!(negate(&n), v);
    }

    #[test]
    fn binders_cannot_shadow() {
        let x = Variable::new("x", Sort::Person).unwrap();
        let p = Variable::new("p", Sort::Place).unwrap();
        let inner = Formula::forall(x.clone(), Formula::visit(&x, &p).unwrap());
        let body = Formula::forall(p.clone(), inner.unwrap()).unwrap();
        assert_eq!(
            Formula::forall(x, body).unwrap_err(),
            LogicError::Shadowing("x".into())
        );
    }

    #[test]
    fn count_range_is_enforced() {
        let p = Variable::new("p", Sort::Place).unwrap();
        let body = Formula::visit(pe("philip"), &p).unwrap();
        assert!(Formula::count(0, p.clone(), body.clone()).is_err());
        assert!(Formula::count(31, p.clone(), body.clone()).is_err());
        assert!(Formula::count(30, p, body).is_ok());
    }

    #[test]
    fn free_variable_is_not_a_sentence() {
        let x = Variable::new("x", Sort::Person).unwrap();
        let f = Formula::visit(&x, pl("chile")).unwrap();
        assert_eq!(f.check_sentence(), Err(LogicError::FreeVariable("x".into())));
    }

    #[test]
    fn conjunction_flattens() {
        let a = Formula::visit(pe("a"), pl("p")).unwrap();
        let b = Formula::visit(pe("b"), pl("p")).unwrap();
        let c = Formula::visit(pe("c"), pl("p")).unwrap();
        let inner = Formula::and([a.clone(), b.clone()]).unwrap();
        let f = Formula::and([inner, c.clone()]).unwrap();
        assert_eq!(f, Formula::And(vec![a, b, c]));
        assert_eq!(Formula::and([]), Err(LogicError::EmptyConjunction));
    }

    #[test]
    fn free_constants_partitions_by_sort() {
        let f = Formula::visit(pe("charles"), pl("chile")).unwrap();
        let (people, places) = free_constants(&f);
        assert_eq!(people, BTreeSet::from([pe("charles")]));
        assert_eq!(places, BTreeSet::from([pl("chile")]));

        let y = Variable::new("y", Sort::Person).unwrap();
        let p = Variable::new("p", Sort::Place).unwrap();
        let property = Formula::forall(p.clone(), Formula::visit(&y, &p).unwrap()).unwrap();
        let desc = Formula::iota(pe("carlos"), y, property).unwrap();
        let fact = Formula::visit(pe("carlos"), pe("john")).unwrap();
        let (people, places) = constants_of([&desc, &fact]);
        assert_eq!(people, BTreeSet::from([pe("carlos"), pe("john")]));
        assert!(places.is_empty());
    }

    #[test]
    fn twelve_facts_have_at_most_24_constants() {
        let facts: Vec<Formula> = (0..12)
            .map(|i| Formula::visit(Constant::person(i), Constant::place(i)).unwrap())
            .collect();
        let f = Formula::and(facts).unwrap();
        let (people, places) = free_constants(&f);
        assert_eq!(people.len() + places.len(), 24);
    }

    #[test]
    fn rename_maps_constants() {
        let f = Formula::visit(pe("charles"), pl("chile")).unwrap();
        let map = BTreeMap::from([(pe("charles"), pe("anna")), (pl("chile"), pl("peru"))]);
        assert_eq!(
            rename_constants(&f, &map).unwrap(),
            Formula::visit(pe("anna"), pl("peru")).unwrap()
        );
    }

    #[test]
    fn rename_rejects_sort_change_and_merges() {
        let f = Formula::visit(pe("charles"), pl("chile")).unwrap();
        let bad_sort = BTreeMap::from([(pe("charles"), pl("chile"))]);
        assert!(matches!(
            rename_constants(&f, &bad_sort),
            Err(LogicError::Renaming(_))
        ));
        let g = Formula::visit(pe("charles"), pe("joe")).unwrap();
        let merge = BTreeMap::from([(pe("charles"), pe("joe"))]);
        assert!(rename_constants(&g, &merge).is_err());
    }

    #[test]
    fn task_hierarchy() {
        assert!(TaskId::SIMPLE_NEGATION.admits(Operator::Not));
        assert!(!TaskId::SIMPLE_NEGATION.admits(Operator::And));
        assert!(TaskId::COUNTING.admits(Operator::Iota));
        assert!(!TaskId::COMPARATIVES.admits(Operator::Count));
        assert!(TaskId::MIXED.admits(Operator::Count));
    }

    #[test]
    fn label_encodings() {
        assert_eq!(Label::Contradiction.as_int(), 1);
        assert_eq!(Label::NonContradiction.as_int(), 0);
        assert_eq!(Label::parse("contradiction"), Some(Label::Contradiction));
        assert_eq!(Label::parse("non-contradiction"), Some(Label::NonContradiction));
        assert_eq!(
            serde_json::to_string(&Label::NonContradiction).unwrap(),
            "\"non-contradiction\""
        );
    }
}
